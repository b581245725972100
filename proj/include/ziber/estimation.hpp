#pragma once

// Maximum-likelihood fitting with random restarts, asymptotic standard errors
// from the observed information, and Wald inference.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ziber/links.hpp"
#include "ziber/model.hpp"
#include "ziber/optimizer.hpp"
#include "ziber/rng.hpp"

namespace ziber {

struct FitConfig {
  int max_iters = 500;
  double grad_tol = 1e-6;
  int n_restarts = 5;
  double eps_lower = -0.5;
  double eps_upper = 0.95;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("FitConfig: grad_tol must be > 0");
    if (n_restarts < 1) throw std::invalid_argument("FitConfig: n_restarts must be >= 1");
    if (!(eps_lower < eps_upper)) {
      throw std::invalid_argument("FitConfig: eps bounds must satisfy lower < upper");
    }
  }
};

struct FitResult {
  Beta beta_hat;
  Vector ase;
  double loglik = -std::numeric_limits<double>::infinity();
  Vector per_obs_loglik;
  bool converged = false;
  /// GEV shape at a bound, or a coefficient past the divergence guard.
  bool boundary = false;
  /// Information matrix was not positive definite; ase comes from a floored
  /// eigendecomposition.
  bool singular = false;
  int iterations = 0;
  /// Restart that produced beta_hat.
  int restart = 0;
  Vector score;
};

/// Coefficient magnitude treated as divergence (quasi-separation).
inline constexpr double kDivergenceGuard = 30.0;

struct Inverse {
  Matrix value;
  bool singular = false;
};

/// Inverse of a symmetric matrix: Cholesky when positive definite, otherwise
/// an eigendecomposition with eigenvalues floored at 1e-10.
inline Inverse invert_information(const Matrix& info) {
  const Index k = info.rows();
  Eigen::LLT<Matrix> llt(info);
  if (llt.info() == Eigen::Success && info.allFinite()) {
    return {llt.solve(Matrix::Identity(k, k)), false};
  }
  if (!info.allFinite()) {
    return {Matrix::Constant(k, k, std::numeric_limits<double>::quiet_NaN()), true};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
  Vector vals = eig.eigenvalues().cwiseMax(1e-10);
  return {eig.eigenvectors() * vals.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose(),
          true};
}

namespace detail {

inline bool near_eps_bound(const Beta& beta, const FitConfig& config) {
  return beta.eps && (*beta.eps - config.eps_lower <= 1e-6 || config.eps_upper - *beta.eps <= 1e-6);
}

inline bool past_guard(const Vector& v) { return v.cwiseAbs().maxCoeff() > kDivergenceGuard; }

// A few Newton steps on the observed information to tighten the optimum found
// by BFGS. Steps are only taken when they do not decrease the likelihood.
inline void newton_polish(const ModelSpec& spec, const Dataset& data, const FitConfig& config,
                          Vector& x, double& value, Vector& grad) {
  const Index sp = data.sp_dim();
  const Index ev = data.event_dim();
  for (int it = 0; it < 4; ++it) {
    if (grad.cwiseAbs().maxCoeff() <= 1e-3 * config.grad_tol) return;
    const Matrix info = observed_information(Beta::unpack(spec, sp, ev, x), data);
    Eigen::LLT<Matrix> llt(info);
    if (llt.info() != Eigen::Success) return;
    Vector trial = x + llt.solve(grad);
    if (spec.has_shape()) {
      trial[trial.size() - 1] = std::clamp(trial[trial.size() - 1], config.eps_lower, config.eps_upper);
    }
    const Beta b = Beta::unpack(spec, sp, ev, trial);
    const double f = log_likelihood(b, data);
    if (!std::isfinite(f) || f < value) return;
    const Vector g = score(b, data);
    if (g.cwiseAbs().maxCoeff() >= grad.cwiseAbs().maxCoeff()) return;
    x = std::move(trial);
    value = f;
    grad = g;
  }
}

}  // namespace detail

/// Fits `spec` to `data` by maximum likelihood. Restart 0 starts at zero
/// (eps = 0.1 for GEV); further restarts draw uniformly from [-2, 2] (eps
/// uniformly within its bounds) using substreams of `config.seed`.
inline FitResult fit(const Dataset& data, const ModelSpec& spec, const FitConfig& config = {}) {
  config.validate();
  if (spec.plain && spec.link == LinkKind::Gev) {
    throw std::invalid_argument("fit: plain mode does not support the GEV link");
  }
  const Index sp = data.sp_dim();
  const Index ev = data.event_dim();
  const Index k = Beta::packed_dim(spec, sp, ev);
  if (data.n() <= k) {
    throw std::invalid_argument("fit: need more observations (" + std::to_string(data.n()) +
                                ") than parameters (" + std::to_string(k) + ")");
  }
  const double ones = data.y().sum();
  if (ones == 0.0 || ones == static_cast<double>(data.n())) {
    throw std::invalid_argument("fit: response must contain both zeros and ones");
  }

  auto value = [&](const Vector& v) { return log_likelihood(Beta::unpack(spec, sp, ev, v), data); };
  auto gradient = [&](const Vector& v) { return score(Beta::unpack(spec, sp, ev, v), data); };

  AscentOptions opt;
  opt.max_iters = config.max_iters;
  opt.grad_tol = config.grad_tol;
  opt.divergence_limit = kDivergenceGuard;
  if (spec.has_shape()) {
    opt.lower = Vector::Constant(k, -std::numeric_limits<double>::infinity());
    opt.upper = Vector::Constant(k, std::numeric_limits<double>::infinity());
    opt.lower[k - 1] = config.eps_lower;
    opt.upper[k - 1] = config.eps_upper;
  }

  struct Candidate {
    AscentResult run;
    int restart = -1;
    bool converged = false;
  };
  Candidate best;
  bool have_converged = false;

  for (int r = 0; r < config.n_restarts; ++r) {
    Vector x0 = Vector::Zero(k);
    if (r == 0) {
      if (spec.has_shape()) x0[k - 1] = std::clamp(0.1, config.eps_lower, config.eps_upper);
    } else {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(r));
      for (Index j = 0; j < k; ++j) x0[j] = rng.uniform(-2.0, 2.0);
      if (spec.has_shape()) x0[k - 1] = rng.uniform(config.eps_lower, config.eps_upper);
    }
    AscentResult run = bfgs_maximize(value, gradient, std::move(x0), opt);
    if (run.status == AscentStatus::InfeasibleStart) continue;
    const bool conv = run.status == AscentStatus::Converged && !detail::past_guard(run.x) &&
                      run.gradient.cwiseAbs().maxCoeff() <= config.grad_tol;
    // Converged restarts take precedence; ties keep the lowest restart index.
    const bool better = best.restart < 0 || (conv && !have_converged) ||
                        (conv == have_converged && run.value > best.run.value);
    if (better) {
      best = Candidate{std::move(run), r, conv};
      have_converged = have_converged || conv;
    }
  }
  if (best.restart < 0) {
    throw std::runtime_error("fit: no restart produced a finite log-likelihood");
  }

  Vector x = best.run.x;
  double f = best.run.value;
  Vector g = best.run.gradient;
  if (!detail::past_guard(x)) detail::newton_polish(spec, data, config, x, f, g);

  FitResult out;
  out.beta_hat = Beta::unpack(spec, sp, ev, x);
  out.loglik = f;
  out.per_obs_loglik = per_obs_loglik(out.beta_hat, data);
  out.score = g;
  out.iterations = best.run.iterations;
  out.restart = best.restart;
  out.converged = g.cwiseAbs().maxCoeff() <= config.grad_tol && !detail::past_guard(x);
  out.boundary = detail::near_eps_bound(out.beta_hat, config) || detail::past_guard(x);

  const Inverse inv = invert_information(observed_information(out.beta_hat, data));
  out.singular = inv.singular;
  out.ase = inv.value.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

inline FitResult fit(const Dataset& data, LinkKind link, const FitConfig& config = {}) {
  return fit(data, ModelSpec{link, false}, config);
}

struct WaldRow {
  std::string name;
  double estimate = 0.0;
  double ase = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided normal quantile z_{(1+level)/2}.
inline double wald_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("wald: level must be in (0, 1)");
  return std_normal_quantile(0.5 * (1.0 + level));
}

inline std::vector<WaldRow> wald(const Beta& beta, const Vector& ase, double level = 0.95) {
  const double zc = wald_critical_value(level);
  const Vector est = beta.packed();
  if (ase.size() != est.size()) throw std::invalid_argument("wald: ase length mismatch");
  const auto names = parameter_names(beta);
  std::vector<WaldRow> rows;
  rows.reserve(static_cast<std::size_t>(est.size()));
  for (Index j = 0; j < est.size(); ++j) {
    if (!(std::isfinite(ase[j]) && ase[j] > 0.0)) {
      throw std::invalid_argument("wald: invalid standard error for " +
                                  names[static_cast<std::size_t>(j)]);
    }
    WaldRow row;
    row.name = names[static_cast<std::size_t>(j)];
    row.estimate = est[j];
    row.ase = ase[j];
    row.lower = est[j] - zc * ase[j];
    row.upper = est[j] + zc * ase[j];
    row.z = est[j] / ase[j];
    row.p_value = 2.0 * std_normal_cdf(-std::fabs(row.z));
    rows.push_back(row);
  }
  return rows;
}

/// Wald intervals and p-values of a fit; requires a converged fit.
inline std::vector<WaldRow> wald(const FitResult& fit, double level = 0.95) {
  if (!fit.converged) throw std::invalid_argument("wald: fit did not converge");
  return wald(fit.beta_hat, fit.ase, level);
}

}  // namespace ziber
