#pragma once

// Zero-inflated Bernoulli regression: P(Y=1 | X, Z) = omega(gamma'Zd) * H(eta'Xd),
// where Zd = (1, Z) and Xd = (1, X, Z[event columns]).

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ziber/links.hpp"

namespace ziber {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowRef = Eigen::Ref<const Eigen::RowVectorXd>;

/// Responses plus the intercept-augmented design views of both submodels.
class Dataset {
 public:
  /// `event_z_columns` selects which Z columns enter the event design;
  /// all of them when omitted.
  Dataset(Vector y, Matrix x_raw, Matrix z_raw,
          std::optional<std::vector<Index>> event_z_columns = std::nullopt)
      : y_(std::move(y)), x_raw_(std::move(x_raw)), z_raw_(std::move(z_raw)) {
    const Index n = y_.size();
    if (n < 1) throw std::invalid_argument("Dataset: need at least one observation");
    if (x_raw_.rows() != n || z_raw_.rows() != n) {
      throw std::invalid_argument("Dataset: covariate rows do not match the response length");
    }
    for (Index i = 0; i < n; ++i) {
      if (y_[i] != 0.0 && y_[i] != 1.0) {
        throw std::invalid_argument("Dataset: response " + std::to_string(i + 1) +
                                    " is not 0 or 1");
      }
    }
    if (!x_raw_.allFinite() || !z_raw_.allFinite()) {
      throw std::invalid_argument("Dataset: non-finite covariate");
    }
    if (event_z_columns) {
      event_z_columns_ = *event_z_columns;
      for (Index c : event_z_columns_) {
        if (c < 0 || c >= z_raw_.cols()) {
          throw std::invalid_argument("Dataset: event column index out of range");
        }
      }
    } else {
      event_z_columns_.resize(static_cast<std::size_t>(z_raw_.cols()));
      std::iota(event_z_columns_.begin(), event_z_columns_.end(), Index{0});
    }

    sp_design_.resize(n, z_raw_.cols() + 1);
    sp_design_.col(0).setOnes();
    sp_design_.rightCols(z_raw_.cols()) = z_raw_;

    const Index m = static_cast<Index>(event_z_columns_.size());
    event_design_.resize(n, 1 + x_raw_.cols() + m);
    event_design_.col(0).setOnes();
    event_design_.middleCols(1, x_raw_.cols()) = x_raw_;
    for (Index j = 0; j < m; ++j) {
      event_design_.col(1 + x_raw_.cols() + j) = z_raw_.col(event_z_columns_[j]);
    }
  }

  Index n() const { return y_.size(); }
  Index a() const { return x_raw_.cols(); }
  Index b() const { return z_raw_.cols(); }
  Index sp_dim() const { return sp_design_.cols(); }
  Index event_dim() const { return event_design_.cols(); }

  const Vector& y() const { return y_; }
  double y(Index i) const { return y_[i]; }
  const Matrix& x_raw() const { return x_raw_; }
  const Matrix& z_raw() const { return z_raw_; }
  const std::vector<Index>& event_z_columns() const { return event_z_columns_; }

  /// Rows are Zd_i = (1, Z_i).
  const RowMatrix& sp_design() const { return sp_design_; }
  /// Rows are Xd_i = (1, X_i, Z_i[event columns]).
  const RowMatrix& event_design() const { return event_design_; }

  /// Same data with rows reordered: row i of the result is row perm[i] here.
  Dataset permuted(const std::vector<Index>& perm) const {
    if (static_cast<Index>(perm.size()) != n()) {
      throw std::invalid_argument("Dataset::permuted: permutation length mismatch");
    }
    Vector y(n());
    Matrix x(n(), a());
    Matrix z(n(), b());
    for (Index i = 0; i < n(); ++i) {
      y[i] = y_[perm[static_cast<std::size_t>(i)]];
      x.row(i) = x_raw_.row(perm[static_cast<std::size_t>(i)]);
      z.row(i) = z_raw_.row(perm[static_cast<std::size_t>(i)]);
    }
    return Dataset(std::move(y), std::move(x), std::move(z), event_z_columns_);
  }

 private:
  Vector y_;
  Matrix x_raw_;
  Matrix z_raw_;
  std::vector<Index> event_z_columns_;
  RowMatrix sp_design_;
  RowMatrix event_design_;
};

/// Which model is being fitted. In `plain` mode the susceptible factor is
/// frozen at omega = 1 and `link` is applied to the event predictor instead,
/// giving an ordinary binary regression on Xd.
struct ModelSpec {
  LinkKind link = LinkKind::Logit;
  bool plain = false;

  bool has_shape() const { return link == LinkKind::Gev && !plain; }
};

inline std::string model_name(const ModelSpec& spec) {
  return (spec.plain ? "plain-" : "") + std::string(to_string(spec.link));
}

/// Parameters packed as (gamma, eta, eps?).
struct Beta {
  ModelSpec spec;
  Vector gamma;
  Vector eta;
  std::optional<double> eps;

  Index dim() const { return gamma.size() + eta.size() + (eps ? 1 : 0); }

  Vector packed() const {
    Vector v(dim());
    v.head(gamma.size()) = gamma;
    v.segment(gamma.size(), eta.size()) = eta;
    if (eps) v[dim() - 1] = *eps;
    return v;
  }

  static Index packed_dim(const ModelSpec& spec, Index sp_dim, Index event_dim) {
    return (spec.plain ? 0 : sp_dim) + event_dim + (spec.has_shape() ? 1 : 0);
  }

  static Beta unpack(const ModelSpec& spec, Index sp_dim, Index event_dim, const Vector& v) {
    if (v.size() != packed_dim(spec, sp_dim, event_dim)) {
      throw std::invalid_argument("Beta::unpack: packed vector has the wrong length");
    }
    Beta beta{spec, {}, {}, std::nullopt};
    const Index gdim = spec.plain ? 0 : sp_dim;
    beta.gamma = v.head(gdim);
    beta.eta = v.segment(gdim, event_dim);
    if (spec.has_shape()) beta.eps = v[v.size() - 1];
    return beta;
  }

  static Beta zeros(const ModelSpec& spec, const Dataset& data);
};

inline Beta Beta::zeros(const ModelSpec& spec, const Dataset& data) {
  Beta beta{spec, Vector::Zero(spec.plain ? 0 : data.sp_dim()), Vector::Zero(data.event_dim()),
            std::nullopt};
  if (spec.has_shape()) beta.eps = 0.0;
  return beta;
}

/// Parameter labels in packed order: gamma0.., eta0.., eps.
inline std::vector<std::string> parameter_names(const Beta& beta) {
  std::vector<std::string> names;
  for (Index j = 0; j < beta.gamma.size(); ++j) names.push_back("gamma" + std::to_string(j));
  for (Index j = 0; j < beta.eta.size(); ++j) names.push_back("eta" + std::to_string(j));
  if (beta.eps) names.push_back("eps");
  return names;
}

struct PerObsEval {
  double p = 0.0;
  double one_minus_p = 1.0;
  double omega = 1.0;
  double h = 0.0;
};

namespace detail {

inline void check_dims(const Beta& beta, const Dataset& data) {
  if (beta.eta.size() != data.event_dim() ||
      (!beta.spec.plain && beta.gamma.size() != data.sp_dim()) ||
      (beta.spec.plain && beta.gamma.size() != 0)) {
    throw std::invalid_argument("parameter dimensions do not match the dataset");
  }
  if (beta.spec.has_shape() != beta.eps.has_value()) {
    throw std::invalid_argument("GEV shape must be present exactly for the GEV-ZIBer model");
  }
  if (beta.spec.plain && beta.spec.link == LinkKind::Gev) {
    throw std::invalid_argument("plain mode does not support the GEV link");
  }
}

// Factors of one observation: susceptible link at gamma'Zd, event link at eta'Xd.
struct Factors {
  LinkEval sp;
  LinkEval ev;
  double t_sp = 0.0;
  double t_ev = 0.0;
};

inline Factors factors(const Beta& beta, const RowRef& xi, const RowRef& zi) {
  Factors f;
  f.t_ev = xi.dot(beta.eta.transpose());
  if (beta.spec.plain) {
    f.sp = LinkEval{1.0, 0.0, 0.0, 0.0};
    f.ev = link_prob(beta.spec.link, f.t_ev);
  } else {
    f.t_sp = zi.dot(beta.gamma.transpose());
    f.sp = link_prob(beta.spec.link, f.t_sp, beta.eps);
    f.ev = link_prob(LinkKind::Logit, f.t_ev);
  }
  return f;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace detail

/// Success probability of one observation with design rows Xd_i and Zd_i.
inline PerObsEval success_prob(const Beta& beta, const RowRef& xi, const RowRef& zi) {
  if (xi.size() != beta.eta.size() || (!beta.spec.plain && zi.size() != beta.gamma.size())) {
    throw std::invalid_argument("success_prob: design row length does not match parameters");
  }
  const auto f = detail::factors(beta, xi, zi);
  PerObsEval out;
  out.omega = f.sp.prob;
  out.h = f.ev.prob;
  out.p = f.sp.prob * f.ev.prob;
  out.one_minus_p = f.sp.complement + f.sp.prob * f.ev.complement;
  return out;
}

/// l_i for observation i, through the link-specific closed forms:
///   logit:  y (a + b) + (1 - y) log(1 + e^a + e^b) - log(1 + e^a) - log(1 + e^b)
///   others: y [b + log w] + (1 - y) log(1 + (1 - w) e^b) - log(1 + e^b)
/// with a = gamma'Zd and b = eta'Xd. Returns -inf when the observation is impossible.
inline double obs_loglik(const Beta& beta, const Dataset& data, Index i) {
  const RowRef xi = data.event_design().row(i);
  const RowRef zi = data.sp_design().row(i);
  const double y = data.y(i);
  const double b = xi.dot(beta.eta.transpose());
  if (!std::isfinite(b)) return detail::kNegInf;

  if (beta.spec.plain) {
    const LinkLogs ev = link_logs(beta.spec.link, b);
    return y == 1.0 ? ev.log_prob : ev.log_complement;
  }

  const double a = zi.dot(beta.gamma.transpose());
  if (!std::isfinite(a)) return detail::kNegInf;
  if (beta.spec.link == LinkKind::Logit) {
    const double hi = std::max({0.0, a, b});
    const double lse = hi + std::log(std::exp(-hi) + std::exp(a - hi) + std::exp(b - hi));
    return y * (a + b) + (1.0 - y) * lse - softplus(a) - softplus(b);
  }
  const LinkLogs sp = link_logs(beta.spec.link, a, beta.eps);
  if (y == 1.0) {
    if (sp.log_prob == detail::kNegInf) return detail::kNegInf;
    return b + sp.log_prob - softplus(b);
  }
  // log(1 + (1 - w) e^b) = softplus(log(1 - w) + b); (1 - w) = 0 gives 0.
  const double shifted = sp.log_complement + b;
  const double zero_part = shifted == detail::kNegInf ? 0.0 : softplus(shifted);
  return zero_part - softplus(b);
}

inline Vector per_obs_loglik(const Beta& beta, const Dataset& data) {
  detail::check_dims(beta, data);
  Vector out(data.n());
  for (Index i = 0; i < data.n(); ++i) out[i] = obs_loglik(beta, data, i);
  return out;
}

/// Log-likelihood; -inf when some observation has probability 0 under beta.
inline double log_likelihood(const Beta& beta, const Dataset& data) {
  detail::check_dims(beta, data);
  double total = 0.0;
  for (Index i = 0; i < data.n(); ++i) {
    const double li = obs_loglik(beta, data, i);
    if (!(li > detail::kNegInf)) return detail::kNegInf;
    total += li;
  }
  return total;
}

namespace detail {

inline void check_score_point(const Beta& beta) {
  if (!beta.packed().allFinite()) throw std::domain_error("score: non-finite parameters");
}

[[noreturn]] inline void impossible_observation(Index i) {
  throw std::domain_error("score: observation " + std::to_string(i + 1) +
                          " has zero probability (log-likelihood is -inf)");
}

}  // namespace detail

/// Logit-ZIBer score via D_i1 = Zd B_i1 (y - p), D_i2 = Xd B_i2 (y - p) with
/// B_i1 = (1 + e^b)/(1 + e^a + e^b) and B_i2 = (1 + e^a)/(1 + e^a + e^b).
inline Vector score_logit_closed_form(const Beta& beta, const Dataset& data) {
  detail::check_dims(beta, data);
  if (beta.spec.plain || beta.spec.link != LinkKind::Logit) {
    throw std::invalid_argument("score_logit_closed_form: logit-ZIBer parameters required");
  }
  detail::check_score_point(beta);
  const Index g = data.sp_dim();
  Vector out = Vector::Zero(beta.dim());
  for (Index i = 0; i < data.n(); ++i) {
    const RowRef xi = data.event_design().row(i);
    const RowRef zi = data.sp_design().row(i);
    const double a = zi.dot(beta.gamma.transpose());
    const double b = xi.dot(beta.eta.transpose());
    const double hi = std::max({0.0, a, b});
    const double lse = hi + std::log(std::exp(-hi) + std::exp(a - hi) + std::exp(b - hi));
    const double b1 = std::exp(softplus(b) - lse);
    const double b2 = std::exp(softplus(a) - lse);
    const double p = logistic(a) * logistic(b);
    // y - p with 1 - p = (1 + e^a + e^b) / ((1 + e^a)(1 + e^b)) for y = 1.
    const double resid = data.y(i) == 1.0 ? std::exp(lse - softplus(a) - softplus(b)) : -p;
    out.head(g) += (b1 * resid) * zi.transpose();
    out.segment(g, data.event_dim()) += (b2 * resid) * xi.transpose();
  }
  return out;
}

/// Score for any model by the chain rule dl_i/dtheta = (y - p)/(p (1 - p)) dp/dtheta.
inline Vector score_chain_rule(const Beta& beta, const Dataset& data) {
  detail::check_dims(beta, data);
  detail::check_score_point(beta);
  const Index g = beta.gamma.size();
  const Index e = data.event_dim();
  Vector out = Vector::Zero(beta.dim());
  for (Index i = 0; i < data.n(); ++i) {
    const RowRef xi = data.event_design().row(i);
    const RowRef zi = data.sp_design().row(i);
    const auto f = detail::factors(beta, xi, zi);
    const double p = f.sp.prob * f.ev.prob;
    const double q = f.sp.complement + f.sp.prob * f.ev.complement;
    const double y = data.y(i);
    if ((y == 1.0 && !(p > 0.0)) || (y == 0.0 && !(q > 0.0))) detail::impossible_observation(i);

    double weight;
    const double var = p * q;
    if (var < 1e-12) {
      weight = y == 1.0 ? 1.0 / p : -1.0 / q;
    } else {
      weight = (y == 1.0 ? q : -p) / var;
    }
    // dp/dgamma = h w' Zd, dp/deta = w h' Xd, dp/deps = h dw/deps
    if (g > 0) out.head(g) += (weight * f.ev.prob * f.sp.dprob_dt) * zi.transpose();
    out.segment(g, e) += (weight * f.sp.prob * f.ev.dprob_dt) * xi.transpose();
    if (beta.eps) out[out.size() - 1] += weight * f.ev.prob * f.sp.dprob_deps;
  }
  return out;
}

/// Gradient of the (unnormalized) log-likelihood in packed order.
inline Vector score(const Beta& beta, const Dataset& data) {
  if (!beta.spec.plain && beta.spec.link == LinkKind::Logit) {
    return score_logit_closed_form(beta, data);
  }
  return score_chain_rule(beta, data);
}

/// Negative Jacobian of a gradient map by central differences, symmetrized.
/// Step for coordinate j is max(1e-5, 1e-5 |x_j|).
template <class Gradient>
Matrix information_from_gradient(const Gradient& grad, const Vector& x) {
  const Index k = x.size();
  Matrix m(k, k);
  Vector xp = x;
  for (Index j = 0; j < k; ++j) {
    const double h = std::max(1e-5, 1e-5 * std::fabs(x[j]));
    xp[j] = x[j] + h;
    const Vector gp = grad(xp);
    xp[j] = x[j] - h;
    const Vector gm = grad(xp);
    xp[j] = x[j];
    m.col(j) = -(gp - gm) / (2.0 * h);
  }
  return 0.5 * (m + m.transpose());
}

/// Observed information -d2 l / dbeta dbeta' at beta.
inline Matrix observed_information(const Beta& beta, const Dataset& data) {
  const ModelSpec spec = beta.spec;
  const Index sp = data.sp_dim();
  const Index ev = data.event_dim();
  return information_from_gradient(
      [&](const Vector& v) { return score(Beta::unpack(spec, sp, ev, v), data); }, beta.packed());
}

}  // namespace ziber
