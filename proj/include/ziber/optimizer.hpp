#pragma once

// Box-constrained BFGS ascent with backtracking Armijo line search.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ziber {

struct AscentOptions {
  int max_iters = 500;
  double grad_tol = 1e-6;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  /// Largest allowed change of any coordinate in one step.
  double max_step = 2.0;
  /// Stop (diverged) once any coordinate exceeds this magnitude.
  double divergence_limit = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lower;  // empty = unbounded
  Eigen::VectorXd upper;
};

enum class AscentStatus { Converged, MaxIterations, LineSearchFailed, Diverged, InfeasibleStart };

struct AscentResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  int iterations = 0;
  AscentStatus status = AscentStatus::MaxIterations;
};

/// Maximizes `value(x)` given its gradient `grad(x)`. `value` may return -inf
/// or NaN for infeasible points; such trial points are rejected by the line
/// search. `on_accept` (optional) sees every accepted iterate and its value.
template <class Value, class Gradient>
AscentResult bfgs_maximize(const Value& value, const Gradient& grad, Eigen::VectorXd x0,
                           const AscentOptions& opt,
                           const std::function<void(const Eigen::VectorXd&, double)>& on_accept = {}) {
  using Eigen::VectorXd;
  const Eigen::Index k = x0.size();
  const bool bounded = opt.lower.size() == k && opt.upper.size() == k;
  auto project = [&](VectorXd& v) {
    if (bounded) v = v.cwiseMax(opt.lower).cwiseMin(opt.upper);
  };
  // Coordinates pinned at a bound with the gradient pointing outward.
  auto active = [&](const VectorXd& v, const VectorXd& g) {
    Eigen::Array<bool, Eigen::Dynamic, 1> a = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(k, false);
    if (!bounded) return a;
    for (Eigen::Index j = 0; j < k; ++j) {
      a[j] = (v[j] <= opt.lower[j] && g[j] < 0.0) || (v[j] >= opt.upper[j] && g[j] > 0.0);
    }
    return a;
  };
  auto projected_norm = [&](const VectorXd& v, const VectorXd& g) {
    const auto a = active(v, g);
    double m = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!a[j]) m = std::max(m, std::fabs(g[j]));
    }
    return m;
  };

  AscentResult res;
  res.x = std::move(x0);
  project(res.x);
  res.value = value(res.x);
  if (!std::isfinite(res.value)) {
    res.status = AscentStatus::InfeasibleStart;
    return res;
  }
  res.gradient = grad(res.x);
  if (on_accept) on_accept(res.x, res.value);

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(k, k);
  bool fresh = true;
  bool retried = false;

  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    if (projected_norm(res.x, res.gradient) <= opt.grad_tol) {
      res.status = AscentStatus::Converged;
      return res;
    }
    const auto act = active(res.x, res.gradient);
    VectorXd g_free = res.gradient;
    Eigen::MatrixXd h_free = h_inv;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (act[j]) {
        g_free[j] = 0.0;
        h_free.row(j).setZero();
        h_free.col(j).setZero();
      }
    }
    VectorXd dir = h_free * g_free;
    double slope = res.gradient.dot(dir);
    if (!(slope > 0.0)) {
      h_inv.setIdentity();
      fresh = true;
      dir = g_free;
      slope = res.gradient.dot(dir);
    }
    const double longest = dir.cwiseAbs().maxCoeff();
    double alpha = longest > opt.max_step ? opt.max_step / longest : 1.0;

    bool accepted = false;
    VectorXd x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < opt.max_backtracks; ++bt, alpha *= opt.backtrack) {
      x_new = res.x + alpha * dir;
      project(x_new);
      const VectorXd step = x_new - res.x;
      if (step.cwiseAbs().maxCoeff() == 0.0) break;
      f_new = value(x_new);
      if (std::isfinite(f_new) && f_new >= res.value + opt.armijo_c1 * res.gradient.dot(step) &&
          f_new >= res.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!fresh && !retried) {
        h_inv.setIdentity();
        fresh = true;
        retried = true;
        continue;
      }
      res.status = AscentStatus::LineSearchFailed;
      return res;
    }
    retried = false;

    const VectorXd g_new = grad(x_new);
    const VectorXd s = x_new - res.x;
    const VectorXd yv = res.gradient - g_new;  // change in the gradient of -f
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (fresh) {
        h_inv *= sy / yv.squaredNorm();
        fresh = false;
      }
      const double rho = 1.0 / sy;
      const VectorXd hy = h_inv * yv;
      h_inv += ((sy + yv.dot(hy)) * rho * rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
    if (on_accept) on_accept(res.x, res.value);

    if (res.x.cwiseAbs().maxCoeff() > opt.divergence_limit) {
      res.status = AscentStatus::Diverged;
      return res;
    }
  }
  res.status = projected_norm(res.x, res.gradient) <= opt.grad_tol ? AscentStatus::Converged
                                                                   : AscentStatus::MaxIterations;
  return res;
}

}  // namespace ziber
