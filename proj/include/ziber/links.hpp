#pragma once

// Susceptible-probability link functions and the special functions behind them.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ziber {

enum class LinkKind { Logit, Probit, Cloglog, Gev };

inline std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::Logit: return "logit";
    case LinkKind::Probit: return "probit";
    case LinkKind::Cloglog: return "cloglog";
    case LinkKind::Gev: return "gev";
  }
  return "unknown";
}

inline std::optional<LinkKind> parse_link(std::string_view name) {
  if (name == "logit") return LinkKind::Logit;
  if (name == "probit") return LinkKind::Probit;
  if (name == "cloglog") return LinkKind::Cloglog;
  if (name == "gev") return LinkKind::Gev;
  return std::nullopt;
}

/// Value of a link at a linear predictor together with its derivatives.
/// `complement` is 1 - prob evaluated without cancellation.
struct LinkEval {
  double prob = 0.0;
  double complement = 1.0;
  double dprob_dt = 0.0;
  double dprob_deps = 0.0;
};

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;

// Below this |eps| the GEV CDF is replaced by its Gumbel limit.
inline constexpr double kGumbelSwitch = 1e-8;

}  // namespace detail

inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

inline double std_normal_pdf(double x) {
  return detail::kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Standard normal CDF. The tail is always taken from erfc, so
/// std_normal_cdf(-x) and 1 - std_normal_cdf(x) are built from the same number.
inline double std_normal_cdf(double x) {
  const double tail = 0.5 * std::erfc(std::fabs(x) * detail::kInvSqrt2);
  return x < 0.0 ? tail : 1.0 - tail;
}

/// Inverse of std_normal_cdf. Acklam's rational approximation refined by one
/// Halley step against std_normal_cdf; |error| is at the double rounding level.
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("std_normal_quantile: probability outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement; the residual is taken in the smaller tail.
  const double e = x < 0.0 ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_cdf(-x);
  const double u = e * detail::kSqrt2Pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

/// GEV(0, 1, eps) CDF: exp(-(1 + eps x)_+^(-1/eps)), Gumbel exp(-exp(-x)) as eps -> 0.
inline double gev_cdf(double x, double eps) {
  if (std::fabs(eps) < detail::kGumbelSwitch) return std::exp(-std::exp(-x));
  const double s = 1.0 + eps * x;
  if (s <= 0.0) return eps > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(eps * x) / eps));
}

namespace detail {

inline LinkEval logit_link(double t) {
  const double h = logistic(t);
  const double hc = logistic(-t);
  return {h, hc, h * hc, 0.0};
}

inline LinkEval probit_link(double t) {
  return {std_normal_cdf(t), std_normal_cdf(-t), std_normal_pdf(t), 0.0};
}

inline LinkEval cloglog_link(double t) {
  const double e = std::exp(-t);
  // exp(-t - e) stays finite (0) when e overflows.
  return {std::exp(-e), -std::expm1(-e), std::exp(-t - e), 0.0};
}

// omega(t) = 1 - G(-t) with G the GEV CDF. With x = -t, s = 1 + eps x and
// u = s^(-1/eps): G = exp(-u), domega/dt = G u / s, domega/deps = G u d(log u)/deps.
inline LinkEval gev_link(double t, double eps) {
  const double x = -t;
  if (std::fabs(eps) < kGumbelSwitch) {
    const double u = std::exp(-x);
    const double g = std::exp(-u);
    // d(log u)/deps at eps = 0 is x^2 / 2.
    return {-std::expm1(-u), g, std::exp(-x - u), std::exp(-x - u) * 0.5 * x * x};
  }
  const double ex = eps * x;
  const double s = 1.0 + ex;
  if (s <= 0.0) {
    // Outside the support the link is flat: omega = 1 (eps > 0) or 0 (eps < 0).
    return eps > 0.0 ? LinkEval{1.0, 0.0, 0.0, 0.0} : LinkEval{0.0, 1.0, 0.0, 0.0};
  }
  const double log_s = std::log1p(ex);
  const double log_u = -log_s / eps;
  const double u = std::exp(log_u);
  const double g = std::exp(-u);
  // d(log u)/deps = log(s)/eps^2 - x/(eps s); series in eps x when small.
  double dlogu_deps;
  if (std::fabs(ex) < 1e-3) {
    // sum_j j/(j+1) x^2 (-eps x)^(j-1)
    double acc = 0.5 * x * x;
    double power = 1.0;
    for (int j = 2; j <= 8; ++j) {
      power *= -ex;
      acc += static_cast<double>(j) * power * x * x / static_cast<double>(j + 1);
    }
    dlogu_deps = acc;
  } else {
    dlogu_deps = log_s / (eps * eps) - x / (eps * s);
  }
  const double gu = std::exp(-u + log_u);  // G * u, finite when u overflows
  const double dprob_dt = gu / s;
  const double dprob_deps = gu * dlogu_deps;
  return {-std::expm1(-u), g, dprob_dt, dprob_deps};
}

}  // namespace detail

/// Evaluates the susceptible-probability link `kind` at linear predictor t.
/// `eps` is the GEV shape and must be given exactly when kind is Gev.
inline LinkEval link_prob(LinkKind kind, double t, std::optional<double> eps = std::nullopt) {
  if (!std::isfinite(t)) throw std::domain_error("link_prob: non-finite linear predictor");
  if ((kind == LinkKind::Gev) != eps.has_value()) {
    throw std::invalid_argument(kind == LinkKind::Gev
                                    ? "link_prob: GEV link requires a shape parameter"
                                    : "link_prob: shape parameter given for a non-GEV link");
  }
  switch (kind) {
    case LinkKind::Logit: return detail::logit_link(t);
    case LinkKind::Probit: return detail::probit_link(t);
    case LinkKind::Cloglog: return detail::cloglog_link(t);
    case LinkKind::Gev:
      if (!std::isfinite(*eps)) throw std::domain_error("link_prob: non-finite GEV shape");
      return detail::gev_link(t, *eps);
  }
  throw std::invalid_argument("link_prob: unknown link");
}

/// log(prob) and log(complement) of a link, accurate in both tails.
struct LinkLogs {
  double log_prob;
  double log_complement;
};

inline LinkLogs link_logs(LinkKind kind, double t, std::optional<double> eps = std::nullopt) {
  switch (kind) {
    case LinkKind::Logit: return {-softplus(-t), -softplus(t)};
    case LinkKind::Probit: return {std::log(std_normal_cdf(t)), std::log(std_normal_cdf(-t))};
    case LinkKind::Cloglog: {
      const double e = std::exp(-t);
      return {-e, std::log(-std::expm1(-e))};
    }
    case LinkKind::Gev: {
      const LinkEval ev = link_prob(kind, t, eps);
      return {std::log(ev.prob), std::log(ev.complement)};
    }
  }
  throw std::invalid_argument("link_logs: unknown link");
}

}  // namespace ziber
