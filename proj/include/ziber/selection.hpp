#pragma once

// Vuong test for non-nested models fitted on the same observations.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string_view>

#include "ziber/estimation.hpp"

namespace ziber {

enum class Preferred { ModelA, ModelB, Indeterminate };

inline std::string_view to_string(Preferred p) {
  switch (p) {
    case Preferred::ModelA: return "A";
    case Preferred::ModelB: return "B";
    case Preferred::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

struct VuongResult {
  double statistic = 0.0;
  Index n = 0;
  double mean_lr = 0.0;
  double sd_lr = 0.0;
  Preferred preferred = Preferred::Indeterminate;
};

inline constexpr double kVuongThreshold = 1.96;

/// V = sqrt(n) mean(m) / sd(m) with m_i = loglik_a[i] - loglik_b[i] and the
/// (n - 1) sample standard deviation.
inline VuongResult vuong(std::span<const double> loglik_a, std::span<const double> loglik_b) {
  if (loglik_a.size() != loglik_b.size()) {
    throw std::invalid_argument("vuong: per-observation log-likelihoods differ in length");
  }
  const std::size_t n = loglik_a.size();
  if (n < 2) throw std::invalid_argument("vuong: need at least two observations");
  VuongResult res;
  res.n = static_cast<Index>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += loglik_a[i] - loglik_b[i];
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (loglik_a[i] - loglik_b[i]) - mean;
    ss += d * d;
  }
  res.mean_lr = mean;
  res.sd_lr = std::sqrt(ss / static_cast<double>(n - 1));
  if (!std::isfinite(res.mean_lr) || !std::isfinite(res.sd_lr)) {
    throw std::domain_error("vuong: non-finite log-likelihood contributions");
  }
  if (res.sd_lr == 0.0) {
    if (res.mean_lr != 0.0) {
      throw std::domain_error("vuong: constant nonzero log-likelihood ratio (data error)");
    }
    return res;
  }
  res.statistic = std::sqrt(static_cast<double>(n)) * res.mean_lr / res.sd_lr;
  if (res.statistic > kVuongThreshold) {
    res.preferred = Preferred::ModelA;
  } else if (res.statistic < -kVuongThreshold) {
    res.preferred = Preferred::ModelB;
  }
  return res;
}

inline VuongResult vuong(const FitResult& fit_a, const FitResult& fit_b, Index n) {
  if (fit_a.per_obs_loglik.size() != n || fit_b.per_obs_loglik.size() != n) {
    throw std::invalid_argument("vuong: fits were not computed on the same n observations");
  }
  return vuong(std::span<const double>(fit_a.per_obs_loglik.data(), static_cast<std::size_t>(n)),
               std::span<const double>(fit_b.per_obs_loglik.data(), static_cast<std::size_t>(n)));
}

}  // namespace ziber
