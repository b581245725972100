#pragma once

#include <optional>
#include <random>

#include "ziber/model.hpp"

namespace fixtures {

inline constexpr ziber::LinkKind kAllLinks[] = {ziber::LinkKind::Logit, ziber::LinkKind::Probit,
                                                ziber::LinkKind::Cloglog, ziber::LinkKind::Gev};

/// n rows with `a` normal X columns and `b` mixed normal/binary Z columns;
/// responses are fair coin flips.
inline ziber::Dataset random_dataset(std::mt19937_64& gen, ziber::Index n, ziber::Index a,
                                     ziber::Index b) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::bernoulli_distribution bd(0.5);
  ziber::Vector y(n);
  ziber::Matrix x(n, a), z(n, b);
  for (ziber::Index i = 0; i < n; ++i) {
    y[i] = bd(gen) ? 1.0 : 0.0;
    for (ziber::Index j = 0; j < a; ++j) x(i, j) = nd(gen);
    for (ziber::Index j = 0; j < b; ++j) z(i, j) = j % 2 == 0 ? nd(gen) : (bd(gen) ? 1.0 : 0.0);
  }
  return ziber::Dataset(std::move(y), std::move(x), std::move(z));
}

/// Coefficients uniform on [-scale, scale]; GEV shape uniform on [-0.3, 0.6].
inline ziber::Beta random_beta(std::mt19937_64& gen, const ziber::ModelSpec& spec,
                               const ziber::Dataset& data, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ziber::Beta beta = ziber::Beta::zeros(spec, data);
  for (ziber::Index j = 0; j < beta.gamma.size(); ++j) beta.gamma[j] = u(gen);
  for (ziber::Index j = 0; j < beta.eta.size(); ++j) beta.eta[j] = u(gen);
  if (beta.eps) beta.eps = std::uniform_real_distribution<double>(-0.3, 0.6)(gen);
  return beta;
}

/// Draws y from the model at `beta` using the covariates of `data`.
inline ziber::Dataset resample_response(std::mt19937_64& gen, const ziber::Beta& beta,
                                        const ziber::Dataset& data) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ziber::Vector y(data.n());
  for (ziber::Index i = 0; i < data.n(); ++i) {
    const double p =
        ziber::success_prob(beta, data.event_design().row(i), data.sp_design().row(i)).p;
    y[i] = u(gen) < p ? 1.0 : 0.0;
  }
  return ziber::Dataset(std::move(y), data.x_raw(), data.z_raw(), data.event_z_columns());
}

}  // namespace fixtures
