#pragma once

// Scenario-driven data generation and Monte Carlo studies of the estimators.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ziber/estimation.hpp"
#include "ziber/model.hpp"
#include "ziber/rng.hpp"

namespace ziber {

struct Covariate {
  enum class Kind { StdNormal, Normal, Exponential, Bernoulli };
  Kind kind = Kind::StdNormal;
  double mean = 0.0;
  double sd = 1.0;
  double rate = 1.0;
  double p = 0.5;

  static Covariate std_normal() { return {}; }
  static Covariate normal(double mean, double sd) {
    return Covariate{Kind::Normal, mean, sd, 1.0, 0.5};
  }
  static Covariate exponential(double rate = 1.0) {
    return Covariate{Kind::Exponential, 0.0, 1.0, rate, 0.5};
  }
  static Covariate bernoulli(double p) { return Covariate{Kind::Bernoulli, 0.0, 1.0, 1.0, p}; }

  void validate() const {
    switch (kind) {
      case Kind::StdNormal: return;
      case Kind::Normal:
        if (!(sd > 0.0) || !std::isfinite(mean)) {
          throw std::invalid_argument("Covariate: normal needs finite mean and sd > 0");
        }
        return;
      case Kind::Exponential:
        if (!(rate > 0.0)) throw std::invalid_argument("Covariate: exponential needs rate > 0");
        return;
      case Kind::Bernoulli:
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("Covariate: bernoulli needs p in (0, 1)");
        return;
    }
  }

  double draw(CounterRng& rng) const {
    switch (kind) {
      case Kind::StdNormal: return rng.normal();
      case Kind::Normal: return rng.normal(mean, sd);
      case Kind::Exponential: return rng.exponential(rate);
      case Kind::Bernoulli: return rng.bernoulli(p) ? 1.0 : 0.0;
    }
    return 0.0;
  }
};

struct Scenario {
  std::string name;
  Beta true_beta;
  std::vector<Covariate> x_spec;
  std::vector<Covariate> z_spec;
  /// Z columns that enter the event submodel; all when empty.
  std::optional<std::vector<Index>> event_z_columns;

  Index sp_dim() const { return static_cast<Index>(z_spec.size()) + 1; }
  Index event_dim() const {
    const auto m = event_z_columns ? event_z_columns->size() : z_spec.size();
    return 1 + static_cast<Index>(x_spec.size()) + static_cast<Index>(m);
  }

  void validate() const {
    for (const auto& c : x_spec) c.validate();
    for (const auto& c : z_spec) c.validate();
    if (event_z_columns) {
      for (Index c : *event_z_columns) {
        if (c < 0 || c >= static_cast<Index>(z_spec.size())) {
          throw std::invalid_argument("Scenario " + name + ": event column out of range");
        }
      }
    }
    if (true_beta.spec.plain) throw std::invalid_argument("Scenario " + name + ": plain models are not simulated");
    if (true_beta.gamma.size() != sp_dim() || true_beta.eta.size() != event_dim()) {
      throw std::invalid_argument("Scenario " + name + ": parameter lengths do not match covariates");
    }
    if (true_beta.spec.has_shape() != true_beta.eps.has_value()) {
      throw std::invalid_argument("Scenario " + name + ": GEV shape must be given exactly for gev");
    }
  }
};

/// GEV shape used to generate the built-in GEV scenarios.
inline constexpr double kBuiltinGevShape = 0.25;

namespace detail {

inline Scenario make_scenario(std::string name, LinkKind link, std::vector<double> gamma,
                              std::vector<double> eta, std::vector<Covariate> x,
                              std::vector<Covariate> z,
                              std::optional<std::vector<Index>> event_cols = std::nullopt) {
  Beta beta{ModelSpec{link, false}, Eigen::Map<Vector>(gamma.data(), static_cast<Index>(gamma.size())),
            Eigen::Map<Vector>(eta.data(), static_cast<Index>(eta.size())), std::nullopt};
  if (link == LinkKind::Gev) beta.eps = kBuiltinGevShape;
  return Scenario{std::move(name), std::move(beta), std::move(x), std::move(z), std::move(event_cols)};
}

}  // namespace detail

/// The eight built-in scenarios: case1-A..D (univariate X ~ N(0,1), Z ~ B(1,0.5))
/// and case2-A..D (X ~ N(0,1), Exp(1), B(1,0.3); Z ~ B(1,0.5), N(-1,1); the
/// event submodel uses Z2 only).
inline const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> all = [] {
    using C = Covariate;
    const std::vector<C> x1{C::std_normal()};
    const std::vector<C> z1{C::bernoulli(0.5)};
    const std::vector<C> x2{C::std_normal(), C::exponential(1.0), C::bernoulli(0.3)};
    const std::vector<C> z2{C::bernoulli(0.5), C::normal(-1.0, 1.0)};
    const std::vector<Index> z2_only{1};
    std::vector<Scenario> s;
    s.push_back(detail::make_scenario("case1-A", LinkKind::Logit, {-0.8, 0.9}, {0.7, -1.7, 0.5}, x1, z1));
    s.push_back(detail::make_scenario("case1-B", LinkKind::Probit, {-0.8, 0.9}, {0.7, -1.7, 0.5}, x1, z1));
    s.push_back(detail::make_scenario("case1-C", LinkKind::Cloglog, {0.5, -0.5}, {-0.5, -1.2, 0.5}, x1, z1));
    s.push_back(detail::make_scenario("case1-D", LinkKind::Gev, {-0.5, 0.5}, {-0.5, -1.5, 0.5}, x1, z1));
    s.push_back(detail::make_scenario("case2-A", LinkKind::Logit, {0.5, 0.2, -0.6},
                                      {0.7, -1.7, 0.5, -1.2, 0.5}, x2, z2, z2_only));
    s.push_back(detail::make_scenario("case2-B", LinkKind::Probit, {0.5, 0.2, -0.6},
                                      {0.7, -1.7, 0.5, -1.2, 0.5}, x2, z2, z2_only));
    s.push_back(detail::make_scenario("case2-C", LinkKind::Cloglog, {0.5, -0.2, 0.5},
                                      {-0.5, 0.5, 0.5, -0.5, 0.5}, x2, z2, z2_only));
    s.push_back(detail::make_scenario("case2-D", LinkKind::Gev, {0.5, -0.2, 0.5},
                                      {0.7, -0.5, 0.5, -0.7, 0.5}, x2, z2, z2_only));
    return s;
  }();
  return all;
}

inline const Scenario* find_builtin(std::string_view name) {
  for (const auto& s : builtin_scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

/// Draws n observations. Observation i uses its own substream of `seed`:
/// X columns, then Z columns, then the uniform deciding Y.
inline Dataset generate_dataset(const Scenario& scenario, Index n, std::uint64_t seed) {
  scenario.validate();
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  const Index a = static_cast<Index>(scenario.x_spec.size());
  const Index b = static_cast<Index>(scenario.z_spec.size());
  Vector y(n);
  Matrix x(n, a);
  Matrix z(n, b);
  const auto& cols = scenario.event_z_columns;

  Eigen::RowVectorXd xi(scenario.event_dim());
  Eigen::RowVectorXd zi(scenario.sp_dim());
  for (Index i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    for (Index j = 0; j < a; ++j) x(i, j) = scenario.x_spec[static_cast<std::size_t>(j)].draw(rng);
    for (Index j = 0; j < b; ++j) z(i, j) = scenario.z_spec[static_cast<std::size_t>(j)].draw(rng);
    zi[0] = 1.0;
    zi.tail(b) = z.row(i);
    xi[0] = 1.0;
    xi.segment(1, a) = x.row(i);
    if (cols) {
      for (std::size_t j = 0; j < cols->size(); ++j) xi[1 + a + static_cast<Index>(j)] = z(i, (*cols)[j]);
    } else {
      xi.tail(b) = z.row(i);
    }
    const PerObsEval ev = success_prob(scenario.true_beta, xi, zi);
    y[i] = rng.uniform() < ev.p ? 1.0 : 0.0;
  }
  return Dataset(std::move(y), std::move(x), std::move(z), cols);
}

/// Fraction of zero responses.
inline double zi_ratio(const Dataset& data) {
  return 1.0 - data.y().sum() / static_cast<double>(data.n());
}

struct ReplicationRecord {
  bool converged = false;
  bool failed = false;  // fit threw (degenerate sample)
  double zi_ratio = 0.0;
  Vector estimate;
  Vector ase;
  std::vector<bool> covered;
};

struct ParameterSummary {
  std::string name;
  double true_value = 0.0;
  double bias = 0.0;
  double mean_ase = 0.0;
  double sd = 0.0;
  double cp = 0.0;
};

struct StudyReport {
  std::string scenario;
  std::string link;
  std::optional<double> generating_eps;
  Index n = 0;
  int reps = 0;
  int used = 0;
  int failures = 0;
  double mean_zi_ratio = 0.0;
  double level = 0.95;
  std::vector<ParameterSummary> parameters;

  const ParameterSummary& at(std::string_view name) const {
    for (const auto& p : parameters) {
      if (p.name == name) return p;
    }
    throw std::out_of_range("StudyReport: no parameter named " + std::string(name));
  }
};

struct StudyOptions {
  double level = 0.95;
  /// 0 = hardware concurrency.
  unsigned threads = 0;
};

inline ReplicationRecord run_replication(const Scenario& scenario, Index n, std::uint64_t seed,
                                         const FitConfig& config, double level) {
  ReplicationRecord rec;
  const Dataset data = generate_dataset(scenario, n, seed);
  rec.zi_ratio = zi_ratio(data);
  FitConfig cfg = config;
  cfg.seed = mix64(seed ^ config.seed);
  try {
    const FitResult f = fit(data, scenario.true_beta.spec, cfg);
    rec.converged = f.converged && f.ase.allFinite() && (f.ase.array() > 0.0).all();
    rec.estimate = f.beta_hat.packed();
    rec.ase = f.ase;
    if (rec.converged) {
      const auto rows = wald(f, level);
      const Vector truth = scenario.true_beta.packed();
      for (std::size_t j = 0; j < rows.size(); ++j) {
        const double t = truth[static_cast<Index>(j)];
        rec.covered.push_back(rows[j].lower <= t && t <= rows[j].upper);
      }
    }
  } catch (const std::invalid_argument&) {
    rec.failed = true;
  } catch (const std::runtime_error&) {
    rec.failed = true;
  }
  return rec;
}

/// Aggregates replication records (in index order) into a report.
inline StudyReport summarize(const Scenario& scenario, Index n,
                             const std::vector<ReplicationRecord>& records, double level) {
  StudyReport rep;
  rep.scenario = scenario.name;
  rep.link = std::string(to_string(scenario.true_beta.spec.link));
  rep.generating_eps = scenario.true_beta.eps;
  rep.n = n;
  rep.reps = static_cast<int>(records.size());
  rep.level = level;
  const Vector truth = scenario.true_beta.packed();
  const auto names = parameter_names(scenario.true_beta);
  const Index k = truth.size();

  double zi_sum = 0.0;
  Vector sum = Vector::Zero(k);
  Vector ase_sum = Vector::Zero(k);
  Eigen::VectorXi cover = Eigen::VectorXi::Zero(k);
  std::vector<const ReplicationRecord*> used;
  for (const auto& r : records) {
    zi_sum += r.zi_ratio;
    if (!r.converged) {
      ++rep.failures;
      continue;
    }
    used.push_back(&r);
    sum += r.estimate;
    ase_sum += r.ase;
    for (Index j = 0; j < k; ++j) cover[j] += r.covered[static_cast<std::size_t>(j)] ? 1 : 0;
  }
  rep.used = static_cast<int>(used.size());
  rep.mean_zi_ratio = records.empty() ? 0.0 : zi_sum / static_cast<double>(records.size());
  const double m = static_cast<double>(used.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Index j = 0; j < k; ++j) {
    ParameterSummary p;
    p.name = names[static_cast<std::size_t>(j)];
    p.true_value = truth[j];
    if (used.empty()) {
      p.bias = p.mean_ase = p.sd = p.cp = nan;
    } else {
      const double mean = sum[j] / m;
      p.bias = mean - truth[j];
      p.mean_ase = ase_sum[j] / m;
      double ss = 0.0;
      for (const auto* r : used) ss += (r->estimate[j] - mean) * (r->estimate[j] - mean);
      p.sd = used.size() > 1 ? std::sqrt(ss / (m - 1.0)) : nan;
      p.cp = cover[j] / m;
    }
    rep.parameters.push_back(p);
  }
  return rep;
}

/// Runs one replication per seed. Replications may execute concurrently;
/// results are reduced in seed order so the report does not depend on scheduling.
inline StudyReport run_replications(const Scenario& scenario, Index n,
                                    std::span<const std::uint64_t> seeds, const FitConfig& config,
                                    const StudyOptions& options = {}) {
  scenario.validate();
  if (seeds.size() < 2) throw std::invalid_argument("run_study: need at least 2 replications");
  std::vector<ReplicationRecord> records(seeds.size());
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < seeds.size(); r = next++) {
      records[r] = run_replication(scenario, n, seeds[r], config, options.level);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return summarize(scenario, n, records, options.level);
}

/// Seed of replication r in a study seeded with `seed`.
inline std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) {
  return derive_key(seed ^ 0xA5A5A5A55A5A5A5AULL, r);
}

inline StudyReport run_study(const Scenario& scenario, Index n, int reps, std::uint64_t seed,
                             const FitConfig& config = {}, const StudyOptions& options = {}) {
  if (reps < 2) throw std::invalid_argument("run_study: reps must be >= 2");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) seeds[static_cast<std::size_t>(r)] = replication_seed(seed, static_cast<std::uint64_t>(r));
  return run_replications(scenario, n, seeds, config, options);
}

/// CSV: `#` header lines with study metadata, then
/// parameter,true_value,bias,ase,sd,cp with full precision.
inline void write_report_csv(const StudyReport& rep, std::ostream& out) {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "# scenario=" << rep.scenario << " link=" << rep.link;
  if (rep.generating_eps) s << " eps=" << *rep.generating_eps;
  s << " n=" << rep.n << " reps=" << rep.reps << " used=" << rep.used
    << " failures=" << rep.failures << " mean_zi_ratio=" << rep.mean_zi_ratio
    << " level=" << rep.level << "\n";
  s << "parameter,true_value,bias,ase,sd,cp\n";
  for (const auto& p : rep.parameters) {
    s << p.name << ',' << p.true_value << ',' << p.bias << ',' << p.mean_ase << ',' << p.sd << ','
      << p.cp << "\n";
  }
  out << s.str();
}

}  // namespace ziber
