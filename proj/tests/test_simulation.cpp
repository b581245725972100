#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "ziber/simulation.hpp"

using namespace ziber;
using Catch::Approx;

namespace {

double correlation(const Vector& a, const Vector& b) {
  const double ma = a.mean(), mb = b.mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum();
  const double va = (a.array() - ma).square().sum();
  const double vb = (b.array() - mb).square().sum();
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("the eight built-in scenarios") {
  const auto& all = builtin_scenarios();
  REQUIRE(all.size() == 8);
  const Scenario& a = *find_builtin("case1-A");
  CHECK(a.true_beta.gamma == Eigen::Vector2d(-0.8, 0.9));
  CHECK(a.true_beta.eta == Eigen::Vector3d(0.7, -1.7, 0.5));
  const Scenario& d = *find_builtin("case2-D");
  CHECK(d.true_beta.eps.value() == kBuiltinGevShape);
  CHECK(d.event_dim() == 5);
  CHECK(d.sp_dim() == 3);
  CHECK(find_builtin("case1-Z") == nullptr);
  for (const auto& s : all) CHECK_NOTHROW(s.validate());
}

TEST_CASE("generation is reproducible and seed dependent") {
  const Scenario& sc = *find_builtin("case2-B");
  const Dataset a = generate_dataset(sc, 500, 7);
  const Dataset b = generate_dataset(sc, 500, 7);
  CHECK(a.y() == b.y());
  CHECK(a.x_raw() == b.x_raw());
  CHECK(a.z_raw() == b.z_raw());
  const Dataset c = generate_dataset(sc, 500, 8);
  CHECK(a.x_raw() != c.x_raw());
  // A longer sample extends the shorter one: observation i has its own stream.
  const Dataset longer = generate_dataset(sc, 800, 7);
  CHECK(longer.x_raw().topRows(500) == a.x_raw());
}

TEST_CASE("replication streams are uncorrelated") {
  const Scenario& sc = *find_builtin("case1-A");
  double worst = 0.0, sum = 0.0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const Vector ya = generate_dataset(sc, 1000, replication_seed(1, r)).y();
    const Vector yb = generate_dataset(sc, 1000, replication_seed(1, r + 1)).y();
    const double c = correlation(ya, yb);
    worst = std::max(worst, std::fabs(c));
    sum += c;
  }
  // Each correlation ~ N(0, 1/1000): |r| < 5/sqrt(1000), mean within 5/sqrt(100 000).
  CHECK(worst < 5.0 / std::sqrt(1000.0));
  CHECK(std::fabs(sum / 100.0) < 5.0 / std::sqrt(100000.0));
}

TEST_CASE("a saturated event predictor yields no successes") {
  Scenario sc = *find_builtin("case1-A");
  sc.name = "saturated";
  sc.true_beta.gamma.setZero();
  sc.true_beta.eta.setZero();
  sc.true_beta.eta[0] = -30.0;
  const Dataset d = generate_dataset(sc, 100000, 3);
  CHECK(d.y().sum() == 0.0);
  CHECK(zi_ratio(d) == 1.0);
}

TEST_CASE("zi_ratio examples") {
  Vector y(4);
  y << 0, 0, 1, 0;
  const Dataset d(y, Matrix::Zero(4, 1), Matrix::Zero(4, 1));
  CHECK(zi_ratio(d) == 0.75);
  const Dataset ones(Vector::Ones(3), Matrix::Zero(3, 1), Matrix::Zero(3, 1));
  CHECK(zi_ratio(ones) == 0.0);
}

TEST_CASE("mean success probability matches the mean response") {
  for (const auto& sc : builtin_scenarios()) {
    const Index n = 100000;
    const Dataset d = generate_dataset(sc, n, 2024);
    double psum = 0.0;
    for (Index i = 0; i < n; ++i) {
      psum += success_prob(sc.true_beta, d.event_design().row(i), d.sp_design().row(i)).p;
    }
    const double pbar = psum / n;
    const double ybar = d.y().mean();
    INFO(sc.name << " mean p " << pbar << " mean y " << ybar);
    CHECK(std::fabs(pbar - ybar) <= 3.0 * std::sqrt(pbar * (1 - pbar) / n));
  }
}

TEST_CASE("covariate generators have the requested moments") {
  CounterRng rng(17);
  const int n = 100000;
  double sn = 0, se = 0, sb = 0;
  for (int i = 0; i < n; ++i) {
    sn += Covariate::normal(-1.0, 1.0).draw(rng);
    se += Covariate::exponential(1.0).draw(rng);
    sb += Covariate::bernoulli(0.3).draw(rng);
  }
  CHECK(sn / n == Approx(-1.0).margin(5.0 / std::sqrt(n)));
  CHECK(se / n == Approx(1.0).margin(5.0 / std::sqrt(n)));
  CHECK(sb / n == Approx(0.3).margin(5.0 * 0.46 / std::sqrt(n)));
  CHECK_THROWS(Covariate::bernoulli(1.5).validate());
  CHECK_THROWS(Covariate::normal(0.0, -1.0).validate());
  CHECK_THROWS(Covariate::exponential(0.0).validate());
}

TEST_CASE("identical replications have zero spread") {
  const Scenario& sc = *find_builtin("case1-A");
  const std::uint64_t seeds[] = {11, 11};
  const StudyReport rep = run_replications(sc, 400, seeds, FitConfig{}, StudyOptions{0.95, 1});
  REQUIRE(rep.used == 2);
  for (const auto& p : rep.parameters) {
    CHECK(p.sd == 0.0);
    CHECK((p.cp == 0.0 || p.cp == 1.0));
  }
}

TEST_CASE("study reports are deterministic and thread-count independent") {
  const Scenario& sc = *find_builtin("case1-B");
  const StudyReport one = run_study(sc, 300, 8, 5, FitConfig{}, StudyOptions{0.95, 1});
  const StudyReport four = run_study(sc, 300, 8, 5, FitConfig{}, StudyOptions{0.95, 4});
  std::ostringstream a, b;
  write_report_csv(one, a);
  write_report_csv(four, b);
  CHECK(a.str() == b.str());
  CHECK(one.reps == 8);
  CHECK(one.used + one.failures == 8);
  for (const auto& p : one.parameters) {
    CHECK(p.cp >= 0.0);
    CHECK(p.cp <= 1.0);
    CHECK(p.sd >= 0.0);
  }
  CHECK(a.str().find("parameter,true_value,bias,ase,sd,cp") != std::string::npos);
  CHECK_THROWS_AS(run_study(sc, 300, 1, 5), std::invalid_argument);
}

TEST_CASE("mean ASE tracks the Monte Carlo SD at n = 2000") {
  const StudyReport rep = run_study(*find_builtin("case1-A"), 2000, 100, 77);
  REQUIRE(rep.used >= 90);
  for (const auto& p : rep.parameters) {
    INFO(p.name << " ase " << p.mean_ase << " sd " << p.sd);
    CHECK(std::fabs(p.mean_ase - p.sd) <= 0.3 * p.sd);
  }
}

TEST_CASE("the GEV scenario header records the generating shape") {
  const StudyReport rep = run_study(*find_builtin("case1-D"), 300, 2, 1, FitConfig{},
                                    StudyOptions{0.95, 1});
  std::ostringstream s;
  write_report_csv(rep, s);
  CHECK(s.str().rfind("# scenario=case1-D link=gev eps=0.25 ", 0) == 0);
}
