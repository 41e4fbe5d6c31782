#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "lpstable/verification.hpp"
#include "oracles.hpp"

using namespace lpstable;
using doctest::Approx;

namespace {

std::string golden(const std::string& name) {
  std::ifstream f(std::string(LPSTABLE_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

ConvergenceReport sample_report() {
  const std::vector<SweepRow> oracle{{100, 0.2, 0.01, 0.04, 0.0, 5.0}, {1000, 0.15, 0.005, 0.01, 0.0, 7.0}};
  std::vector<McRow> mc(2);
  mc[0] = {100, 1000, 0.05, 0.125, 0.011, 0.3, 2.0};
  mc[1] = {1000, 1000, 0.25, 0.125, std::nullopt, 0.25, 3.0};
  CriteriaConfig c;
  c.oracle_ratio_max = 0.5;
  c.ks_max = 0.02;
  c.ecf_slack = 0.001;
  return build_report(oracle, mc, c, {{"seed", 7}});
}

}  // namespace

TEST_CASE("ecf examples") {
  SampleMatrix zeros{4, 2, std::vector<double>(8, 0.0)};
  const double u[] = {0.3, -2.0};
  CHECK(ecf(zeros, u).value == std::complex<double>(1.0, 0.0));
  SampleMatrix any{3, 2, {1.0, 2.0, -4.0, 0.5, 3.0, 9.0}};
  const double z[] = {0.0, 0.0};
  CHECK(ecf(any, z).value == std::complex<double>(1.0, 0.0));
  const auto x = sample({1.5, 0.0, 1.0}, 100000, 31);
  const auto e = ecf(x, 1.0);
  CHECK(std::abs(e.value - std::exp(-1.0)) < 0.013);
  CHECK(std::abs(e.value) <= 1.0);
  CHECK(e.se_re <= 1.0 / std::sqrt(1e5));
  CHECK_THROWS_AS(ecf(std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("ks_distance examples") {
  const StandardStable s{1.5, 0.0, 1.0};
  const auto F = [&](double x) { return cdf(s, x); };
  const std::size_t n = 200;
  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) {
    // quantile at (k + 1/2)/n by bisection on the cdf itself
    const double level = (k + 0.5) / n;
    double lo = -1e3, hi = 1e3;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (F(mid) < level ? lo : hi) = mid;
    }
    q[k] = 0.5 * (lo + hi);
  }
  CHECK(ks_distance(q, F) <= 0.5 / n + 1e-9);
  const double med[] = {0.0};
  CHECK(ks_distance(med, F) == Approx(0.5).epsilon(1e-6));
  const double bad[] = {1.0, NAN};
  CHECK_THROWS_AS(ks_distance(bad, F), std::invalid_argument);

  // agrees with the naive oracle and is invariant under a joint monotone map
  const auto x = sample(s, 2000, 4);
  const double d = ks_distance(x, F);
  CHECK(d == Approx(oracle::ks_naive(x, F)).epsilon(1e-15));
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::atan(x[k]);
  CHECK(ks_distance(y, [&](double v) { return F(std::tan(v)); }) == Approx(d).epsilon(1e-12));
  CHECK(d >= 0.0);
  CHECK(d <= 1.0);
}

TEST_CASE("tail_ratio_check") {
  const auto x = sample_innovations(InnovationSpec::pareto_tail(1.5, 1.0, 2.0), 1000000, 77);
  const double l[] = {0.99};
  const auto est = tail_ratio_check(x, 1.5, SlowlyVaryingSpec::constant(1.0), l).front();
  CHECK(std::abs(est.sigma2_hat - 2.0) < 0.2);
  CHECK(est.warning.empty());
  const auto sym = sample_innovations(InnovationSpec::pareto_tail(1.5, 0.7, 0.7), 1000000, 78);
  const auto e2 = tail_ratio_check(sym, 1.5, SlowlyVaryingSpec::constant(1.0), l).front();
  CHECK(std::abs(e2.sigma1_hat / e2.sigma2_hat - 1.0) < 0.15);
  const double outside[] = {1.0};
  CHECK_THROWS_AS(tail_ratio_check(x, 1.5, SlowlyVaryingSpec::constant(1.0), outside), std::invalid_argument);
  const double extreme[] = {0.99999};
  CHECK_FALSE(tail_ratio_check(x, 1.5, SlowlyVaryingSpec::constant(1.0), extreme).front().warning.empty());
}

TEST_CASE("build_report merges and judges") {
  const auto rep = sample_report();
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].N == 100);
  CHECK(rep.rows[0].wall_ms == 7.0);
  CHECK(rep.verdicts.size() == 4);
  CHECK(rep.verdicts[0].name == "oracle_distance_decreasing");
  CHECK(rep.verdicts[0].passed);
  CHECK(rep.verdicts[1].name == "oracle_distance_ratio");
  CHECK_FALSE(rep.verdicts[1].passed);  // 0.75 vs 0.5
  CHECK(rep.verdicts[2].name == "ks_marginal");
  CHECK(rep.verdicts[2].passed);
  CHECK(rep.verdicts[3].name == "ecf_within_bound");
  CHECK_FALSE(rep.verdicts[3].passed);
  CHECK_FALSE(rep.all_passed());
  // verdicts follow from the rows alone
  const auto again = evaluate_criteria(rep.rows, {true, 0.5, false, std::nullopt, 0.02, 0.001});
  for (std::size_t k = 0; k < again.size(); ++k) CHECK(again[k].passed == rep.verdicts[k].passed);
}

TEST_CASE("build_report edge cases") {
  const std::vector<SweepRow> oracle{{10, 0.3, 0.0, 0.0, 0.0, 0.0}, {20, 0.2, 0.0, 0.0, 0.0, 0.0}};
  const auto only = build_report(oracle, {}, {});
  CHECK_FALSE(only.rows[0].ecf_distance.has_value());
  CHECK(report_to_json(only, false)["rows"][0]["ecf_distance"].is_null());
  std::vector<McRow> mc(1);
  mc[0].N = 10;
  CHECK_THROWS_AS(build_report(oracle, mc, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_report({}, {}, {}), std::invalid_argument);
  CHECK(report_to_json(build_report(oracle, {}, {}), false).dump() == report_to_json(only, false).dump());
}

TEST_CASE("report serialization matches the golden files") {
  const auto rep = sample_report();
  CHECK(report_to_csv(rep, false) == golden("report.csv"));
  CHECK(report_to_json(rep, false).dump(2) + "\n" == golden("report.json"));
  CHECK(report_to_csv(rep, true).find("\n100,0.2,0.01,0.05,0.125,0.011,0.3,7\n") != std::string::npos);
}

TEST_CASE("format_double round trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-20) == "1e-20");
  CHECK(format_double(3.0) == "3");
  for (double x : {1.0 / 3.0, -2.5e300, 6.02214076e23}) CHECK(std::stod(format_double(x)) == x);
}
