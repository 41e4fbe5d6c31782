#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpstable/cf_oracle.hpp"
#include "lpstable/linear_process.hpp"

namespace lpstable {

struct EcfEstimate {
  std::complex<double> value;
  double se_re = 0.0;  // standard error of the real part
  double se_im = 0.0;
};

/// (1/reps) sum_r exp(i sum_c u_c x[r, c]).
EcfEstimate ecf(const SampleMatrix& samples, std::span<const double> u);
EcfEstimate ecf(std::span<const double> samples, double u);

/// sup_x |F_n(x) - F(x)| evaluated on both sides of every jump.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

struct TailEstimate {
  double level = 0.0;
  double x_right = 0.0;
  double sigma2_hat = 0.0;
  std::size_t right_exceedances = 0;
  double x_left = 0.0;
  double sigma1_hat = 0.0;
  std::size_t left_exceedances = 0;
  std::string warning;  // set when either side has fewer than 100 exceedances
};

/// At x = empirical quantile(level): P(e > x) x^alpha / h(x), and the mirrored
/// left estimate at x = -quantile(1 - level).
std::vector<TailEstimate> tail_ratio_check(std::span<const double> samples, double alpha,
                                           const SlowlyVaryingSpec& h, std::span<const double> levels);

inline constexpr double kDefaultTailLevels[] = {0.95, 0.99, 0.999};

/// One Monte Carlo check at a given N.
struct McRow {
  std::int64_t N = 0;
  std::size_t reps = 0;
  double ecf_distance = 0.0;    // |ECF(u) - reference CF| at fdd.freqs
  double ecf_bound = 0.0;       // 4 / sqrt(reps)
  std::optional<double> ks_marginal;  // column t_m vs its exact finite-N law (exact-stable innovations only)
  double ks_limit = 0.0;        // column t_m vs the limit law Z_{t_m} (trend metric)
  double wall_ms = 0.0;
};

/// Simulates normalized_fdd_sample and compares it with the exact law of the
/// truncated process (exact-stable innovations) or with the limit law otherwise.
McRow monte_carlo_check(const ProcessSpec& process, std::int64_t N, const FddSpec& fdd, std::size_t reps,
                        std::uint64_t seed, unsigned threads = 1);

struct CriteriaConfig {
  bool oracle_monotone = true;              // distances strictly decreasing in N
  std::optional<double> oracle_ratio_max;   // distance(N_last) < ratio * distance(N_first)
  bool past_monotone = false;
  std::optional<double> past_ratio_max;
  std::optional<double> ks_max;             // every ks_marginal below this
  std::optional<double> ecf_slack;          // ecf_distance < ecf_bound + slack
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ReportRow {
  std::int64_t N = 0;
  std::optional<double> oracle_distance;
  std::optional<double> past_part;
  std::optional<double> ecf_distance;
  std::optional<double> ecf_bound;
  std::optional<double> ks_marginal;
  std::optional<double> ks_limit;
  double wall_ms = 0.0;
};

struct ConvergenceReport {
  nlohmann::json metadata;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;

  bool all_passed() const;
};

/// Merges oracle and Monte Carlo rows by N and evaluates the configured criteria.
/// Throws std::invalid_argument when both sets are present with different N grids.
ConvergenceReport build_report(std::span<const SweepRow> oracle, std::span<const McRow> mc,
                               const CriteriaConfig& criteria, nlohmann::json metadata = nlohmann::json::object());

/// Recomputes verdicts from rows alone.
std::vector<Verdict> evaluate_criteria(std::span<const ReportRow> rows, const CriteriaConfig& criteria);

nlohmann::json report_to_json(const ConvergenceReport& report, bool include_timing = true);

/// Header: N,oracle_distance,past_part,ecf_distance,ecf_bound,ks_marginal,ks_limit,wall_ms
std::string report_to_csv(const ConvergenceReport& report, bool include_timing = true);

/// Shortest round-trip decimal form used in every CSV the toolkit writes.
std::string format_double(double x);

}  // namespace lpstable
