#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lpstable/linear_process.hpp"
#include "lpstable/slowly_varying.hpp"
#include "lpstable/stable_law.hpp"

namespace lpstable {

/// v_i = u_i + u_{i+1} + ... + u_m.
std::vector<double> v_transform(std::span<const double> u);
/// u_i = v_i - v_{i+1}, v_{m+1} = 0.
std::vector<double> inverse_v_transform(std::span<const double> v);

/// Weight of innovation e_j in the partial-sum increment over (floor(N t_{i-1}), floor(N t_i)]:
///
///   a_j^{[N t_i]} = sum_{n = max(j+1, K_{i-1}+1)}^{K_i} a_{n-j}
///                 = S_{K_i - j} - S_{max(j, K_{i-1}) - j}       (0 when j >= K_i)
///
/// for j in [-J, K_m - 1], with K_i = floor(N t_i) and S the coefficient prefix sums.
/// With a cap M the lags n - j are restricted to 1..M, matching a process
/// truncated at depth M (and j >= 1 - M).
class AggregatedCoefficients {
 public:
  AggregatedCoefficients(const SlowlyVaryingSpec& ell, std::int64_t N, std::span<const double> times,
                         std::int64_t past_depth, std::optional<std::int64_t> cap = std::nullopt,
                         std::int64_t element_budget = kDefaultElementBudget);

  std::size_t blocks() const { return grid_.size() - 1; }
  // K_0 = 0, K_1, ..., K_m.
  std::int64_t boundary(std::size_t i) const { return grid_[i]; }
  std::int64_t first_index() const { return -past_depth_; }
  std::int64_t last_index() const { return grid_.back() - 1; }
  std::optional<std::int64_t> cap() const { return cap_; }

  /// a_j^{[N t_i]} for block i in 1..m.
  double operator()(std::size_t i, std::int64_t j) const;

  const std::vector<double>& prefix() const { return prefix_; }

 private:
  std::vector<std::int64_t> grid_;
  std::int64_t past_depth_;
  std::optional<std::int64_t> cap_;
  std::vector<double> prefix_;
};

/// How the past block j <= -1 is handled.
///   Analytic: sum j = -1..-D exactly with D = max(min_depth, ratio * max(K_m, N)), then the
///             rest by Euler-Maclaurin on the smooth extension of the coefficients.
///   Truncate: sum j = -1..-D and drop the rest; the dropped mass must be below tolerance.
///   Exact process truncated at depth `cap`: lags beyond cap carry no weight and
///   j >= 1 - cap; everything is summed exactly.
struct PastPolicy {
  enum class Mode { Analytic, Truncate, Capped };
  Mode mode = Mode::Analytic;
  double ratio = 16.0;
  std::int64_t min_depth = 1024;
  std::int64_t cap = 0;
  double tolerance = 1e-8;

  static PastPolicy analytic(double ratio = 16.0) { return {Mode::Analytic, ratio}; }
  static PastPolicy truncate(double ratio) { return {Mode::Truncate, ratio}; }
  static PastPolicy capped(std::int64_t M) { return {Mode::Capped, 0.0, 0, M}; }
};

struct FddLogCf {
  std::complex<double> total;
  std::complex<double> past;    // j <= -1
  std::complex<double> window;  // 0 <= j <= K_m - 1
  double tail_error = 0.0;      // bound on what the past-tail treatment may have missed
  std::int64_t direct_depth = 0;
  double max_coefficient = 0.0;  // max_{i,j} a_j^{[N t_i]} / A_N
};

/// Exact log CF of sum_i u_i A_N^{-1} S(t_i) for innovations with log CF exactly
/// -sigma |w|^alpha (1 - i D sgn w):
///   sum_j psi(A_N^{-1} sum_i v_i a_j^{[N t_i]}),  A_N = N^{1/alpha} S_N.
FddLogCf exact_fdd_log_cf(const SlowlyVaryingSpec& ell, const SkewedStableParams& params, std::int64_t N,
                          const FddSpec& fdd, const PastPolicy& policy = PastPolicy::analytic());

/// Same for several frequency vectors sharing one pass over the coefficients.
std::vector<FddLogCf> exact_fdd_log_cf_multi(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                                             std::int64_t N, std::span<const double> times,
                                             const std::vector<std::vector<double>>& freqs,
                                             const PastPolicy& policy = PastPolicy::analytic());

/// Law of A_N^{-1} sum_i u_i S(t_i) under exact stable innovations, when that
/// combination is itself stable: the (alpha, sigma_total, D_total) it follows.
SkewedStableParams predicted_combination_law(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                                             std::int64_t N, const FddSpec& fdd, const PastPolicy& policy);

/// -sum_i (t_i - t_{i-1}) sigma |v_i|^alpha (1 - i D sgn v_i).
std::complex<double> limit_log_cf(const SkewedStableParams& params, const FddSpec& fdd);

/// Frequency vectors for sup-distances: {+-0.25, +-0.5, +-1, +-2}^m, or 64 fixed
/// pseudo-random picks from it when the product exceeds 64.
std::vector<std::vector<double>> frequency_grid(std::size_t m);

struct SweepRow {
  std::int64_t N = 0;
  double distance = 0.0;
  double past_part = 0.0;
  double max_coefficient = 0.0;
  double tail_error = 0.0;
  double wall_ms = 0.0;
};

/// distance(N) = |exact_fdd_log_cf - limit_log_cf| at fdd.freqs (and the sup over
/// frequency_grid when use_grid is set); past_part = |past block|.
std::vector<SweepRow> cf_convergence_sweep(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                                           const FddSpec& fdd, std::span<const std::int64_t> N_list,
                                           const PastPolicy& policy = PastPolicy::analytic(),
                                           bool use_grid = false, unsigned threads = 1);

}  // namespace lpstable
