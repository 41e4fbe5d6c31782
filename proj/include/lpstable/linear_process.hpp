#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpstable/innovations.hpp"
#include "lpstable/slowly_varying.hpp"

namespace lpstable {

/// Deterministic innovation sequences for algebraic checks.
///   Zero:    e_j = 0
///   One:     e_j = 1
///   Impulse: e_j = 1 iff j = 0
enum class InnovationHook { None, Zero, One, Impulse };

/// X_n = sum_{i=1}^{M} a_i e_{n-i}, a_i = ell(i) / i.
struct ProcessSpec {
  SlowlyVaryingSpec ell = SlowlyVaryingSpec::constant(1.0);
  InnovationSpec innovation = InnovationSpec::exact_stable(1.5, 0.0, 1.0);
  std::int64_t truncation = 10000;
  InnovationHook hook = InnovationHook::None;
};

/// Observation times 0 < t_1 < ... < t_m and frequencies u_1..u_m.
struct FddSpec {
  std::vector<double> times;
  std::vector<double> freqs;

  std::size_t size() const { return times.size(); }
  void validate() const;
};

/// floor(N t), tolerant of decimal inputs such as 0.29 * 100.
std::int64_t grid_index(std::int64_t N, double t);

/// Elements allowed in one simulation buffer (innovations plus output).
inline constexpr std::int64_t kDefaultElementBudget = std::int64_t{1} << 28;

/// sum_{i > M} a_i^alpha H(1 / a_i), with H taken from the innovation family.
double truncation_tail(const SlowlyVaryingSpec& ell, const InnovationSpec& innovation, std::int64_t M);

/// Smallest M = 10^4 * 2^k whose truncation tail is below rel_tol times the full series.
std::int64_t default_truncation(const SlowlyVaryingSpec& ell, const InnovationSpec& innovation,
                                double rel_tol = 1e-3, std::int64_t max_M = std::int64_t{1} << 27);

/// Innovations e_{1-M} .. e_{L-1} in the order simulate_path consumes them.
std::vector<double> draw_innovations(const ProcessSpec& process, std::int64_t L, std::uint64_t seed);

/// X_1..X_L for innovations e_{1-M}..e_{L-1} (size M + L - 1).
std::vector<double> simulate_from_innovations(const SlowlyVaryingSpec& ell, std::int64_t M, std::int64_t L,
                                              std::span<const double> innovations);

/// X_1..X_{floor(NT)}.
std::vector<double> simulate_path(const ProcessSpec& process, std::int64_t N, double T, std::uint64_t seed,
                                  std::int64_t element_budget = kDefaultElementBudget);

/// S(t_i) = sum_{n=1}^{floor(N t_i)} X_n.
std::vector<double> partial_sums(std::span<const double> path, std::int64_t N, std::span<const double> times);

struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::vector<double> column(std::size_t c) const;
};

/// reps independent rows of A_N^{-1} S(t_i). Row r uses innovations drawn from
/// derive_seed(seed, r), so it equals the partial sums of
/// simulate_path(process, N, t_m, derive_seed(seed, r)) scaled by 1 / A_N.
SampleMatrix normalized_fdd_sample(const ProcessSpec& process, std::int64_t N, const FddSpec& fdd,
                                   std::size_t reps, std::uint64_t seed, unsigned threads = 1,
                                   std::int64_t element_budget = kDefaultElementBudget);

/// A_N for this process.
double process_normalizer(const ProcessSpec& process, std::int64_t N);

}  // namespace lpstable
