#include "lpstable/linear_process.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lpstable/detail/parallel.hpp"
#include "lpstable/errors.hpp"
#include "lpstable/rng.hpp"

namespace lpstable {

namespace {

double coefficient_real(const SlowlyVaryingSpec& ell, double x) { return eval_sv(ell, x) / x; }

// H(t) as the normalizer sees it.
double cf_level_h(const InnovationSpec& innovation, double t) {
  const NormalizerH nh = normalizer_h(innovation);
  if (nh.mode == HMode::CfLevel) return eval_sv(nh.h, t);
  return big_h(nh.h, innovation.alpha(), t);
}

void check_budget(std::int64_t elements, std::int64_t budget) {
  if (elements > budget) {
    throw BudgetError("simulation needs " + std::to_string(elements) + " elements, budget is " +
                      std::to_string(budget));
  }
}

// e_j for the deterministic hooks, j = 1-M .. L-1.
std::vector<double> hook_innovations(InnovationHook hook, std::int64_t M, std::int64_t L) {
  std::vector<double> eps(static_cast<std::size_t>(M + L - 1), hook == InnovationHook::One ? 1.0 : 0.0);
  if (hook == InnovationHook::Impulse) eps[static_cast<std::size_t>(M - 1)] = 1.0;
  return eps;
}

}  // namespace

void FddSpec::validate() const {
  if (times.empty()) throw std::invalid_argument("fdd: need at least one time");
  if (times.size() != freqs.size()) throw std::invalid_argument("fdd: times and freqs differ in length");
  double prev = 0.0;
  for (double t : times) {
    if (!(t > prev) || !std::isfinite(t)) throw std::invalid_argument("fdd: times must be positive and increasing");
    prev = t;
  }
  for (double u : freqs) {
    if (!std::isfinite(u)) throw std::invalid_argument("fdd: frequencies must be finite");
  }
}

std::int64_t grid_index(std::int64_t N, double t) {
  const double x = static_cast<double>(N) * t;
  return static_cast<std::int64_t>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

double truncation_tail(const SlowlyVaryingSpec& ell, const InnovationSpec& innovation, std::int64_t M) {
  if (M < 1) throw std::invalid_argument("truncation_tail: M must be >= 1");
  ell.validate();
  const double alpha = innovation.alpha();
  const auto term = [&](double x) {
    const double a = coefficient_real(ell, x);
    return std::pow(a, alpha) * cf_level_h(innovation, 1.0 / a);
  };

  double sum = 0.0;
  std::int64_t i = M + 1;
  const std::int64_t direct_end = M + 1'000'000;
  for (; i <= direct_end; ++i) {
    const double t = term(static_cast<double>(i));
    sum += t;
    if (t < 1e-16) break;
  }
  // Remainder: int_{i-1/2}^inf term(x) dx with x = x_s w^{-1/(alpha-1)}.
  const double x_s = static_cast<double>(i) - 0.5;
  const double k = 1.0 / (alpha - 1.0);
  const auto g = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double x = x_s * std::pow(w, -k);
    const double jacobian = x_s * k * std::pow(w, -k - 1.0);
    if (!std::isfinite(x) || !std::isfinite(jacobian)) return 0.0;
    const double value = term(x) * jacobian;
    return std::isfinite(value) ? value : 0.0;
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return sum + integrator.integrate(g, 0.0, 1.0, 1e-10);
}

std::int64_t default_truncation(const SlowlyVaryingSpec& ell, const InnovationSpec& innovation, double rel_tol,
                                std::int64_t max_M) {
  const double full = truncation_tail(ell, innovation, 1) +
                      std::pow(coefficient(ell, 1), innovation.alpha()) *
                          cf_level_h(innovation, 1.0 / coefficient(ell, 1));
  for (std::int64_t M = 10'000; M <= max_M; M *= 2) {
    if (truncation_tail(ell, innovation, M) < rel_tol * full) return M;
  }
  throw BudgetError("default_truncation: no M up to " + std::to_string(max_M) + " meets the tail tolerance");
}

std::vector<double> draw_innovations(const ProcessSpec& process, std::int64_t L, std::uint64_t seed) {
  const std::int64_t M = process.truncation;
  if (process.hook != InnovationHook::None) return hook_innovations(process.hook, M, L);
  std::vector<double> eps(static_cast<std::size_t>(M + L - 1));
  Rng rng(seed);
  sample_innovations_into(process.innovation, eps, rng);
  return eps;
}

std::vector<double> simulate_from_innovations(const SlowlyVaryingSpec& ell, std::int64_t M, std::int64_t L,
                                              std::span<const double> eps) {
  if (M < 1 || L < 1) throw std::invalid_argument("simulate: need M >= 1 and L >= 1");
  if (eps.size() != static_cast<std::size_t>(M + L - 1)) {
    throw std::invalid_argument("simulate: innovation buffer must hold M + L - 1 values");
  }
  std::vector<double> a(static_cast<std::size_t>(M) + 1, 0.0);
  for (std::int64_t i = 1; i <= M; ++i) a[static_cast<std::size_t>(i)] = coefficient(ell, i);

  // X_n (n = 1..L) = sum_i a_i e_{n-i}; e_j lives at eps[j + M - 1].
  std::vector<double> x(static_cast<std::size_t>(L), 0.0);
  constexpr std::int64_t kBlock = 256;
  for (std::int64_t n0 = 1; n0 <= L; n0 += kBlock) {
    const std::int64_t n1 = std::min(L, n0 + kBlock - 1);
    for (std::int64_t i = 1; i <= M; ++i) {
      const double ai = a[static_cast<std::size_t>(i)];
      const double* e = eps.data() + (M - 1 - i);
      for (std::int64_t n = n0; n <= n1; ++n) x[static_cast<std::size_t>(n - 1)] += ai * e[n];
    }
  }
  return x;
}

std::vector<double> simulate_path(const ProcessSpec& process, std::int64_t N, double T, std::uint64_t seed,
                                  std::int64_t element_budget) {
  if (N < 1 || !(T > 0.0)) throw std::invalid_argument("simulate_path: need N >= 1 and T > 0");
  const std::int64_t L = grid_index(N, T);
  if (L < 1) throw std::invalid_argument("simulate_path: floor(N T) must be >= 1");
  if (process.truncation < 1) throw std::invalid_argument("simulate_path: truncation must be >= 1");
  check_budget(process.truncation + 2 * L, element_budget);
  const std::vector<double> eps = draw_innovations(process, L, seed);
  return simulate_from_innovations(process.ell, process.truncation, L, eps);
}

std::vector<double> partial_sums(std::span<const double> path, std::int64_t N, std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  double acc = 0.0;
  std::int64_t upto = 0;
  for (double t : times) {
    const std::int64_t K = grid_index(N, t);
    if (K < upto) throw std::invalid_argument("partial_sums: times must be nondecreasing");
    if (K > static_cast<std::int64_t>(path.size())) throw std::out_of_range("partial_sums: floor(N t) beyond path");
    for (; upto < K; ++upto) acc += path[static_cast<std::size_t>(upto)];
    out.push_back(acc);
  }
  return out;
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * cols + c];
  return out;
}

double process_normalizer(const ProcessSpec& process, std::int64_t N) {
  const NormalizerH nh = normalizer_h(process.innovation);
  return normalizer({process.ell, nh.h, process.innovation.alpha(), N, nh.mode});
}

SampleMatrix normalized_fdd_sample(const ProcessSpec& process, std::int64_t N, const FddSpec& fdd,
                                   std::size_t reps, std::uint64_t seed, unsigned threads,
                                   std::int64_t element_budget) {
  fdd.validate();
  if (reps < 1) throw std::invalid_argument("normalized_fdd_sample: reps must be >= 1");
  if (N < 1) throw std::invalid_argument("normalized_fdd_sample: N must be >= 1");
  const std::int64_t M = process.truncation;
  if (M < 1) throw std::invalid_argument("normalized_fdd_sample: truncation must be >= 1");
  const std::size_t m = fdd.size();
  std::vector<std::int64_t> K(m);
  for (std::size_t i = 0; i < m; ++i) K[i] = grid_index(N, fdd.times[i]);
  const std::int64_t L = std::max<std::int64_t>(K.back(), 1);
  const std::int64_t width = M + L - 1;
  check_budget(width * static_cast<std::int64_t>(m + 1 + std::max(1u, threads)), element_budget);

  // Weight of e_j in S(t_i): sum over k = n - j in [max(1, 1-j), min(K_i - j, M)] of a_k.
  const std::vector<double> S = coefficient_prefix_sums(process.ell, std::max(M, L + M));
  std::vector<std::vector<double>> weight(m, std::vector<double>(static_cast<std::size_t>(width), 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::int64_t j = 1 - M; j <= K[i] - 1; ++j) {
      const std::int64_t hi = std::min(K[i] - j, M);
      const std::int64_t lo = std::max<std::int64_t>(0, -j);
      if (hi > lo) weight[i][static_cast<std::size_t>(j + M - 1)] = S[static_cast<std::size_t>(hi)] - S[static_cast<std::size_t>(lo)];
    }
  }
  const double inv_norm = 1.0 / process_normalizer(process, N);

  SampleMatrix out{reps, m, std::vector<double>(reps * m, 0.0)};
  detail::parallel_for(reps, threads, [&](std::size_t r) {
    const std::vector<double> eps = draw_innovations(process, L, derive_seed(seed, r));
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const std::size_t stop = static_cast<std::size_t>(K[i] + M - 1);
      for (std::size_t k = 0; k < stop; ++k) acc += weight[i][k] * eps[k];
      out.data[r * m + i] = acc * inv_norm;
    }
  });
  return out;
}

}  // namespace lpstable
