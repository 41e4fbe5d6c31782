#include "lpstable/cf_oracle.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "lpstable/detail/parallel.hpp"
#include "lpstable/errors.hpp"
#include "lpstable/rng.hpp"

namespace lpstable {

namespace {

using cplx = std::complex<double>;

std::vector<std::int64_t> grid_of(std::int64_t N, std::span<const double> times) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  FddSpec check{std::vector<double>(times.begin(), times.end()), std::vector<double>(times.size(), 0.0)};
  check.validate();
  std::vector<std::int64_t> grid{0};
  for (double t : times) grid.push_back(grid_index(N, t));
  return grid;
}

// Accumulates psi(c) = -sigma |c|^a (1 - i D sgn c) as separate real/imaginary sums.
struct PsiSum {
  double re = 0.0;
  double im = 0.0;

  void add(double c, double alpha) {
    if (c == 0.0) return;
    const double mag = std::pow(std::abs(c), alpha);
    re -= mag;
    im += c > 0.0 ? mag : -mag;
  }
  cplx value(const SkewedStableParams& p) const { return {p.sigma * re, p.sigma * p.D * im}; }
};

double coefficient_at(const SlowlyVaryingSpec& ell, double z) { return eval_sv(ell, z) / z; }

// d/dz [ell(z) / z]
double coefficient_slope(const SlowlyVaryingSpec& ell, double z) {
  const double value = eval_sv(ell, z);
  if (ell.is_constant()) return -value / (z * z);
  const double L = std::log(ell.shift + z);
  const double dell = ell.p * value / (L * (ell.shift + z));
  return dell / z - value / (z * z);
}

// int_{z0}^{z0 + width} ell(z)/z dz for z0, width > 0. The width is passed separately:
// z1 - z0 loses all precision once z0 is far beyond 2^53 * width.
double coefficient_integral(const SlowlyVaryingSpec& ell, double z0, double width) {
  if (ell.is_constant()) return ell.c * std::log1p(width / z0);
  // Only used with width << z0, where the integrand is nearly linear in z.
  const auto f = [&](double tau) { return coefficient_at(ell, z0 + width * tau); };
  return width * boost::math::quadrature::gauss<double, 10>::integrate(f, 0.0, 1.0);
}

// sum_{n=p}^{q} a(n + x) for real x >> q, by midpoint Euler-Maclaurin.
double block_sum_smooth(const SlowlyVaryingSpec& ell, std::int64_t p, std::int64_t q, double x) {
  if (q < p) return 0.0;
  const double lo = static_cast<double>(p) - 0.5 + x;
  const double hi = static_cast<double>(q) + 0.5 + x;
  return coefficient_integral(ell, lo, static_cast<double>(q - p + 1)) -
         (coefficient_slope(ell, hi) - coefficient_slope(ell, lo)) / 24.0;
}

struct FarTail {
  cplx value;
  double error;
};

// sum_{d > D} psi(c(d)), with c(x) = inv_norm * sum_i v_i sum_{n in block i} a(n + x).
FarTail far_past_tail(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                      const std::vector<std::int64_t>& grid, const std::vector<double>& v, double inv_norm,
                      std::int64_t D) {
  const double alpha = params.alpha;
  const auto c_at = [&](double x) {
    double c = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (v[i - 1] != 0.0) c += v[i - 1] * block_sum_smooth(ell, grid[i - 1] + 1, grid[i], x);
    }
    return c * inv_norm;
  };
  const auto mag = [&](double x) { return std::pow(std::abs(c_at(x)), alpha); };
  const auto signed_mag = [&](double x) {
    const double c = c_at(x);
    return c == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(c), alpha), c);
  };

  const double x_s = static_cast<double>(D) + 0.5;
  const double k = 1.0 / (alpha - 1.0);
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto integrate = [&](const auto& f) {
    const auto g = [&](double w) {
      if (w <= 0.0) return 0.0;
      const double x = x_s * std::pow(w, -k);
      const double jacobian = x_s * k * std::pow(w, -k - 1.0);
      if (!std::isfinite(x) || !std::isfinite(jacobian)) return 0.0;
      const double value = f(x) * jacobian;
      return std::isfinite(value) ? value : 0.0;
    };
    double err = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(g, 0.0, 1.0, 1e-12, &err, &l1);
    return std::pair{value, err};
  };
  const auto slope = [&](const auto& f) {
    const double h = 1e-3 * x_s;
    return (f(x_s + h) - f(x_s - h)) / (2.0 * h);
  };

  const auto [re_int, re_err] = integrate(mag);
  const auto [im_int, im_err] = integrate(signed_mag);
  const double re = re_int + slope(mag) / 24.0;
  const double im = im_int + slope(signed_mag) / 24.0;

  // Next Euler-Maclaurin term is (7/5760) f'''; f''' ~ a(a+1)(a+2) f / x^3 for f ~ x^-a.
  const double remainder = 10.0 * 7.0 / 5760.0 * alpha * (alpha + 1.0) * (alpha + 2.0) * mag(x_s) / (x_s * x_s * x_s);
  const double error = params.sigma * (remainder + re_err + std::abs(params.D) * im_err);
  return {cplx{-params.sigma * re, params.sigma * params.D * im}, error};
}

}  // namespace

std::vector<double> v_transform(std::span<const double> u) {
  if (u.empty()) throw std::invalid_argument("v_transform: empty input");
  std::vector<double> v(u.size());
  double acc = 0.0;
  for (std::size_t i = u.size(); i-- > 0;) {
    acc += u[i];
    v[i] = acc;
  }
  return v;
}

std::vector<double> inverse_v_transform(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("inverse_v_transform: empty input");
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] - (i + 1 < v.size() ? v[i + 1] : 0.0);
  return u;
}

AggregatedCoefficients::AggregatedCoefficients(const SlowlyVaryingSpec& ell, std::int64_t N,
                                               std::span<const double> times, std::int64_t past_depth,
                                               std::optional<std::int64_t> cap, std::int64_t element_budget)
    : grid_(grid_of(N, times)), past_depth_(past_depth), cap_(cap) {
  if (past_depth < 0) throw std::invalid_argument("aggregated coefficients: past depth must be >= 0");
  if (cap && *cap < 1) throw std::invalid_argument("aggregated coefficients: cap must be >= 1");
  if (cap_) past_depth_ = std::min(past_depth_, *cap_ - 1);
  std::int64_t top = grid_.back() + past_depth_;
  if (cap_) top = std::min(top, *cap_);
  if (top + 1 > element_budget) throw BudgetError("aggregated coefficients: prefix array exceeds element budget");
  prefix_ = top >= 1 ? coefficient_prefix_sums(ell, top) : std::vector<double>{0.0};
}

double AggregatedCoefficients::operator()(std::size_t i, std::int64_t j) const {
  if (i < 1 || i >= grid_.size()) throw std::out_of_range("aggregated coefficients: block index out of range");
  if (j < -past_depth_) throw std::out_of_range("aggregated coefficients: j below the past depth");
  const std::int64_t Ki = grid_[i];
  if (j >= Ki) return 0.0;
  std::int64_t hi = Ki - j;
  std::int64_t lo = std::max(j, grid_[i - 1]) - j;
  if (cap_) {
    hi = std::min(hi, *cap_);
    lo = std::min(lo, *cap_);
  }
  return hi > lo ? prefix_[static_cast<std::size_t>(hi)] - prefix_[static_cast<std::size_t>(lo)] : 0.0;
}

std::vector<FddLogCf> exact_fdd_log_cf_multi(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                                             std::int64_t N, std::span<const double> times,
                                             const std::vector<std::vector<double>>& freqs,
                                             const PastPolicy& policy) {
  params.validate();
  ell.validate();
  const std::vector<std::int64_t> grid = grid_of(N, times);
  const std::size_t m = times.size();
  const std::size_t G = freqs.size();
  std::vector<std::vector<double>> V;
  for (const auto& u : freqs) {
    if (u.size() != m) throw std::invalid_argument("exact_fdd_log_cf: frequency vector length differs from times");
    V.push_back(v_transform(u));
  }
  const double alpha = params.alpha;
  const std::int64_t Km = grid.back();

  const std::vector<double> S = coefficient_prefix_sums(ell, std::max<std::int64_t>({N, Km + 1, 1}));
  const double inv_norm = 1.0 / (std::pow(static_cast<double>(N), 1.0 / alpha) * S[static_cast<std::size_t>(N)]);

  std::vector<PsiSum> window(G), past(G);
  std::vector<FddLogCf> out(G);
  double max_coeff = 0.0;
  std::vector<double> w(m);

  const auto accumulate = [&](std::vector<PsiSum>& target) {
    for (double x : w) max_coeff = std::max(max_coeff, x * inv_norm);
    for (std::size_t g = 0; g < G; ++g) {
      double c = 0.0;
      for (std::size_t i = 0; i < m; ++i) c += V[g][i] * w[i];
      target[g].add(c * inv_norm, alpha);
    }
  };

  if (policy.mode == PastPolicy::Mode::Capped) {
    if (policy.cap < 1) throw std::invalid_argument("exact_fdd_log_cf: cap must be >= 1");
    const AggregatedCoefficients agg(ell, N, times, policy.cap - 1, policy.cap);
    for (std::int64_t j = agg.first_index(); j <= agg.last_index(); ++j) {
      for (std::size_t i = 0; i < m; ++i) w[i] = agg(i + 1, j);
      accumulate(j < 0 ? past : window);
    }
    for (std::size_t g = 0; g < G; ++g) out[g].direct_depth = -agg.first_index();
  } else {
    const AggregatedCoefficients agg(ell, N, times, 0);
    for (std::int64_t j = 0; j <= Km - 1; ++j) {
      for (std::size_t i = 0; i < m; ++i) w[i] = agg(i + 1, j);
      accumulate(window);
    }

    // Past block, j = -d: weight of block i is sum_{n=K_{i-1}+1}^{K_i} a_{n+d}, updated in O(m) per step.
    const double reach = policy.ratio * static_cast<double>(std::max(Km, N));
    const std::int64_t D = std::max<std::int64_t>(policy.min_depth, static_cast<std::int64_t>(std::ceil(reach)));
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = S[static_cast<std::size_t>(grid[i + 1] + 1)] - S[static_cast<std::size_t>(grid[i] + 1)];
    }
    std::vector<double> edge(m + 1);
    for (std::int64_t d = 1; d <= D; ++d) {
      accumulate(past);
      for (std::size_t k = 0; k <= m; ++k) edge[k] = coefficient_at(ell, static_cast<double>(grid[k] + d + 1));
      for (std::size_t i = 0; i < m; ++i) w[i] += edge[i + 1] - edge[i];
    }

    for (std::size_t g = 0; g < G; ++g) {
      out[g].direct_depth = D;
      const FarTail tail = far_past_tail(ell, params, grid, V[g], inv_norm, D);
      if (policy.mode == PastPolicy::Mode::Analytic) {
        out[g].past = tail.value;
        out[g].tail_error = tail.error;
      } else {
        out[g].tail_error = std::abs(tail.value) + tail.error;
      }
      if (out[g].tail_error > policy.tolerance) {
        throw ToleranceError("exact_fdd_log_cf: past truncation misses tolerance", out[g].tail_error,
                             policy.tolerance);
      }
    }
  }

  for (std::size_t g = 0; g < G; ++g) {
    out[g].past += past[g].value(params);
    out[g].window = window[g].value(params);
    out[g].total = out[g].past + out[g].window;
    out[g].max_coefficient = max_coeff;
  }
  return out;
}

FddLogCf exact_fdd_log_cf(const SlowlyVaryingSpec& ell, const SkewedStableParams& params, std::int64_t N,
                          const FddSpec& fdd, const PastPolicy& policy) {
  fdd.validate();
  return exact_fdd_log_cf_multi(ell, params, N, fdd.times, {fdd.freqs}, policy).front();
}

SkewedStableParams predicted_combination_law(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                                             std::int64_t N, const FddSpec& fdd, const PastPolicy& policy) {
  const FddLogCf lc = exact_fdd_log_cf(ell, params, N, fdd, policy);
  const double sigma = -lc.total.real();
  if (!(sigma > 0.0)) throw std::invalid_argument("predicted_combination_law: combination is degenerate");
  return {params.alpha, sigma, params.alpha == 2.0 ? 0.0 : lc.total.imag() / sigma};
}

std::complex<double> limit_log_cf(const SkewedStableParams& params, const FddSpec& fdd) {
  params.validate();
  fdd.validate();
  const std::vector<double> v = v_transform(fdd.freqs);
  cplx acc{0.0, 0.0};
  double prev = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += log_cf(params, v[i], fdd.times[i] - prev);
    prev = fdd.times[i];
  }
  return acc;
}

std::vector<std::vector<double>> frequency_grid(std::size_t m) {
  static constexpr double kLevels[] = {-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0};
  if (m == 0) throw std::invalid_argument("frequency_grid: m must be >= 1");
  std::vector<std::vector<double>> out;
  if (m <= 2) {
    std::vector<std::size_t> idx(m, 0);
    while (true) {
      std::vector<double> u(m);
      for (std::size_t i = 0; i < m; ++i) u[i] = kLevels[idx[i]];
      out.push_back(std::move(u));
      std::size_t pos = 0;
      while (pos < m && ++idx[pos] == 8) idx[pos++] = 0;
      if (pos == m) break;
    }
    return out;
  }
  Rng rng(0x5eedULL + m);
  for (int g = 0; g < 64; ++g) {
    std::vector<double> u(m);
    for (auto& x : u) x = kLevels[static_cast<std::size_t>(rng.uniform() * 8.0)];
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<SweepRow> cf_convergence_sweep(const SlowlyVaryingSpec& ell, const SkewedStableParams& params,
                                           const FddSpec& fdd, std::span<const std::int64_t> N_list,
                                           const PastPolicy& policy, bool use_grid, unsigned threads) {
  fdd.validate();
  if (N_list.empty()) throw std::invalid_argument("cf_convergence_sweep: empty N list");
  for (std::size_t k = 1; k < N_list.size(); ++k) {
    if (N_list[k] <= N_list[k - 1]) throw std::invalid_argument("cf_convergence_sweep: N list must increase");
  }
  std::vector<std::vector<double>> freqs{fdd.freqs};
  std::vector<cplx> limits{limit_log_cf(params, fdd)};
  if (use_grid) {
    for (auto& u : frequency_grid(fdd.size())) {
      limits.push_back(limit_log_cf(params, FddSpec{fdd.times, u}));
      freqs.push_back(std::move(u));
    }
  }

  std::vector<SweepRow> rows(N_list.size());
  const auto run = [&](std::size_t k) {
    const auto start = std::chrono::steady_clock::now();
    const auto results = exact_fdd_log_cf_multi(ell, params, N_list[k], fdd.times, freqs, policy);
    SweepRow row;
    row.N = N_list[k];
    for (std::size_t g = 0; g < results.size(); ++g) {
      row.distance = std::max(row.distance, std::abs(results[g].total - limits[g]));
      row.tail_error = std::max(row.tail_error, results[g].tail_error);
    }
    row.past_part = std::abs(results.front().past);
    row.max_coefficient = results.front().max_coefficient;
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows[k] = row;
  };

  detail::parallel_for(N_list.size(), threads, run);
  return rows;
}

}  // namespace lpstable
