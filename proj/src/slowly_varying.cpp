#include "lpstable/slowly_varying.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lpstable/errors.hpp"

namespace lpstable {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("alpha must lie in (1, 2]");
  }
}

// 2 * int_0^{ln t} h(e^y) dy, the integral part of H for alpha = 2.
double log_scale_integral(const SlowlyVaryingSpec& h, double log_t) {
  if (log_t == 0.0) return 0.0;
  const auto f = [&](double y) { return eval_sv(h, std::exp(y)); };
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, log_t, 20, 1e-14, &err);
  if (err > 1e-10 * std::abs(value)) {
    throw ToleranceError("big_h: quadrature missed relative tolerance 1e-10", err / std::abs(value), 1e-10);
  }
  return 2.0 * value;
}

HAlphaResult solve_fixed_point(const std::function<double(double)>& H, double alpha, double N,
                               bool needs_unit_argument) {
  const double n_root = std::pow(N, 1.0 / alpha);
  const auto image = [&](double x) { return H(n_root * std::pow(x, 1.0 / alpha)); };
  const auto admissible = [&](double x) {
    return x > 0.0 && std::isfinite(x) && (!needs_unit_argument || n_root * std::pow(x, 1.0 / alpha) >= 1.0);
  };

  HAlphaResult out;
  double x = H(n_root);
  double last_change = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 1; it <= 200 && admissible(x); ++it) {
    const double next = image(x);
    out.iterations = it;
    last_change = std::abs(next - x);
    x = next;
    if (last_change <= 1e-12 * std::abs(x)) {
      converged = admissible(x);
      break;
    }
  }

  if (!converged) {
    // Bracket the upper root of g(x) = x - H(...) and bisect in log space.
    out.used_bisection = true;
    const auto g = [&](double v) { return v - image(v); };
    double hi = std::max(admissible(x) ? x : 1.0, 1.0);
    int guard = 0;
    while (g(hi) <= 0.0 && guard++ < 200) hi *= 2.0;
    double lo = hi;
    guard = 0;
    while (guard++ < 400) {
      const double cand = lo / 2.0;
      if (!admissible(cand)) break;
      lo = cand;
      if (g(lo) < 0.0) break;
    }
    if (!(g(lo) < 0.0 && g(hi) > 0.0)) {
      const double res = admissible(x) ? std::abs(image(x) - x) / x : std::numeric_limits<double>::infinity();
      throw ConvergenceError("h_alpha: fixed-point iteration did not converge and no bracket was found", x, res);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = std::sqrt(lo * hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    x = 0.5 * (lo + hi);
  }

  out.value = x;
  out.residual = std::abs(image(x) - x) / x;
  if (!(out.residual < 1e-10)) {
    std::ostringstream msg;
    msg << "h_alpha: residual " << out.residual << " above 1e-10 at x = " << x;
    throw ConvergenceError(msg.str(), x, out.residual);
  }
  return out;
}

}  // namespace

void SlowlyVaryingSpec::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("slowly varying scale c must be positive");
  if (kind == Kind::LogPower && (!(shift >= 0.0) || !std::isfinite(p))) {
    throw std::invalid_argument("LogPower needs shift >= 0 and finite p");
  }
}

double eval_sv(const SlowlyVaryingSpec& spec, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("eval_sv: x must be nonnegative");
  if (spec.is_constant()) return spec.c;
  const double L = std::log(spec.shift + x);
  if (!(L > 0.0)) throw std::invalid_argument("eval_sv: bare logarithm evaluated at x <= 1");
  return spec.c * std::pow(L, spec.p);
}

double coefficient(const SlowlyVaryingSpec& ell, std::int64_t i) {
  if (i < 1) throw std::invalid_argument("coefficient: index must be >= 1");
  return eval_sv(ell, static_cast<double>(i)) / static_cast<double>(i);
}

std::vector<double> coefficient_prefix_sums(const SlowlyVaryingSpec& ell, std::int64_t K) {
  if (K < 1) throw std::invalid_argument("coefficient_prefix_sums: K must be >= 1");
  std::vector<double> sums(static_cast<std::size_t>(K) + 1);
  sums[0] = 0.0;
  double acc = 0.0;
  if (ell.is_constant()) {
    for (std::int64_t i = 1; i <= K; ++i) {
      acc += ell.c / static_cast<double>(i);
      sums[static_cast<std::size_t>(i)] = acc;
    }
  } else {
    for (std::int64_t i = 1; i <= K; ++i) {
      acc += coefficient(ell, i);
      sums[static_cast<std::size_t>(i)] = acc;
    }
  }
  return sums;
}

double big_h(const SlowlyVaryingSpec& h, double alpha, double t) {
  check_alpha(alpha);
  if (!(t >= 1.0)) throw std::invalid_argument("big_h: t must be >= 1");
  if (alpha < 2.0) return eval_sv(h, t);

  // alpha = 2, lower limit 1:
  //   -int_1^t s^2 d(h/s^2) = 2 int_1^t h(s)/s ds - h(t) + h(1)
  const double log_t = std::log(t);
  if (h.is_constant()) return 2.0 * h.c * log_t;
  if (h.shift == 0.0) {
    if (!(h.p > 0.0)) throw std::invalid_argument("big_h: bare log power needs p > 0 when alpha = 2");
    return 2.0 * h.c * std::pow(log_t, h.p + 1.0) / (h.p + 1.0) - h.c * std::pow(log_t, h.p);
  }
  return log_scale_integral(h, log_t) - eval_sv(h, t) + eval_sv(h, 1.0);
}

HAlphaResult solve_h_alpha(const SlowlyVaryingSpec& h, double alpha, double N) {
  check_alpha(alpha);
  h.validate();
  if (!(N >= 1.0)) throw std::invalid_argument("h_alpha: N must be >= 1");
  if (alpha < 2.0 && h.is_constant()) return {h.c, 0.0, 0, false};
  return solve_fixed_point([&](double t) { return big_h(h, alpha, t); }, alpha, N, alpha == 2.0);
}

double normalizer(const NormalizerInputs& in, const std::vector<double>& prefix) {
  check_alpha(in.alpha);
  in.ell.validate();
  in.h.validate();
  if (in.N < 1) throw std::invalid_argument("normalizer: N must be >= 1");
  if (prefix.size() <= static_cast<std::size_t>(in.N)) {
    throw std::invalid_argument("normalizer: prefix sums shorter than N + 1");
  }
  const double N = static_cast<double>(in.N);
  double H = 0.0;
  if (in.mode == HMode::CfLevel) {
    H = in.h.is_constant()
            ? in.h.c
            : solve_fixed_point([&](double t) { return eval_sv(in.h, t); }, in.alpha, N, false).value;
  } else {
    H = h_alpha(in.h, in.alpha, N);
  }
  return std::pow(N, 1.0 / in.alpha) * std::pow(H, 1.0 / in.alpha) * prefix[static_cast<std::size_t>(in.N)];
}

double normalizer(const NormalizerInputs& in) {
  if (in.N < 1) throw std::invalid_argument("normalizer: N must be >= 1");
  return normalizer(in, coefficient_prefix_sums(in.ell, in.N));
}

}  // namespace lpstable
