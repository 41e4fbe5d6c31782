#include "lpstable/stable_law.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpstable/errors.hpp"

namespace lpstable {

namespace {

using std::numbers::pi;

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
}

// tan(pi a / 2), zero at the Gaussian endpoint.
double skew_tangent(double alpha) { return alpha == 2.0 ? 0.0 : std::tan(pi * alpha / 2.0); }

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Beyond this |x| / scale the Gil-Pelaez integrand oscillates too fast; use the
// non-oscillatory integral over theta instead.
constexpr double kTailSwitch = 4.0;

// P(X > z) for unit scale, alpha in (1, 2), z > 0:
//   (1/pi) int_{-theta0}^{pi/2} exp(-z^{a/(a-1)} V(theta)) dtheta.
// In c = pi/2 - theta the exponent v(c) increases from 0 to infinity; for large z
// all the mass sits in c < c* ~ z^{-a}, with v(c*) = 1. Integrate [0, c*] linearly
// and [c*, c_max] in log c. Reflection handles x < 0.
double upper_tail(double alpha, double beta, double z) {
  using boost::math::quadrature::gauss_kronrod;
  const double theta0 = std::atan(beta * std::tan(pi * alpha / 2.0)) / alpha;
  const double e = alpha / (alpha - 1.0);
  const double shift = std::log(std::cos(alpha * theta0)) / (alpha - 1.0) + e * std::log(z);
  const double c_max = pi / 2.0 + theta0;
  const auto log_v = [&](double c) {
    return shift + (e - 1.0) * std::log(std::sin(c)) - e * std::log(std::sin(alpha * (c_max - c))) +
           std::log(std::cos(alpha * theta0 + (alpha - 1.0) * (pi / 2.0 - c)));
  };
  const auto g = [&](double c) {
    if (!(c > 0.0 && c < c_max)) return 0.0;
    const double lv = log_v(c);
    return std::isnan(lv) ? 0.0 : std::exp(-std::exp(lv));
  };

  // At beta = -1 this is the light tail: v blows up at both ends and there is no split.
  double lo = std::log(1e-300), hi = std::log(c_max);
  if (beta > -1.0 + 1e-12 && log_v(std::exp(hi) * (1.0 - 1e-12)) > 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_v(std::exp(mid)) > 0.0 ? hi : lo) = mid;
    }
  }
  const double c_star = std::exp(hi);

  double err = 0.0, e1 = 0.0, e2 = 0.0;
  double I = gauss_kronrod<double, 31>::integrate(g, 0.0, c_star, 10, 1e-13, &e1);
  if (c_star < c_max) {
    const auto h = [&](double y) {
      const double c = c_star * std::exp(y);
      return g(c) * c;
    };
    I += gauss_kronrod<double, 31>::integrate(h, 0.0, std::log(c_max / c_star), 15, 1e-13, &e2);
  }
  err = (e1 + e2) / pi;
  if (err > 1e-6) throw ToleranceError("cdf: tail quadrature missed absolute tolerance 1e-6", err, 1e-6);
  return I / pi;
}

}  // namespace

void SkewedStableParams::validate() const {
  check_alpha(alpha);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (alpha == 2.0 && D != 0.0) throw std::invalid_argument("D must be 0 when alpha = 2");
  if (std::abs(D) > std::abs(skew_tangent(alpha)) * (1.0 + 1e-12)) {
    throw std::invalid_argument("|D| must not exceed |tan(pi alpha / 2)|");
  }
}

void StandardStable::validate() const {
  check_alpha(alpha);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("scale must be positive");
  if (!(beta >= -1.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [-1, 1]");
}

double stable_tail_constant(double alpha) {
  check_alpha(alpha);
  return 2.0 * std::tgamma(alpha) * std::sin(pi * alpha / 2.0) / pi;
}

SkewedStableParams from_tail_constants(double alpha, double sigma1, double sigma2, TailConvention convention) {
  check_alpha(alpha);
  if (!(sigma1 >= 0.0 && sigma2 >= 0.0)) throw std::invalid_argument("tail constants must be nonnegative");
  const double total = sigma1 + sigma2;
  if (!(total > 0.0)) throw std::invalid_argument("sigma1 + sigma2 must be positive");
  if (alpha == 2.0) return {2.0, total, 0.0};

  const double cosine = std::cos(pi * alpha / 2.0);
  const double tangent = std::tan(pi * alpha / 2.0);
  if (convention == TailConvention::AsPrinted) {
    return {alpha, total * std::tgamma(std::abs(alpha - 1.0)) * std::abs(cosine),
            (sigma1 - sigma2) / total * tangent};
  }
  // Gamma(1 - a) cos(pi a / 2) > 0 on (1, 2): both factors are negative.
  return {alpha, total * std::tgamma(1.0 - alpha) * cosine, (sigma2 - sigma1) / total * tangent};
}

StandardStable to_standard(const SkewedStableParams& params) {
  params.validate();
  StandardStable out{params.alpha, 0.0, std::pow(params.sigma, 1.0 / params.alpha)};
  if (params.alpha < 2.0) out.beta = std::clamp(params.D / skew_tangent(params.alpha), -1.0, 1.0);
  return out;
}

SkewedStableParams from_standard(const StandardStable& std_params) {
  std_params.validate();
  const double alpha = std_params.alpha;
  return {alpha, std::pow(std_params.scale, alpha), std_params.beta * skew_tangent(alpha)};
}

std::complex<double> log_cf(const SkewedStableParams& params, double u, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("log_cf: t must be positive");
  if (u == 0.0) return {0.0, 0.0};
  const double magnitude = t * params.sigma * std::pow(std::abs(u), params.alpha);
  return {-magnitude, magnitude * params.D * sgn(u)};
}

std::complex<double> log_cf(const StandardStable& std_params, double u) {
  return log_cf(from_standard(std_params), u);
}

void sample_into(const StandardStable& std_params, std::span<double> out, Rng& rng) {
  std_params.validate();
  const double alpha = std_params.alpha;
  if (alpha >= kGaussianAlpha) {
    const double sd = std::sqrt(2.0) * std_params.scale;
    for (double& x : out) x = sd * rng.normal();
    return;
  }
  const double bt = std_params.beta * std::tan(pi * alpha / 2.0);
  const double shift = std::atan(bt) / alpha;
  const double factor = std::pow(1.0 + bt * bt, 1.0 / (2.0 * alpha)) * std_params.scale;
  const double inv_alpha = 1.0 / alpha;
  const double outer = (1.0 - alpha) / alpha;
  for (double& x : out) {
    const double v = pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double arg = alpha * (v + shift);
    x = factor * std::sin(arg) / std::pow(std::cos(v), inv_alpha) * std::pow(std::cos(v - arg) / w, outer);
  }
}

std::vector<double> sample(const StandardStable& std_params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
  std::vector<double> out(n);
  Rng rng(seed);
  sample_into(std_params, out, rng);
  return out;
}

double cdf(const StandardStable& std_params, double x) {
  std_params.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("cdf: x must be finite");
  if (std_params.alpha >= kGaussianAlpha) return 0.5 * std::erfc(-x / (2.0 * std_params.scale));
  const double z = x / std_params.scale;
  if (z > kTailSwitch) return 1.0 - upper_tail(std_params.alpha, std_params.beta, z);
  if (z < -kTailSwitch) return upper_tail(std_params.alpha, -std_params.beta, -z);
  return cdf_gil_pelaez(std_params, x);
}

double cdf_gil_pelaez(const StandardStable& std_params, double x) {
  std_params.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("cdf: x must be finite");
  using boost::math::quadrature::gauss_kronrod;

  // Work with unit scale; the law has no location so X = scale * X_1.
  const double alpha = std_params.alpha;
  const double z = x / std_params.scale;
  const double bt = std_params.beta * skew_tangent(alpha);
  const auto integrand = [&](double u) {
    const double ua = std::pow(u, alpha);
    return std::exp(-ua) * std::sin(bt * ua - u * z) / u;
  };

  // Beyond u_max the integrand is below exp(-40) / u_max.
  const double u_max = std::pow(40.0, 1.0 / alpha);
  const double u_split = std::min({1.0, u_max, 1.0 / std::max(std::abs(z), 1.0)});

  double total = 0.0;
  double error = 0.0;

  // (0, u_split): u = u_split e^{-y}. Below u_lo the integrand is
  // bt u^{a-1} - z to leading order; integrate that piece in closed form.
  const double y_max = std::log(1e6);
  const double u_lo = u_split * std::exp(-y_max);
  total += bt * std::pow(u_lo, alpha) / alpha - z * u_lo;
  {
    const auto f = [&](double y) {
      const double u = u_split * std::exp(-y);
      return integrand(u) * u;
    };
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate(f, 0.0, y_max, 15, 1e-13, &err);
    error += err;
  }

  // (u_split, u_max) in panels of at most ~pi of phase each.
  const double phase = std::abs(z) * (u_max - u_split) + std::abs(bt) * 40.0;
  const int panels = std::max(4, static_cast<int>(std::ceil(phase / pi)) + 1);
  const double width = (u_max - u_split) / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = u_split + k * width;
    const double b = k + 1 == panels ? u_max : a + width;
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 10, 1e-13, &err);
    error += err;
  }

  error /= pi;
  if (error > 1e-6) throw ToleranceError("cdf: Gil-Pelaez quadrature missed absolute tolerance 1e-6", error, 1e-6);
  return std::clamp(0.5 - total / pi, 0.0, 1.0);
}

}  // namespace lpstable
