#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "lpstable/rng.hpp"

namespace lpstable {

/// Stable law through its log characteristic function
///   ln E exp(iuZ_t) = -t * sigma * |u|^alpha * (1 - i D sgn u).
struct SkewedStableParams {
  double alpha = 1.5;
  double sigma = 1.0;
  double D = 0.0;

  void validate() const;
};

/// Sampling parametrization (location 0):
///   alpha < 2:  exp(-scale^a |u|^a (1 - i beta tan(pi a / 2) sgn u))
///   alpha = 2:  exp(-scale^2 u^2), a Gaussian with variance 2 scale^2.
struct StandardStable {
  double alpha = 1.5;
  double beta = 0.0;
  double scale = 1.0;

  void validate() const;
};

/// Which constants map tail weights (sigma1 left, sigma2 right) to (sigma, D).
///
/// Calibrated: sigma = (s1+s2) Gamma(1-a) cos(pi a/2),  D = (s2-s1)/(s1+s2) tan(pi a/2).
///   The law with these CF constants has P(X > x) ~ s2 x^-a and P(X <= -x) ~ s1 x^-a.
/// AsPrinted: sigma = (s1+s2) Gamma(|a-1|) |cos(pi a/2)|,  D = (s1-s2)/(s1+s2) tan(pi a/2).
///   Kept for comparison; its sigma is off by Gamma(2-a)/((a-1)Gamma(a-1)) and the
///   skew sign is reversed relative to the tails.
enum class TailConvention { Calibrated, AsPrinted };

SkewedStableParams from_tail_constants(double alpha, double sigma1, double sigma2,
                                       TailConvention convention = TailConvention::Calibrated);

StandardStable to_standard(const SkewedStableParams& params);
SkewedStableParams from_standard(const StandardStable& std_params);

std::complex<double> log_cf(const SkewedStableParams& params, double u, double t = 1.0);
std::complex<double> log_cf(const StandardStable& std_params, double u);

/// Total two-sided tail constant: P(|X| > x) ~ C_alpha scale^alpha x^-alpha.
double stable_tail_constant(double alpha);

/// alpha at or above this is sampled and inverted as the Gaussian.
inline constexpr double kGaussianAlpha = 1.999;

/// Chambers-Mallows-Stuck draws.
void sample_into(const StandardStable& std_params, std::span<double> out, Rng& rng);
std::vector<double> sample(const StandardStable& std_params, std::size_t n, std::uint64_t seed);

/// Distribution function. Gaussian closed form for alpha >= kGaussianAlpha,
/// cdf_gil_pelaez for |x| <= 4 scale, and a non-oscillatory integral over
/// (-theta0, pi/2) in the tails, where Gil-Pelaez would need O(|x|) panels.
double cdf(const StandardStable& std_params, double x);

/// F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-iux) phi(u)) / u du, absolute tolerance 1e-6.
/// Valid for every alpha in (1, 2], including the Gaussian endpoint.
double cdf_gil_pelaez(const StandardStable& std_params, double x);

}  // namespace lpstable
