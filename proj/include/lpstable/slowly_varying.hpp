#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

namespace lpstable {

/// A slowly varying function at infinity.
///
/// Constant:  f(x) = c
/// LogPower:  f(x) = c * (ln(shift + x))^p
///
/// The default shift of e makes LogPower finite and positive on [0, inf).
/// shift = 0 gives the bare logarithm, which is only valid for x > 1.
struct SlowlyVaryingSpec {
  enum class Kind { Constant, LogPower };

  Kind kind = Kind::Constant;
  double c = 1.0;
  double p = 0.0;
  double shift = std::numbers::e;

  static SlowlyVaryingSpec constant(double c) { return {Kind::Constant, c, 0.0, std::numbers::e}; }
  static SlowlyVaryingSpec log_power(double c, double p) { return {Kind::LogPower, c, p, std::numbers::e}; }
  static SlowlyVaryingSpec bare_log_power(double c, double p) { return {Kind::LogPower, c, p, 0.0}; }

  bool is_constant() const { return kind == Kind::Constant || p == 0.0; }

  // Throws std::invalid_argument on c <= 0 or a negative shift.
  void validate() const;
};

double eval_sv(const SlowlyVaryingSpec& spec, double x);

/// a_i = ell(i) / i.
double coefficient(const SlowlyVaryingSpec& ell, std::int64_t i);

/// S_0 = 0, S_k = a_1 + ... + a_k for k = 0..K.
std::vector<double> coefficient_prefix_sums(const SlowlyVaryingSpec& ell, std::int64_t K);

/// H(t) of the domain-of-attraction characterization: h(t) for alpha < 2, and for
/// alpha = 2 the truncated second-moment integral -int_1^t s^2 d(h(s)/s^2).
double big_h(const SlowlyVaryingSpec& h, double alpha, double t);

struct HAlphaResult {
  double value = 0.0;
  double residual = 0.0;  // |H(N^{1/a} x^{1/a}) - x| / x
  int iterations = 0;
  bool used_bisection = false;
};

/// Fixed point x = H(N^{1/alpha} x^{1/alpha}). N is real so that non-integer
/// arguments can be checked; callers normally pass an integer.
HAlphaResult solve_h_alpha(const SlowlyVaryingSpec& h, double alpha, double N);

inline double h_alpha(const SlowlyVaryingSpec& h, double alpha, double N) {
  return solve_h_alpha(h, alpha, N).value;
}

/// How the innovation's slowly varying function enters the normalizer.
///   TailFunction: h is the tail function; H follows from big_h.
///   CfLevel:      h already is H (exact stable laws, where H = 1).
enum class HMode { TailFunction, CfLevel };

struct NormalizerInputs {
  SlowlyVaryingSpec ell;
  SlowlyVaryingSpec h;
  double alpha = 1.5;
  std::int64_t N = 1;
  HMode mode = HMode::TailFunction;
};

/// A_N = N^{1/alpha} H_alpha(N)^{1/alpha} sum_{i<=N} a_i.
double normalizer(const NormalizerInputs& in);

// Same, reusing an existing prefix-sum array with at least N+1 entries.
double normalizer(const NormalizerInputs& in, const std::vector<double>& prefix);

}  // namespace lpstable
