#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lpstable/rng.hpp"
#include "lpstable/slowly_varying.hpp"
#include "lpstable/stable_law.hpp"

namespace lpstable {

/// Mean-zero innovations with exact power tails
///   P(e > x) = sigma2 x^-alpha h(x),  P(e <= -x) = sigma1 x^-alpha h(x)   for x >= x0.
/// The remaining mass sits uniformly on an interval inside (-x0, x0) placed so
/// that E e = 0.
struct ParetoTailSpec {
  double alpha = 1.5;
  double sigma1 = 0.5;
  double sigma2 = 0.5;
  SlowlyVaryingSpec h = SlowlyVaryingSpec::constant(1.0);
};

struct InnovationSpec {
  std::variant<StandardStable, ParetoTailSpec> family;

  static InnovationSpec exact_stable(double alpha, double beta, double scale) {
    return {StandardStable{alpha, beta, scale}};
  }
  static InnovationSpec pareto_tail(double alpha, double sigma1, double sigma2,
                                    SlowlyVaryingSpec h = SlowlyVaryingSpec::constant(1.0)) {
    return {ParetoTailSpec{alpha, sigma1, sigma2, h}};
  }

  bool is_exact_stable() const { return std::holds_alternative<StandardStable>(family); }
  double alpha() const;
  void validate() const;
};

struct TailConstants {
  double alpha;
  double sigma1;
  double sigma2;
  SlowlyVaryingSpec h;
};

// Realized shape of a ParetoTail law.
struct ParetoLayout {
  double x0;        // tail threshold
  double left_mass;   // P(e <= -x0)
  double right_mass;  // P(e > x0)
  double middle_lo;
  double middle_hi;
  double raw_tail_mean;  // (sigma2 - sigma1) * (x0^{1-a} h(x0) + int_{x0}^inf x^-a h(x) dx)
};

ParetoLayout pareto_layout(const ParetoTailSpec& spec);

void sample_innovations_into(const InnovationSpec& spec, std::span<double> out, Rng& rng);
std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n, std::uint64_t seed);

TailConstants tail_constants(const InnovationSpec& spec);

/// CF constants of the attracting stable law (Calibrated convention).
SkewedStableParams innovation_cf_params(const InnovationSpec& spec);

/// The (h, mode) pair the normalizer needs for this innovation family.
struct NormalizerH {
  SlowlyVaryingSpec h;
  HMode mode;
};
NormalizerH normalizer_h(const InnovationSpec& spec);

}  // namespace lpstable
