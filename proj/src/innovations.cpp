#include "lpstable/innovations.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <stdexcept>

#include "lpstable/errors.hpp"

namespace lpstable {

namespace {

// sigma * x^-alpha * h(x)
double tail_prob(double sigma, const ParetoTailSpec& s, double x) {
  return sigma * std::pow(x, -s.alpha) * eval_sv(s.h, x);
}

// Smallest x >= lower with (sigma1 + sigma2) x^-a h(x) = target, by bisection in log x.
double solve_tail_level(const ParetoTailSpec& s, double sigma, double target, double lower) {
  if (s.h.is_constant()) return std::max(lower, std::pow(sigma * s.h.c / target, 1.0 / s.alpha));
  double hi = std::max(lower, 2.0);
  for (int guard = 0; tail_prob(sigma, s, hi) > target; ++guard) {
    if (guard > 2000) throw std::runtime_error("pareto tail: cannot bracket tail quantile");
    hi *= 2.0;
  }
  double lo = lower;
  if (tail_prob(sigma, s, lo) <= target) return lo;
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    (tail_prob(sigma, s, std::exp(mid)) > target ? log_lo : log_hi) = mid;
  }
  return std::exp(0.5 * (log_lo + log_hi));
}

// x0^{1-a} h(x0) + int_{x0}^inf x^-a h(x) dx
double tail_first_moment(const ParetoTailSpec& s, double x0) {
  const double head = std::pow(x0, 1.0 - s.alpha) * eval_sv(s.h, x0);
  if (s.h.is_constant()) return head * s.alpha / (s.alpha - 1.0);
  const auto f = [&](double y) {
    const double w = std::exp((1.0 - s.alpha) * y);
    const double x = x0 * std::exp(y);
    // far out the weight has underflowed while h(x) may not be finite
    return w == 0.0 || !std::isfinite(x) ? 0.0 : w * eval_sv(s.h, x);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double integral = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-12, &err);
  if (err > 1e-10 * std::abs(integral)) {
    throw ToleranceError("pareto tail: mean quadrature missed relative tolerance 1e-10", err / integral, 1e-10);
  }
  return head + std::pow(x0, 1.0 - s.alpha) * integral;
}

void validate_pareto(const ParetoTailSpec& s) {
  if (!(s.alpha > 1.0 && s.alpha <= 2.0)) throw std::invalid_argument("pareto tail: alpha must lie in (1, 2]");
  if (!(s.sigma1 >= 0.0 && s.sigma2 >= 0.0 && s.sigma1 + s.sigma2 > 0.0)) {
    throw std::invalid_argument("pareto tail: need sigma1, sigma2 >= 0 and sigma1 + sigma2 > 0");
  }
  s.h.validate();
}

}  // namespace

double InnovationSpec::alpha() const {
  return std::visit([](const auto& f) { return f.alpha; }, family);
}

void InnovationSpec::validate() const {
  if (const auto* st = std::get_if<StandardStable>(&family)) {
    st->validate();
  } else {
    validate_pareto(std::get<ParetoTailSpec>(family));
  }
}

ParetoLayout pareto_layout(const ParetoTailSpec& s) {
  validate_pareto(s);
  const double total = s.sigma1 + s.sigma2;
  const double lower = s.h.is_constant() || s.h.shift > 0.0 ? 1e-300 : std::exp(1.0);
  double tau = std::min(0.5, 0.5 * (s.alpha - 1.0) / s.alpha);
  for (int attempt = 0; attempt < 40; ++attempt, tau *= 0.5) {
    const double x0 = solve_tail_level(s, total, tau, lower);
    if (!s.h.is_constant() && s.h.p > 0.0 && s.h.p / std::log(s.h.shift + x0) >= s.alpha) continue;
    const double moment = (s.sigma2 - s.sigma1) * tail_first_moment(s, x0);
    const double tails = tail_prob(total, s, x0);
    const double centre = -moment / (1.0 - tails);
    if (std::abs(centre) >= 0.9 * x0) continue;
    const double half = x0 - std::abs(centre);
    return {x0, tail_prob(s.sigma1, s, x0), tail_prob(s.sigma2, s, x0), centre - half, centre + half, moment};
  }
  throw std::invalid_argument("pareto tail: no admissible threshold (tail function not decreasing)");
}

void sample_innovations_into(const InnovationSpec& spec, std::span<double> out, Rng& rng) {
  if (const auto* st = std::get_if<StandardStable>(&spec.family)) {
    sample_into(*st, out, rng);
    return;
  }
  const auto& s = std::get<ParetoTailSpec>(spec.family);
  const ParetoLayout layout = pareto_layout(s);
  const double middle_mass = 1.0 - layout.left_mass - layout.right_mass;
  for (double& x : out) {
    const double v = rng.uniform();
    if (v < layout.left_mass) {
      x = -solve_tail_level(s, s.sigma1, v, layout.x0);
    } else if (v > 1.0 - layout.right_mass) {
      x = solve_tail_level(s, s.sigma2, 1.0 - v, layout.x0);
    } else {
      x = layout.middle_lo + (v - layout.left_mass) / middle_mass * (layout.middle_hi - layout.middle_lo);
    }
  }
}

std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_innovations: n must be >= 1");
  std::vector<double> out(n);
  Rng rng(seed);
  sample_innovations_into(spec, out, rng);
  return out;
}

TailConstants tail_constants(const InnovationSpec& spec) {
  spec.validate();
  if (const auto* p = std::get_if<ParetoTailSpec>(&spec.family)) return {p->alpha, p->sigma1, p->sigma2, p->h};
  const auto& st = std::get<StandardStable>(spec.family);
  const auto one = SlowlyVaryingSpec::constant(1.0);
  if (st.alpha == 2.0) {
    const double half = st.scale * st.scale / 2.0;
    return {2.0, half, half, one};
  }
  const double total = stable_tail_constant(st.alpha) * std::pow(st.scale, st.alpha);
  return {st.alpha, total * (1.0 - st.beta) / 2.0, total * (1.0 + st.beta) / 2.0, one};
}

SkewedStableParams innovation_cf_params(const InnovationSpec& spec) {
  const TailConstants tc = tail_constants(spec);
  return from_tail_constants(tc.alpha, tc.sigma1, tc.sigma2, TailConvention::Calibrated);
}

NormalizerH normalizer_h(const InnovationSpec& spec) {
  if (spec.is_exact_stable()) return {SlowlyVaryingSpec::constant(1.0), HMode::CfLevel};
  return {std::get<ParetoTailSpec>(spec.family).h, HMode::TailFunction};
}

}  // namespace lpstable
