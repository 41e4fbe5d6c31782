#include "lpstable/verification.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lpstable {

namespace {

EcfEstimate finish_ecf(double sum_re, double sum_im, double sq_re, double sq_im, std::size_t n) {
  const double dn = static_cast<double>(n);
  const double mean_re = sum_re / dn;
  const double mean_im = sum_im / dn;
  const double var_re = std::max(0.0, sq_re / dn - mean_re * mean_re) * dn / (dn - 1.0);
  const double var_im = std::max(0.0, sq_im / dn - mean_im * mean_im) * dn / (dn - 1.0);
  return {{mean_re, mean_im}, std::sqrt(var_re / dn), std::sqrt(var_im / dn)};
}

std::string describe(double value, double bound) {
  std::ostringstream os;
  os.precision(6);
  os << value << " vs " << bound;
  return os.str();
}

template <class Get>
std::vector<double> column_of(std::span<const ReportRow> rows, Get get) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (auto v = get(r)) out.push_back(*v);
  }
  return out;
}

void add_trend_verdicts(std::vector<Verdict>& out, const std::vector<double>& values, const std::string& name,
                        bool monotone, const std::optional<double>& ratio_max) {
  if (values.empty()) return;
  if (monotone) {
    bool ok = true;
    for (std::size_t k = 1; k < values.size(); ++k) ok = ok && values[k] < values[k - 1];
    out.push_back({name + "_decreasing", ok, std::to_string(values.size()) + " values"});
  }
  if (ratio_max) {
    const double ratio = values.back() / values.front();
    out.push_back({name + "_ratio", ratio < *ratio_max, describe(ratio, *ratio_max)});
  }
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

EcfEstimate ecf(const SampleMatrix& samples, std::span<const double> u) {
  if (samples.rows < 2) throw std::invalid_argument("ecf: need at least two replicates");
  if (u.size() != samples.cols) throw std::invalid_argument("ecf: frequency length differs from sample columns");
  double sr = 0.0, si = 0.0, qr = 0.0, qi = 0.0;
  for (std::size_t r = 0; r < samples.rows; ++r) {
    double phase = 0.0;
    for (std::size_t c = 0; c < samples.cols; ++c) phase += u[c] * samples(r, c);
    const double cr = std::cos(phase);
    const double ci = std::sin(phase);
    sr += cr;
    si += ci;
    qr += cr * cr;
    qi += ci * ci;
  }
  return finish_ecf(sr, si, qr, qi, samples.rows);
}

EcfEstimate ecf(std::span<const double> samples, double u) {
  if (samples.size() < 2) throw std::invalid_argument("ecf: need at least two samples");
  double sr = 0.0, si = 0.0, qr = 0.0, qi = 0.0;
  for (double x : samples) {
    const double cr = std::cos(u * x);
    const double ci = std::sin(u * x);
    sr += cr;
    si += ci;
    qr += cr * cr;
    qi += ci * ci;
  }
  return finish_ecf(sr, si, qr, qi, samples.size());
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw std::invalid_argument("ks_distance: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = cdf(sorted[i]);
    worst = std::max({worst, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return std::clamp(worst, 0.0, 1.0);
}

std::vector<TailEstimate> tail_ratio_check(std::span<const double> samples, double alpha,
                                           const SlowlyVaryingSpec& h, std::span<const double> levels) {
  if (samples.empty()) throw std::invalid_argument("tail_ratio_check: no samples");
  for (double lv : levels) {
    if (!(lv > 0.0 && lv < 1.0)) throw std::invalid_argument("tail_ratio_check: levels must lie in (0, 1)");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double dn = static_cast<double>(n);

  std::vector<TailEstimate> out;
  for (double lv : levels) {
    TailEstimate est;
    est.level = lv;
    const auto upper_rank = std::min(n - 1, static_cast<std::size_t>(std::ceil(lv * dn)) - 1);
    est.x_right = sorted[upper_rank];
    est.right_exceedances = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), est.x_right));
    if (est.x_right > 0.0) {
      est.sigma2_hat = static_cast<double>(est.right_exceedances) / dn * std::pow(est.x_right, alpha) / eval_sv(h, est.x_right);
    }

    const auto lower_rank = std::min(n - 1, static_cast<std::size_t>(std::floor((1.0 - lv) * dn)));
    est.x_left = -sorted[lower_rank];
    est.left_exceedances = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), -est.x_left) - sorted.begin());
    if (est.x_left > 0.0) {
      est.sigma1_hat = static_cast<double>(est.left_exceedances) / dn * std::pow(est.x_left, alpha) / eval_sv(h, est.x_left);
    }
    if (est.right_exceedances < 100 || est.left_exceedances < 100) {
      est.warning = "fewer than 100 exceedances at level " + format_double(lv);
    }
    out.push_back(est);
  }
  return out;
}

McRow monte_carlo_check(const ProcessSpec& process, std::int64_t N, const FddSpec& fdd, std::size_t reps,
                        std::uint64_t seed, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  fdd.validate();
  const SampleMatrix sample = normalized_fdd_sample(process, N, fdd, reps, seed, threads);

  McRow row;
  row.N = N;
  row.reps = reps;
  row.ecf_bound = 4.0 / std::sqrt(static_cast<double>(reps));
  const EcfEstimate est = ecf(sample, fdd.freqs);

  const bool exact = process.innovation.is_exact_stable() && process.hook == InnovationHook::None;
  const SkewedStableParams params = exact ? from_standard(std::get<StandardStable>(process.innovation.family))
                                          : innovation_cf_params(process.innovation);
  const PastPolicy capped = PastPolicy::capped(process.truncation);

  std::complex<double> reference;
  if (exact) {
    reference = std::exp(exact_fdd_log_cf(process.ell, params, N, fdd, capped).total);
  } else {
    reference = std::exp(limit_log_cf(params, fdd));
  }
  row.ecf_distance = std::abs(est.value - reference);

  const std::vector<double> last = sample.column(fdd.size() - 1);
  if (exact) {
    FddSpec unit{fdd.times, std::vector<double>(fdd.size(), 0.0)};
    unit.freqs.back() = 1.0;
    const StandardStable law = to_standard(predicted_combination_law(process.ell, params, N, unit, capped));
    row.ks_marginal = ks_distance(last, [&](double x) { return cdf(law, x); });
  }
  const StandardStable limit = to_standard({params.alpha, params.sigma * fdd.times.back(), params.D});
  row.ks_limit = ks_distance(last, [&](double x) { return cdf(limit, x); });
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

bool ConvergenceReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

std::vector<Verdict> evaluate_criteria(std::span<const ReportRow> rows, const CriteriaConfig& criteria) {
  std::vector<Verdict> out;
  add_trend_verdicts(out, column_of(rows, [](const ReportRow& r) { return r.oracle_distance; }), "oracle_distance",
                     criteria.oracle_monotone, criteria.oracle_ratio_max);
  add_trend_verdicts(out, column_of(rows, [](const ReportRow& r) { return r.past_part; }), "past_part",
                     criteria.past_monotone, criteria.past_ratio_max);
  if (criteria.ks_max) {
    const auto ks = column_of(rows, [](const ReportRow& r) { return r.ks_marginal; });
    if (!ks.empty()) {
      const double worst = *std::max_element(ks.begin(), ks.end());
      out.push_back({"ks_marginal", worst < *criteria.ks_max, describe(worst, *criteria.ks_max)});
    }
  }
  if (criteria.ecf_slack) {
    bool ok = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& r : rows) {
      if (!r.ecf_distance || !r.ecf_bound) continue;
      any = true;
      const double excess = *r.ecf_distance - (*r.ecf_bound + *criteria.ecf_slack);
      worst_excess = std::max(worst_excess, excess);
      ok = ok && excess < 0.0;
    }
    if (any) out.push_back({"ecf_within_bound", ok, "worst excess " + format_double(worst_excess)});
  }
  return out;
}

ConvergenceReport build_report(std::span<const SweepRow> oracle, std::span<const McRow> mc,
                               const CriteriaConfig& criteria, nlohmann::json metadata) {
  if (oracle.empty() && mc.empty()) throw std::invalid_argument("build_report: no results");
  std::map<std::int64_t, ReportRow> merged;
  for (const auto& o : oracle) {
    auto [it, fresh] = merged.try_emplace(o.N);
    if (!fresh) throw std::invalid_argument("build_report: duplicate N in oracle results");
    it->second.N = o.N;
    it->second.oracle_distance = o.distance;
    it->second.past_part = o.past_part;
    it->second.wall_ms += o.wall_ms;
  }
  if (!oracle.empty() && !mc.empty()) {
    std::vector<std::int64_t> a, b;
    for (const auto& o : oracle) a.push_back(o.N);
    for (const auto& r : mc) b.push_back(r.N);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw std::invalid_argument("build_report: oracle and Monte Carlo N grids differ");
  }
  std::map<std::int64_t, bool> seen_mc;
  for (const auto& r : mc) {
    if (seen_mc[r.N]) throw std::invalid_argument("build_report: duplicate N in Monte Carlo results");
    seen_mc[r.N] = true;
    ReportRow& row = merged[r.N];
    row.N = r.N;
    row.ecf_distance = r.ecf_distance;
    row.ecf_bound = r.ecf_bound;
    row.ks_marginal = r.ks_marginal;
    row.ks_limit = r.ks_limit;
    row.wall_ms += r.wall_ms;
  }

  ConvergenceReport report;
  report.metadata = std::move(metadata);
  for (auto& [n, row] : merged) report.rows.push_back(row);
  report.verdicts = evaluate_criteria(report.rows, criteria);
  return report;
}

nlohmann::json report_to_json(const ConvergenceReport& report, bool include_timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row{{"N", r.N},
                       {"oracle_distance", optional_json(r.oracle_distance)},
                       {"past_part", optional_json(r.past_part)},
                       {"ecf_distance", optional_json(r.ecf_distance)},
                       {"ecf_bound", optional_json(r.ecf_bound)},
                       {"ks_marginal", optional_json(r.ks_marginal)},
                       {"ks_limit", optional_json(r.ks_limit)}};
    if (include_timing) row["wall_ms"] = r.wall_ms;
    rows.push_back(std::move(row));
  }
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : report.verdicts) verdicts.push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  return {{"metadata", report.metadata}, {"rows", rows}, {"verdicts", verdicts}, {"all_passed", report.all_passed()}};
}

std::string report_to_csv(const ConvergenceReport& report, bool include_timing) {
  std::string out = "N,oracle_distance,past_part,ecf_distance,ecf_bound,ks_marginal,ks_limit,wall_ms\n";
  const auto field = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : report.rows) {
    out += std::to_string(r.N) + ',' + field(r.oracle_distance) + ',' + field(r.past_part) + ',' +
           field(r.ecf_distance) + ',' + field(r.ecf_bound) + ',' + field(r.ks_marginal) + ',' + field(r.ks_limit) +
           ',' + (include_timing ? format_double(r.wall_ms) : std::string()) + '\n';
  }
  return out;
}

}  // namespace lpstable
