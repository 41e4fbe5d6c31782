#include "lpstable/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lpstable::cli {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + raw + "'");
  }
  return v;
}

// Integers may be written as 1e6.
std::int64_t to_int(const std::string& key, const std::string& raw) {
  const double v = to_double(key, raw);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key + ": expected an integer, got '" + raw + "'");
  return static_cast<std::int64_t>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s = s.substr(2);
    base = 16;
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + raw + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + raw + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : raw) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// One INI section; remembers which keys were consumed so leftovers can be reported.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  std::optional<double> number(const std::string& key) {
    auto r = raw(key);
    if (!r) return std::nullopt;
    return to_double(qualified(key), *r);
  }
  std::optional<std::int64_t> integer(const std::string& key) {
    auto r = raw(key);
    if (!r) return std::nullopt;
    return to_int(qualified(key), *r);
  }
  std::optional<bool> flag(const std::string& key) {
    auto r = raw(key);
    if (!r) return std::nullopt;
    return to_bool(qualified(key), *r);
  }
  std::optional<std::vector<double>> numbers(const std::string& key) {
    auto r = raw(key);
    if (!r) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split_list(*r)) out.push_back(to_double(qualified(key), item));
    if (out.empty()) throw ConfigError(qualified(key) + ": empty list");
    return out;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
    }
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

InnovationHook parse_hook(const std::string& key, const std::string& s) {
  if (s == "none") return InnovationHook::None;
  if (s == "zero") return InnovationHook::Zero;
  if (s == "one") return InnovationHook::One;
  if (s == "impulse") return InnovationHook::Impulse;
  throw ConfigError(key + ": expected none, zero, one or impulse, got '" + s + "'");
}

SlowlyVaryingSpec read_sv(Section& sec, const std::string& stem, bool required_family) {
  const auto family = sec.raw(stem);
  if (!family && required_family) throw ConfigError("missing key '" + sec.qualified(stem) + "'");
  const double c = sec.number(stem + "_c").value_or(1.0);
  const double p = sec.number(stem + "_p").value_or(0.0);
  try {
    return make_sv(family.value_or("constant"), c, p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(sec.qualified(stem) + ": " + e.what());
  }
}

template <class F>
void guarded(const std::string& what, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

SlowlyVaryingSpec make_sv(const std::string& family, double c, double p) {
  SlowlyVaryingSpec spec;
  if (family == "constant") {
    spec = SlowlyVaryingSpec::constant(c);
  } else if (family == "log_power") {
    spec = SlowlyVaryingSpec::log_power(c, p);
  } else if (family == "bare_log_power") {
    spec = SlowlyVaryingSpec::bare_log_power(c, p);
  } else {
    throw std::invalid_argument("unknown slowly varying family '" + family + "'");
  }
  spec.validate();
  return spec;
}

std::string sv_family(const SlowlyVaryingSpec& spec) {
  if (spec.kind == SlowlyVaryingSpec::Kind::Constant) return "constant";
  return spec.shift == 0.0 ? "bare_log_power" : "log_power";
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  static const std::set<std::string> kSections{"process",  "fdd",    "simulate", "sweep",
                                               "tolerance", "criteria", "output",  "halpha"};
  RunConfig cfg;
  for (const auto& [name, child] : tree) {
    if (!kSections.count(name)) throw ConfigError("unknown section or top-level key '" + name + "'");
    if (!child.data().empty()) throw ConfigError("'" + name + "' must be a section");
    for (const auto& [key, leaf] : child) cfg.source[name][key] = leaf.data();
  }
  if (cfg.source.is_null()) cfg.source = nlohmann::json::object();

  const auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  // [process]
  Section proc = section("process");
  cfg.process.ell = read_sv(proc, "ell", false);
  const std::string innovation = proc.raw("innovation").value_or("exact_stable");
  const double alpha = proc.number("alpha").value_or(1.5);
  if (innovation == "exact_stable") {
    cfg.process.innovation =
        InnovationSpec::exact_stable(alpha, proc.number("beta").value_or(0.0), proc.number("scale").value_or(1.0));
  } else if (innovation == "pareto_tail") {
    cfg.process.innovation = InnovationSpec::pareto_tail(alpha, proc.number("sigma1").value_or(0.5),
                                                         proc.number("sigma2").value_or(0.5), read_sv(proc, "h", false));
  } else {
    throw ConfigError("process.innovation: expected exact_stable or pareto_tail, got '" + innovation + "'");
  }
  if (innovation == "exact_stable") {
    for (const char* k : {"sigma1", "sigma2", "h", "h_c", "h_p"}) {
      if (proc.raw(k)) throw ConfigError(std::string("process.") + k + " only applies to pareto_tail innovations");
    }
  } else {
    for (const char* k : {"beta", "scale"}) {
      if (proc.raw(k)) throw ConfigError(std::string("process.") + k + " only applies to exact_stable innovations");
    }
  }
  guarded("process", [&] { cfg.process.innovation.validate(); });
  if (auto hook = proc.raw("hook")) cfg.process.hook = parse_hook("process.hook", *hook);
  if (auto trunc = proc.raw("truncation")) {
    if (*trunc == "auto") {
      cfg.auto_truncation = true;
    } else {
      cfg.process.truncation = to_int("process.truncation", *trunc);
      if (cfg.process.truncation < 1) throw ConfigError("process.truncation must be >= 1");
    }
  }
  proc.reject_unknown();

  // [fdd]
  Section fdd = section("fdd");
  if (auto times = fdd.numbers("times")) cfg.fdd.times = *times;
  if (auto freqs = fdd.numbers("freqs")) {
    cfg.fdd.freqs = *freqs;
  } else {
    cfg.fdd.freqs.assign(cfg.fdd.times.size(), 0.0);
    cfg.fdd.freqs.back() = 1.0;
  }
  guarded("fdd", [&] { cfg.fdd.validate(); });
  fdd.reject_unknown();

  // [simulate]
  Section sim = section("simulate");
  if (auto n = sim.integer("N")) cfg.simulate.N = *n;
  if (auto t = sim.number("T")) cfg.simulate.T = *t;
  if (cfg.simulate.N < 1) throw ConfigError("simulate.N must be >= 1");
  if (!(cfg.simulate.T > 0.0)) throw ConfigError("simulate.T must be > 0");
  sim.reject_unknown();

  // [sweep]
  Section sweep = section("sweep");
  if (auto ns = sweep.numbers("N")) {
    for (double n : *ns) {
      if (n != std::floor(n) || n < 1.0 || n > 9.0e15) throw ConfigError("sweep.N: entries must be positive integers");
      cfg.sweep.N.push_back(static_cast<std::int64_t>(n));
    }
    for (std::size_t k = 1; k < cfg.sweep.N.size(); ++k) {
      if (cfg.sweep.N[k] <= cfg.sweep.N[k - 1]) throw ConfigError("sweep.N must be strictly increasing");
    }
  }
  if (auto reps = sweep.integer("reps")) {
    if (*reps < 2) throw ConfigError("sweep.reps must be >= 2");
    cfg.sweep.reps = static_cast<std::size_t>(*reps);
  }
  if (auto seed = sweep.raw("seed")) cfg.sweep.seed = to_u64("sweep.seed", *seed);
  const std::string policy = sweep.raw("past_policy").value_or("analytic");
  if (policy == "analytic") {
    cfg.sweep.past = PastPolicy::analytic();
  } else if (policy == "truncate") {
    cfg.sweep.past = PastPolicy::truncate(16.0);
  } else if (policy == "capped") {
    cfg.sweep.past = PastPolicy::capped(cfg.process.truncation);
  } else {
    throw ConfigError("sweep.past_policy: expected analytic, truncate or capped, got '" + policy + "'");
  }
  if (auto ratio = sweep.number("past_ratio")) {
    if (!(*ratio > 0.0)) throw ConfigError("sweep.past_ratio must be > 0");
    cfg.sweep.past.ratio = *ratio;
  }
  if (auto depth = sweep.integer("past_min_depth")) {
    if (*depth < 1) throw ConfigError("sweep.past_min_depth must be >= 1");
    cfg.sweep.past.min_depth = *depth;
  }
  if (auto cap = sweep.integer("past_cap")) {
    if (*cap < 1) throw ConfigError("sweep.past_cap must be >= 1");
    cfg.sweep.past.cap = *cap;
  }
  if (auto grid = sweep.flag("frequency_grid")) cfg.sweep.frequency_grid = *grid;
  sweep.reject_unknown();

  // [tolerance]
  Section tol = section("tolerance");
  if (auto t = tol.number("oracle")) {
    if (!(*t > 0.0)) throw ConfigError("tolerance.oracle must be > 0");
    cfg.sweep.past.tolerance = *t;
  }
  tol.reject_unknown();

  // [criteria]
  Section crit = section("criteria");
  if (auto b = crit.flag("oracle_monotone")) cfg.criteria.oracle_monotone = *b;
  if (auto r = crit.number("oracle_ratio_max")) cfg.criteria.oracle_ratio_max = *r;
  if (auto b = crit.flag("past_monotone")) cfg.criteria.past_monotone = *b;
  if (auto r = crit.number("past_ratio_max")) cfg.criteria.past_ratio_max = *r;
  if (auto r = crit.number("ks_max")) cfg.criteria.ks_max = *r;
  if (auto r = crit.number("ecf_slack")) cfg.criteria.ecf_slack = *r;
  crit.reject_unknown();

  // [output]
  Section out = section("output");
  for (auto [key, target] : {std::pair{"simulate_csv", &cfg.output.simulate_csv}, {"oracle_csv", &cfg.output.oracle_csv},
                             {"oracle_json", &cfg.output.oracle_json}, {"report_json", &cfg.output.report_json},
                             {"report_csv", &cfg.output.report_csv}}) {
    if (auto v = out.raw(key)) {
      if (v->empty()) throw ConfigError(std::string("output.") + key + " must not be empty");
      *target = *v;
    }
  }
  if (auto b = out.flag("timing")) cfg.output.timing = *b;
  out.reject_unknown();

  // [halpha]
  Section ha = section("halpha");
  if (ha.present()) {
    HAlphaBlock block;
    block.alpha = ha.number("alpha").value_or(1.5);
    block.h = read_sv(ha, "h", false);
    block.N = ha.number("N").value_or(100.0);
    cfg.halpha = block;
  }
  ha.reject_unknown();

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace lpstable::cli
