#include "lpstable/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "lpstable/errors.hpp"

namespace lpstable::cli {

namespace {

std::uint64_t require_seed(const RunConfig& cfg, const Options& opt) {
  if (opt.seed_override) return *opt.seed_override;
  if (cfg.sweep.seed) return *cfg.sweep.seed;
  throw ConfigError("no seed: set sweep.seed in the config or pass --seed-override");
}

ProcessSpec resolved_process(const RunConfig& cfg) {
  ProcessSpec p = cfg.process;
  if (cfg.auto_truncation) p.truncation = default_truncation(p.ell, p.innovation);
  return p;
}

std::vector<std::int64_t> require_sweep(const RunConfig& cfg) {
  if (cfg.sweep.N.empty()) throw ConfigError("sweep.N is required for this command");
  return cfg.sweep.N;
}

SkewedStableParams require_exact(const RunConfig& cfg, const char* command) {
  if (!cfg.process.innovation.is_exact_stable() || cfg.process.hook != InnovationHook::None) {
    throw ConfigError(std::string(command) + " needs exact_stable innovations without a hook");
  }
  return from_standard(std::get<StandardStable>(cfg.process.innovation.family));
}

PastPolicy resolved_policy(const RunConfig& cfg, const ProcessSpec& process) {
  PastPolicy policy = cfg.sweep.past;
  if (policy.mode == PastPolicy::Mode::Capped && policy.cap < 1) policy.cap = process.truncation;
  return policy;
}

nlohmann::json process_json(const ProcessSpec& p) {
  nlohmann::json ell{{"family", sv_family(p.ell)}, {"c", p.ell.c}, {"p", p.ell.p}};
  nlohmann::json inn;
  if (const auto* s = std::get_if<StandardStable>(&p.innovation.family)) {
    inn = {{"family", "exact_stable"}, {"alpha", s->alpha}, {"beta", s->beta}, {"scale", s->scale}};
  } else {
    const auto& t = std::get<ParetoTailSpec>(p.innovation.family);
    inn = {{"family", "pareto_tail"}, {"alpha", t.alpha}, {"sigma1", t.sigma1}, {"sigma2", t.sigma2},
           {"h", {{"family", sv_family(t.h)}, {"c", t.h.c}, {"p", t.h.p}}}};
  }
  static const char* kHooks[] = {"none", "zero", "one", "impulse"};
  return {{"ell", ell}, {"innovation", inn}, {"truncation", p.truncation},
          {"hook", kHooks[static_cast<int>(p.hook)]}};
}

nlohmann::json policy_json(const PastPolicy& p) {
  static const char* kModes[] = {"analytic", "truncate", "capped"};
  nlohmann::json j{{"mode", kModes[static_cast<int>(p.mode)]}, {"tolerance", p.tolerance}};
  if (p.mode == PastPolicy::Mode::Capped) {
    j["cap"] = p.cap;
  } else {
    j["ratio"] = p.ratio;
    j["min_depth"] = p.min_depth;
  }
  return j;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string path_csv(std::span<const double> path) {
  std::string out = "n,x\n";
  for (std::size_t n = 0; n < path.size(); ++n) out += std::to_string(n + 1) + ',' + format_double(path[n]) + '\n';
  return out;
}

std::string oracle_csv(std::span<const SweepRow> rows, bool timing) {
  std::string out = "N,distance,past_part,wall_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.N) + ',' + format_double(r.distance) + ',' + format_double(r.past_part) + ',' +
           (timing ? format_double(r.wall_ms) : std::string()) + '\n';
  }
  return out;
}

nlohmann::json oracle_json(const RunConfig& cfg, std::span<const SweepRow> rows, bool timing) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"N", r.N},
                       {"distance", r.distance},
                       {"past_part", r.past_part},
                       {"max_coefficient", r.max_coefficient},
                       {"tail_error", r.tail_error}};
    if (timing) row["wall_ms"] = r.wall_ms;
    table.push_back(std::move(row));
  }
  const ProcessSpec process = resolved_process(cfg);
  return {{"config", cfg.source},
          {"process", process_json(process)},
          {"fdd", {{"times", cfg.fdd.times}, {"freqs", cfg.fdd.freqs}}},
          {"past_policy", policy_json(resolved_policy(cfg, process))},
          {"frequency_grid", cfg.sweep.frequency_grid},
          {"rows", table}};
}

int cmd_simulate(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg, opt);
  const ProcessSpec process = resolved_process(cfg);
  const std::vector<double> path = simulate_path(process, cfg.simulate.N, cfg.simulate.T, seed);
  const auto file = opt.out_dir / cfg.output.simulate_csv;
  write_atomic(file, path_csv(path));
  out << "simulate: wrote " << path.size() << " values to " << file.string() << "\n";
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const SkewedStableParams params = require_exact(cfg, "oracle");
  const auto Ns = require_sweep(cfg);
  const ProcessSpec process = resolved_process(cfg);
  const auto rows = cf_convergence_sweep(cfg.process.ell, params, cfg.fdd, Ns, resolved_policy(cfg, process),
                                         cfg.sweep.frequency_grid, opt.threads);
  write_atomic(opt.out_dir / cfg.output.oracle_csv, oracle_csv(rows, cfg.output.timing));
  write_atomic(opt.out_dir / cfg.output.oracle_json, dump(oracle_json(cfg, rows, cfg.output.timing)));
  out << "oracle: " << rows.size() << " rows, distance " << format_double(rows.front().distance) << " -> "
      << format_double(rows.back().distance) << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg, opt);
  const auto Ns = require_sweep(cfg);
  const ProcessSpec process = resolved_process(cfg);
  const bool exact = process.innovation.is_exact_stable() && process.hook == InnovationHook::None;

  std::vector<SweepRow> oracle;
  if (exact) {
    const SkewedStableParams params = from_standard(std::get<StandardStable>(process.innovation.family));
    oracle = cf_convergence_sweep(process.ell, params, cfg.fdd, Ns, resolved_policy(cfg, process),
                                  cfg.sweep.frequency_grid, opt.threads);
  }
  std::vector<McRow> mc;
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    const std::uint64_t s = derive_seed(seed, k);
    seeds.push_back(s);
    mc.push_back(monte_carlo_check(process, Ns[k], cfg.fdd, cfg.sweep.reps, s, opt.threads));
  }

  nlohmann::json meta{{"config", cfg.source},
                      {"process", process_json(process)},
                      {"fdd", {{"times", cfg.fdd.times}, {"freqs", cfg.fdd.freqs}}},
                      {"master_seed", seed},
                      {"row_seeds", seeds},
                      {"reps", cfg.sweep.reps},
                      {"past_policy", policy_json(resolved_policy(cfg, process))}};
  const ConvergenceReport report = build_report(oracle, mc, cfg.criteria, meta);
  write_atomic(opt.out_dir / cfg.output.report_json, dump(report_to_json(report, cfg.output.timing)));
  write_atomic(opt.out_dir / cfg.output.report_csv, report_to_csv(report, cfg.output.timing));

  std::size_t passed = 0;
  std::string detail;
  for (const auto& v : report.verdicts) {
    passed += v.passed ? 1 : 0;
    detail += ' ' + v.name + '=' + (v.passed ? "pass" : "FAIL");
  }
  out << "verify: " << (report.all_passed() ? "PASS" : "FAIL") << ' ' << passed << '/' << report.verdicts.size()
      << detail << "\n";
  return report.all_passed() ? kExitOk : kExitFailure;
}

int cmd_halpha(const HAlphaBlock& block, std::ostream& out) {
  const HAlphaResult r = solve_h_alpha(block.h, block.alpha, block.N);
  out << "alpha=" << format_double(block.alpha) << "\n"
      << "family=" << sv_family(block.h) << "\n"
      << "c=" << format_double(block.h.c) << "\n"
      << "p=" << format_double(block.h.p) << "\n"
      << "N=" << format_double(block.N) << "\n"
      << "h_alpha=" << format_double(r.value) << "\n"
      << "residual=" << format_double(r.residual) << "\n"
      << "iterations=" << r.iterations << "\n"
      << "bisection=" << (r.used_bisection ? "true" : "false") << "\n";
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear processes with stable-domain innovations: simulation and fdd convergence checks", "lpstable"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed_override;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed-override", seed_override, "Replace the configured master seed");

  auto* simulate = app.add_subcommand("simulate", "Simulate one path X_1..X_[NT] to CSV");
  auto* oracle = app.add_subcommand("oracle", "Exact characteristic-function convergence sweep");
  app.add_subcommand("verify", "Monte Carlo verification and report");
  auto* halpha = app.add_subcommand("halpha", "Solve the fixed point H_alpha(N)");
  halpha->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  std::optional<double> h_alpha_arg, h_N, h_c, h_p;
  std::optional<std::string> h_family;
  halpha->add_option("--alpha", h_alpha_arg, "Stability index in (1, 2]");
  halpha->add_option("--h", h_family, "constant | log_power | bare_log_power");
  halpha->add_option("--h-c", h_c, "Multiplier c");
  halpha->add_option("--h-p", h_p, "Log exponent p");
  halpha->add_option("--N", h_N, "Argument N >= 1 (real)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  Options opt{out_dir, threads, seed_override};
  try {
    if (halpha->parsed()) {
      HAlphaBlock block;
      if (!config_path.empty()) block = load_config(config_path).halpha.value_or(HAlphaBlock{});
      else if (!h_alpha_arg && !h_N && !h_family) throw ConfigError("halpha needs --config or --alpha/--h/--N");
      if (h_alpha_arg) block.alpha = *h_alpha_arg;
      if (h_N) block.N = *h_N;
      if (h_family || h_c || h_p) {
        try {
          block.h = make_sv(h_family.value_or(sv_family(block.h)), h_c.value_or(block.h.c), h_p.value_or(block.h.p));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
      if (!(block.alpha > 1.0 && block.alpha <= 2.0)) throw ConfigError("alpha must lie in (1, 2]");
      if (!(block.N >= 1.0) || !std::isfinite(block.N)) throw ConfigError("N must be a finite number >= 1");
      return cmd_halpha(block, out);
    }
    if (config_path.empty()) throw ConfigError("--config is required");
    const RunConfig cfg = load_config(config_path);
    if (simulate->parsed()) return cmd_simulate(cfg, opt, out);
    if (oracle->parsed()) return cmd_oracle(cfg, opt, out);
    return cmd_verify(cfg, opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace lpstable::cli
