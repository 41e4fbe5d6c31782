#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "lpstable/cli/commands.hpp"
#include "lpstable/cli/config.hpp"

using namespace lpstable;
using namespace lpstable::cli;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("lpstable_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& body) const {
    std::ofstream(dir / name, std::ios::binary) << body;
    return dir / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string golden(const std::string& name) { return slurp(fs::path(LPSTABLE_GOLDEN_DIR) / name); }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lpstable");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kOracleCfg = R"(
[process]
alpha = 1.5
[fdd]
times = 0.5, 1
freqs = 0, 0
[sweep]
N = 10, 100
[output]
timing = false
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
[process]
ell = log_power
ell_c = 2
ell_p = -1
innovation = pareto_tail
alpha = 1.7
sigma1 = 0.2
sigma2 = 0.8
h = bare_log_power
h_p = 1
truncation = auto
[fdd]
times = 0.25 0.5, 1
freqs = 1, 2, 3
[sweep]
N = 1e2, 1000
seed = 0x10
past_policy = capped
past_cap = 500
[tolerance]
oracle = 1e-9
[criteria]
oracle_ratio_max = 0.5
ks_max = 0.02
)");
  CHECK(cfg.process.ell.kind == SlowlyVaryingSpec::Kind::LogPower);
  CHECK(cfg.process.ell.c == 2.0);
  const auto& pt = std::get<ParetoTailSpec>(cfg.process.innovation.family);
  CHECK(pt.sigma2 == 0.8);
  CHECK(pt.h.shift == 0.0);
  CHECK(cfg.auto_truncation);
  CHECK(cfg.fdd.times == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(cfg.sweep.N == std::vector<std::int64_t>{100, 1000});
  CHECK(cfg.sweep.seed == 16u);
  CHECK(cfg.sweep.past.mode == PastPolicy::Mode::Capped);
  CHECK(cfg.sweep.past.cap == 500);
  CHECK(cfg.sweep.past.tolerance == 1e-9);
  CHECK(cfg.criteria.oracle_ratio_max == 0.5);
  CHECK(cfg.source["process"]["alpha"] == "1.7");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[process]\nalpha = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[process]\nalpah = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[process\nalpha = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[fdd]\ntimes = 1, 0.5\nfreqs = 1, 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nN = 100, 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nN = 10.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nseed = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[process]\ninnovation = exact_stable\nsigma1 = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[process]\nell = log_power\nell_c = -1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/lpstable.ini"), ConfigError);
}

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(invoke({}).code == kExitConfig);
  CHECK(invoke({"frobnicate"}).code == kExitConfig);
  CHECK(invoke({"--help"}).code == kExitOk);
  CHECK(invoke({"simulate"}).code == kExitConfig);
  const auto bad = s.write("bad.ini", "[process\n");
  const auto r = invoke({"verify", "--config", bad.string(), "--out-dir", s.dir.string()});
  CHECK(r.code == kExitConfig);
  CHECK_FALSE(r.err.empty());
  const auto noseed = s.write("noseed.ini", "[simulate]\nN = 10\n");
  CHECK(invoke({"simulate", "--config", noseed.string(), "--out-dir", s.dir.string()}).code == kExitConfig);
  CHECK(invoke({"simulate", "--config", noseed.string(), "--out-dir", s.dir.string(), "--seed-override", "5"}).code ==
        kExitOk);
  const auto pareto = s.write("pareto.ini", "[process]\ninnovation = pareto_tail\n[sweep]\nN = 10\n");
  CHECK(invoke({"oracle", "--config", pareto.string(), "--out-dir", s.dir.string()}).code == kExitConfig);
  // runtime failure: simulation exceeds the element budget
  const auto huge = s.write("huge.ini", "[process]\ntruncation = 1e15\n[sweep]\nseed = 1\n");
  CHECK(invoke({"simulate", "--config", huge.string(), "--out-dir", s.dir.string()}).code == kExitFailure);
}

TEST_CASE("halpha subcommand") {
  auto r = invoke({"halpha", "--alpha", "1.5", "--h", "constant", "--N", "1000"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("h_alpha=1\n") != std::string::npos);
  CHECK(r.out.find("residual=0\n") != std::string::npos);
  r = invoke({"halpha", "--alpha", "1.5", "--h", "bare_log_power", "--h-p", "1", "--N", "4.4816890703380645"});
  CHECK(r.code == kExitOk);
  const auto pos = r.out.find("h_alpha=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 8)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(invoke({"halpha", "--alpha", "0.5", "--N", "100"}).code == kExitConfig);
  CHECK(invoke({"halpha", "--alpha", "1.5", "--h", "cubic", "--N", "100"}).code == kExitConfig);
  CHECK(invoke({"halpha"}).code == kExitConfig);
}

TEST_CASE("simulate writes the impulse response") {
  Scratch s;
  const auto cfg = s.write("sim.ini", "[process]\ntruncation = 8\nhook = impulse\n[simulate]\nN = 10\n[sweep]\nseed = 3\n");
  CHECK(invoke({"simulate", "--config", cfg.string(), "--out-dir", s.dir.string()}).code == kExitOk);
  CHECK(slurp(s.dir / "path.csv") == golden("impulse_path.csv"));
  CHECK_FALSE(fs::exists(s.dir / "path.csv.tmp"));

  const auto zero = s.write("zero.ini", "[process]\nhook = zero\n[simulate]\nN = 5\n[sweep]\nseed = 3\n");
  CHECK(invoke({"simulate", "--config", zero.string(), "--out-dir", s.dir.string()}).code == kExitOk);
  CHECK(slurp(s.dir / "path.csv") == "n,x\n1,0\n2,0\n3,0\n4,0\n5,0\n");

  const auto rnd = s.write("rnd.ini", "[process]\ntruncation = 100\n[simulate]\nN = 50\n[sweep]\nseed = 3\n");
  CHECK(invoke({"simulate", "--config", rnd.string(), "--out-dir", (s.dir / "a").string()}).code == kExitOk);
  CHECK(invoke({"simulate", "--config", rnd.string(), "--out-dir", (s.dir / "b").string()}).code == kExitOk);
  CHECK(slurp(s.dir / "a" / "path.csv") == slurp(s.dir / "b" / "path.csv"));
}

TEST_CASE("oracle outputs") {
  Scratch s;
  const auto cfg = s.write("o.ini", kOracleCfg);
  const auto r = invoke({"oracle", "--config", cfg.string(), "--out-dir", s.dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(slurp(s.dir / "oracle.csv") == "N,distance,past_part,wall_ms\n10,0,0,\n100,0,0,\n");
  const auto j = nlohmann::json::parse(slurp(s.dir / "oracle.json"));
  CHECK(j["config"]["sweep"]["N"] == "10, 100");
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0].contains("distance"));
  CHECK_FALSE(j["rows"][0].contains("wall_ms"));
  CHECK(j["past_policy"]["mode"] == "analytic");
}

TEST_CASE("oracle output schema matches golden") {
  std::vector<SweepRow> rows{{100, 0.25, 0.125, 0.5, 0.0, 12.5}};
  CHECK(oracle_csv(rows, true) == golden("oracle.csv"));
  RunConfig cfg = parse_config(kOracleCfg);
  CHECK(oracle_json(cfg, rows, false).dump(2) + "\n" == golden("oracle.json"));
}

TEST_CASE("verify: thresholds of 1.0 pass, and the run is reproducible") {
  Scratch s;
  const auto cfg = s.write("v.ini", R"(
[process]
truncation = 500
[fdd]
times = 0.5, 1
freqs = 1, 1
[sweep]
N = 50, 100
reps = 500
seed = 9
[criteria]
oracle_monotone = false
ks_max = 1.0
ecf_slack = 1.0
[output]
timing = false
)");
  const auto r = invoke({"verify", "--config", cfg.string(), "--out-dir", (s.dir / "a").string(), "--threads", "2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.rfind("verify: PASS", 0) == 0);
  CHECK(invoke({"verify", "--config", cfg.string(), "--out-dir", (s.dir / "b").string()}).code == kExitOk);
  CHECK(slurp(s.dir / "a" / "report.json") == slurp(s.dir / "b" / "report.json"));
  CHECK(slurp(s.dir / "a" / "report.csv") == slurp(s.dir / "b" / "report.csv"));
  const auto j = nlohmann::json::parse(slurp(s.dir / "a" / "report.json"));
  CHECK(j["metadata"]["master_seed"] == 9);
  CHECK(j["all_passed"] == true);

  const auto strict = s.write("strict.ini", R"(
[process]
truncation = 500
[sweep]
N = 50
reps = 200
seed = 9
[criteria]
ks_max = 1e-9
)");
  const auto f = invoke({"verify", "--config", strict.string(), "--out-dir", s.dir.string()});
  CHECK(f.code == kExitFailure);
  CHECK(f.out.rfind("verify: FAIL", 0) == 0);
}
