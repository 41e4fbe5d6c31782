#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpstable/cf_oracle.hpp"
#include "lpstable/linear_process.hpp"
#include "lpstable/verification.hpp"

namespace lpstable::cli {

// Malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateBlock {
  std::int64_t N = 1000;
  double T = 1.0;
};

struct SweepBlock {
  std::vector<std::int64_t> N;
  std::size_t reps = 10000;
  std::optional<std::uint64_t> seed;
  PastPolicy past = PastPolicy::analytic();
  bool frequency_grid = false;
};

struct OutputBlock {
  std::string simulate_csv = "path.csv";
  std::string oracle_csv = "oracle.csv";
  std::string oracle_json = "oracle.json";
  std::string report_json = "report.json";
  std::string report_csv = "report.csv";
  bool timing = true;
};

struct HAlphaBlock {
  double alpha = 1.5;
  SlowlyVaryingSpec h = SlowlyVaryingSpec::constant(1.0);
  double N = 100.0;
};

struct RunConfig {
  ProcessSpec process;
  bool auto_truncation = false;
  FddSpec fdd{{1.0}, {1.0}};
  SimulateBlock simulate;
  SweepBlock sweep;
  CriteriaConfig criteria;
  OutputBlock output;
  std::optional<HAlphaBlock> halpha;
  nlohmann::json source;  // every key as read, for embedding in outputs
};

/// INI text with sections [process] [fdd] [simulate] [sweep] [tolerance]
/// [criteria] [output] [halpha]. Unknown sections or keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// "constant" | "log_power" | "bare_log_power".
SlowlyVaryingSpec make_sv(const std::string& family, double c, double p);
std::string sv_family(const SlowlyVaryingSpec& spec);

}  // namespace lpstable::cli
