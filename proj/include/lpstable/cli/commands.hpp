#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "lpstable/cli/config.hpp"

namespace lpstable::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct Options {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  std::optional<std::uint64_t> seed_override;
};

int cmd_simulate(const RunConfig& cfg, const Options& opt, std::ostream& out);
int cmd_oracle(const RunConfig& cfg, const Options& opt, std::ostream& out);
int cmd_verify(const RunConfig& cfg, const Options& opt, std::ostream& out);
int cmd_halpha(const HAlphaBlock& block, std::ostream& out);

/// Full command line: parses flags, loads the config and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Output bodies, exposed for schema tests.
std::string path_csv(std::span<const double> path);
std::string oracle_csv(std::span<const SweepRow> rows, bool timing);
nlohmann::json oracle_json(const RunConfig& cfg, std::span<const SweepRow> rows, bool timing);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace lpstable::cli
