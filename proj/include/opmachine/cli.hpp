#pragma once

// Batch front-end. Every command reads one JSON config, produces one CSV
// trace and a JSON sidecar; exit codes are 0 (all checks passed),
// 1 (violation found) and 2 (config or build error).

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace opm::cli {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct Output {
  std::string command;
  std::string csv;
  /// Effective config (defaults filled in), version, seed, metadata and a
  /// UTC timestamp, the only field that varies between identical runs.
  nlohmann::ordered_json sidecar;
  int exit_code = kExitOk;
  std::string message;
};

const std::vector<std::string>& command_names();

/// Runs a command in-process. Config errors are reported through
/// exit_code = 2 and `message`, never thrown.
Output execute(const std::string& command, const nlohmann::json& config, std::uint64_t seed);

/// Command-line entry: `<command> [--config FILE] [--seed N] [--out DIR]`.
int run(int argc, char** argv);

}  // namespace opm::cli
