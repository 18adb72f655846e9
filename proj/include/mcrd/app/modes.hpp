#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mcrd/app/config.hpp"

namespace mcrd::app {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitInvariant = 4 };

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  ///< overrides output_dir of the config
    std::optional<std::uint64_t> seed;             ///< overrides seed of the config
    bool plots = true;
};

/// Runs one mode and writes its artifacts. Returns kExitOk, or
/// kExitInvariant when verify finds a failing check. Configuration and
/// solver failures propagate as ConfigError / SolverError.
int run_mode(const std::string& mode, RunConfig cfg, const RunOptions& options);

/// Machine-readable error record {"status", "kind", "message"}.
json error_record(int code, const std::string& kind, const std::string& message);

}  // namespace mcrd::app
