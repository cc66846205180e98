#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dgles/bench.hpp"
#include "dgles/config.hpp"

namespace dgles {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitMissingInput = 4;

/// Maps an exception to the CLI exit code.
int exit_code_for(const std::exception& err);

inline constexpr const char* kThreadsEnv = "DGLES_THREADS";

struct AppOptions {
  std::optional<int> threads;  // --threads
  bool deterministic = false;  // --deterministic forces the mode on
  std::optional<std::filesystem::path> resume;
};

/// --threads, then DGLES_THREADS, then the config value, then the machine
/// default.
int resolve_threads(const RunConfig& config, const AppOptions& options);

std::filesystem::path mesh_output_path(const RunConfig& config);
std::filesystem::path final_checkpoint_path(const RunConfig& config);
std::filesystem::path checkpoint_path(const RunConfig& config, long step);

std::filesystem::path cmd_mesh(const RunConfig& config, std::ostream& log);

struct RunSummary {
  RunReport report;
  std::filesystem::path final_checkpoint;
};
RunSummary cmd_run(const RunConfig& config, const AppOptions& options, std::ostream& log);

void cmd_post(const RunConfig& config, const AppOptions& options, std::ostream& log);
void cmd_psd(const RunConfig& config, std::ostream& log);

/// Writes bench.csv. Returns false when some formulation had no stable CFL.
bool cmd_bench(const RunConfig& config, const AppOptions& options, std::ostream& log,
               std::vector<RampReport>* reports = nullptr);

/// Loads the config, applies options and runs one subcommand. Errors are
/// reported on `err` and mapped to exit codes.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const AppOptions& options, std::ostream& log, std::ostream& err);

}  // namespace dgles
