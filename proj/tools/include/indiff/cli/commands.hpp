#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "indiff/cli/config.hpp"
#include "indiff/error.hpp"

namespace indiff::cli {

/// 0 success, 2 configuration error, 3 numerical failure.
int exit_code(ErrorCode code) noexcept;

struct CommandOutput {
  std::vector<std::filesystem::path> files;
};

/// Per-path CSV (t, S, lambda, regime, W) plus a manifest.
CommandOutput cmd_simulate(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log);
/// (t, regime, pi_star, lower, upper, residual, merton) along a sampled regime path.
CommandOutput cmd_strategy(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log);
/// phi(t, i) on the ODE grid and value-function slices over wealth.
CommandOutput cmd_value(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log);
/// Price quotes per route with cross-route diagnostics.
CommandOutput cmd_price(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log);
/// One price per sweep value, common random numbers across the sweep.
CommandOutput cmd_sensitivity(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log);

/// Runs `name` and returns the process exit code; errors go to `err`.
int run_command(const std::string& name, const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log,
                std::ostream& err);

}  // namespace indiff::cli
