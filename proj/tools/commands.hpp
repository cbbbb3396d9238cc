#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "pnpkit/core.hpp"

namespace pnpkit::cli {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool assert_mode = false;
};

int cmd_solve(const CommandOptions& opts);
int cmd_compare(const CommandOptions& opts);
int cmd_sweep(const CommandOptions& opts);
int cmd_diagnose(const CommandOptions& opts);
int cmd_sample(const CommandOptions& opts);
int cmd_plot(const CommandOptions& opts);

/// Parses argv, dispatches and maps errors to exit codes
/// (0 ok, 2 usage/config, 3 assertion, 4 divergence).
int run_cli(int argc, char** argv);

/// Least-squares slope of log(step_residual) against log(k) over k in
/// [K/10, K], K the last iteration. NaN when fewer than two usable rows.
double residual_slope(const Trace& trace);

inline constexpr double kSlopeThreshold = -0.35;

struct CompareRow {
  std::string solver;
  std::string image;
  double final_psnr = std::numeric_limits<double>::quiet_NaN();
  double min_residual = std::numeric_limits<double>::quiet_NaN();
  double residual_slope = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool diverged = false;
  std::string stop_reason;
  Trace trace;
};

/// converged = not diverged and (stopped at tolerance or slope ≤ kSlopeThreshold).
CompareRow summarize_run(const std::string& solver, const std::string& image, const Trace& trace,
                         const std::string& stop_reason, bool diverged);

/// Runs every (solver, image) pair of a compare config, in parallel up to
/// PNPKIT_THREADS workers. Rows come back in config order.
std::vector<CompareRow> run_compare(const Json& config, const Context& ctx);

struct SweepRow {
  double delta = 0.0;
  double lambda = 0.0;
  double error = 0.0;
};

std::vector<SweepRow> run_sweep(const Json& config, const Context& ctx);
/// True when the error column is strictly decreasing.
bool sweep_strictly_decreasing(const std::vector<SweepRow>& rows);

Json run_diagnose(const Json& config, const Context& ctx);

/// Worker count: PNPKIT_THREADS if set and positive, else hardware threads.
int worker_count();

}  // namespace pnpkit::cli
