#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fbsim {

inline constexpr const char* kVersion = "1.0.0";

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::string preset = "desk";
  bool dry_run = false;
  std::optional<int> threads;
  std::vector<std::filesystem::path> inputs;
};

/// Writes articles.csv, users.csv and manifest.json into `out`.
void cmd_generate(const CommandOptions& opts, std::ostream& log);

/// Runs every repeat, then writes out/runs/run_<i>/..., out/aggregate.csv
/// and out/manifest.json. Nothing is aggregated unless all runs succeed.
void cmd_run(const CommandOptions& opts, std::ostream& log);

/// Aggregates the metrics_epoch.csv of the given run directories (or of
/// every run under a `run` output root) into out/aggregate.csv.
void cmd_aggregate(const CommandOptions& opts, std::ostream& log);

/// Plot-ready tables from one aggregate (fig_mps.csv, fig_umps.csv) or a
/// baseline + calibrated pair (additionally fig_calibration.csv).
void cmd_report(const CommandOptions& opts, std::ostream& log);

}  // namespace fbsim
