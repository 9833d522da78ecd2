#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbsim/behavior.hpp"
#include "fbsim/corpus.hpp"

namespace fbsim {

/// Mean stance of the clicked positions of one recommendation list; absent
/// when nothing was clicked.
std::optional<double> iteration_mps(std::span<const Stance> stances, std::span<const int> clicks);

/// Stance-weighted sum of all preference cells.
double umps(const PreferenceMatrix& preference);

/// One live iteration, as seen by the metrics layer.
struct IterationRecord {
  int iteration = 0;
  int epoch = 0;
  int user_id = 0;
  Typology group = Typology::bystander;
  std::optional<double> mps;
  int n_clicks = 0;
};

struct EpochGroupRow {
  int run_id = 0;
  int epoch = 0;
  Typology group = Typology::bystander;
  std::optional<double> mean_mps;
  double mean_umps = 0.0;
  int n_clicks = 0;
  int n_interactions = 0;
};

/// Per group: mean of the defined iteration MPS values in `epoch`, and the
/// mean UMPS of all group members in their current state.
std::vector<EpochGroupRow> epoch_group_aggregate(std::span<const IterationRecord> records,
                                                 std::span<const UserProfile> users, int epoch, int run_id);

struct BootstrapReference {
  std::map<Typology, std::optional<double>> mps;
  std::map<Typology, int> clicks;
  std::vector<std::string> warnings;
};

/// Per group, the mean stance of the articles clicked during bootstrap.
BootstrapReference bootstrap_reference(std::span<const InteractionRecord> log, std::span<const UserProfile> users,
                                       std::span<const ArticleUtility> articles);

enum class Metric { mps, umps };

std::string_view metric_name(Metric m);

struct AggregateRow {
  int epoch = 0;
  Typology group = Typology::bystander;
  Metric metric = Metric::mps;
  std::optional<double> mean;
  std::optional<double> std;
};

/// Mean and sample standard deviation across runs for every
/// (epoch, group, metric). Result does not depend on the order of `runs`.
std::vector<AggregateRow> aggregate_runs(std::span<const std::vector<EpochGroupRow>> runs);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochGroupRow>& rows);
std::vector<EpochGroupRow> read_metrics_csv(const std::filesystem::path& path);

void write_bootstrap_reference_csv(const std::filesystem::path& path, int run_id, const BootstrapReference& ref);

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

}  // namespace fbsim
