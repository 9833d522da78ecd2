#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fbsim/behavior.hpp"
#include "fbsim/corpus.hpp"
#include "fbsim/intervention.hpp"
#include "fbsim/metrics.hpp"
#include "fbsim/recommender.hpp"

namespace fbsim {

struct ExperimentConfig {
  CorpusSpec corpus;
  std::uint64_t corpus_seed = 1;
  std::optional<std::filesystem::path> articles_file;

  int per_group_users = 10;
  std::uint64_t users_seed = 2;
  TemplateMap templates = default_templates();
  std::optional<std::filesystem::path> users_file;

  int iterations = 4000;
  int retrain_every = 100;
  int rec_k = 5;
  int bootstrap_per_topic = 10;
  DriftConfig drift;
  ClickModelParams click;
  MFHyper mf;
  CalibrationParams calibration;
  int repeats = 10;
  std::uint64_t base_seed = 0;
  int threads = 1;

  int n_users() const { return per_group_users * static_cast<int>(kTypologies.size()); }
  int epochs() const { return retrain_every > 0 ? iterations / retrain_every : 0; }

  /// Checks every invariant, including the candidate-exhaustion pre-check.
  void validate() const;
};

/// Article catalog and initial user population shared by every run.
struct Population {
  std::shared_ptr<const std::vector<ArticleUtility>> articles;
  std::vector<UserProfile> users;
};

/// Generates (or loads, when the config names files) the catalog and users.
Population make_population(const ExperimentConfig& config);

struct UmpsLawStats {
  long long checks = 0;
  long long violations = 0;
  double max_error = 0.0;
};

struct RunState {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::shared_ptr<const std::vector<ArticleUtility>> articles;
  std::vector<UserProfile> users;
  InteractionLog log;
  MFModel model;
  std::vector<StanceDistribution> targets;  // indexed by user id
  BootstrapReference bootstrap;
  std::vector<IterationRecord> iterations;
  std::vector<EpochGroupRow> metrics;
  int iteration = 0;
  bool bootstrapped = false;
  int retrain_count = 0;
  // training_rows[e] = log rows behind the model used during epoch e + 1
  std::vector<std::size_t> training_rows;
  UmpsLawStats umps_law;
  std::function<void(int epoch, const MFModel&)> on_model;
};

RunState make_state(const Population& population, int run_id, std::uint64_t seed);

/// Random per-topic exposures for every user, first model, frozen
/// calibration targets, and the epoch-0 metrics rows.
void bootstrap(RunState& state, const ExperimentConfig& config, Rng& rng);

/// One visit: pick a user, recommend, simulate clicks and drift. Retrains
/// and records epoch metrics when the iteration closes an epoch.
void run_iteration(RunState& state, const ExperimentConfig& config, Rng& rng);

/// Any failure inside a run, tagged with where it happened.
class RunError : public std::runtime_error {
 public:
  RunError(std::uint64_t seed, int iteration, const std::string& what)
      : std::runtime_error("run seed " + std::to_string(seed) + ", iteration " + std::to_string(iteration) + ": " +
                           what),
        seed_(seed),
        iteration_(iteration) {}

  std::uint64_t seed() const { return seed_; }
  int iteration() const { return iteration_; }

 private:
  std::uint64_t seed_;
  int iteration_;
};

struct RunResult {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<EpochGroupRow> metrics;
  BootstrapReference bootstrap;
  InteractionLog log;
  std::vector<UserProfile> users_initial;
  std::vector<UserProfile> users_final;
  int retrain_count = 0;
  std::vector<std::size_t> training_rows;
  UmpsLawStats umps_law;
};

RunResult run_experiment(const ExperimentConfig& config, const Population& population, std::uint64_t seed,
                         int run_id = 0, std::function<void(int, const MFModel&)> on_model = {});

struct RepeatResult {
  std::vector<RunResult> runs;  // ordered by seed
  std::vector<AggregateRow> aggregate;
};

/// Called with (run_id, epoch, model) after every (re)training. May be
/// invoked concurrently for different runs.
using ModelSink = std::function<void(int run_id, int epoch, const MFModel&)>;

/// Runs seeds base_seed .. base_seed + repeats - 1 on `config.threads`
/// workers and aggregates them.
RepeatResult run_repeats(const ExperimentConfig& config, const Population& population,
                         const ModelSink& model_sink = {});

}  // namespace fbsim
