#pragma once

#include <filesystem>
#include <vector>

#include "fbsim/corpus.hpp"

namespace fbsim {

/// Logistic click link on the per-topic preference score.
struct ClickModelParams {
  double steepness = 10.0;
  double midpoint = 0.3;

  void validate() const;
};

struct DriftConfig {
  double influence = 0.0;
  // Off by default; when on, drifted rows are rescaled back to sum 1.
  bool renormalize = false;

  void validate() const;
};

enum class Phase { bootstrap, live };

struct InteractionRecord {
  int run_id = 0;
  int iteration = 0;  // 0 for bootstrap rows
  int epoch = 0;
  int user_id = 0;
  int article_id = 0;
  int position = 1;
  bool clicked = false;
  Phase phase = Phase::live;
};

using InteractionLog = std::vector<InteractionRecord>;

/// Where an impression happens; copied onto the emitted record.
struct ImpressionContext {
  int run_id = 0;
  int iteration = 0;
  int epoch = 0;
  Phase phase = Phase::live;
};

double preference_score(const PreferenceMatrix& preference, const ArticleUtility& article);

double click_probability(double score, int n_topics, const ClickModelParams& params);

/// Shows `article` to `user`: draws the click and marks the article exposed.
/// Does not apply drift.
InteractionRecord simulate_impression(UserProfile& user, const ArticleUtility& article, int position,
                                      const ClickModelParams& params, const ImpressionContext& ctx,
                                      Rng& rng);

PreferenceMatrix apply_drift(const PreferenceMatrix& preference, const ArticleUtility& article, double c);

/// Rescales every row covered by `article` to sum to 1.
void renormalize_rows(PreferenceMatrix& preference, const ArticleUtility& article);

std::string_view phase_name(Phase p);

void write_interactions_csv(const std::filesystem::path& path, const InteractionLog& log);
InteractionLog read_interactions_csv(const std::filesystem::path& path);

}  // namespace fbsim
