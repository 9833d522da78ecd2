#include "fbsim/behavior.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbsim/csv.hpp"

namespace fbsim {

void ClickModelParams::validate() const {
  if (!(steepness > 0.0) || !std::isfinite(steepness)) {
    throw std::invalid_argument("click steepness must be positive");
  }
  if (!(midpoint >= 0.0 && midpoint <= 1.0)) throw std::invalid_argument("click midpoint must lie in [0,1]");
}

void DriftConfig::validate() const {
  if (!(influence >= 0.0) || !std::isfinite(influence)) {
    throw std::invalid_argument("drift influence must be nonnegative");
  }
}

double preference_score(const PreferenceMatrix& preference, const ArticleUtility& article) {
  double score = 0.0;
  int s = article.stance.index();
  for (TopicId t : article.topics) score += preference(t, s);
  return score;
}

double click_probability(double score, int n_topics, const ClickModelParams& params) {
  if (n_topics < 1) throw std::invalid_argument("n_topics must be >= 1");
  double x = params.steepness * (score / n_topics - params.midpoint);
  return 1.0 / (1.0 + std::exp(-x));
}

InteractionRecord simulate_impression(UserProfile& user, const ArticleUtility& article, int position,
                                      const ClickModelParams& params, const ImpressionContext& ctx,
                                      Rng& rng) {
  double p = click_probability(preference_score(user.preference, article), article.n_topics(), params);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool clicked = unit(rng) < p;
  user.exposed.insert(article.article_id);
  return InteractionRecord{ctx.run_id, ctx.iteration, ctx.epoch, user.user_id,
                           article.article_id, position, clicked, ctx.phase};
}

PreferenceMatrix apply_drift(const PreferenceMatrix& preference, const ArticleUtility& article, double c) {
  PreferenceMatrix out = preference;
  int s = article.stance.index();
  for (TopicId t : article.topics) out(t, s) += c;
  return out;
}

void renormalize_rows(PreferenceMatrix& preference, const ArticleUtility& article) {
  for (TopicId t : article.topics) {
    double sum = preference.row_sum(t);
    if (sum > 0.0) {
      for (int s = 0; s < kNumStances; ++s) preference(t, s) /= sum;
    }
  }
}

std::string_view phase_name(Phase p) { return p == Phase::bootstrap ? "bootstrap" : "live"; }

void write_interactions_csv(const std::filesystem::path& path, const InteractionLog& log) {
  std::ostringstream out;
  out << "run_id,iteration,epoch,user_id,article_id,position,clicked,phase\n";
  for (const auto& r : log) {
    out << r.run_id << ',' << r.iteration << ',' << r.epoch << ',' << r.user_id << ',' << r.article_id
        << ',' << r.position << ',' << (r.clicked ? 1 : 0) << ',' << phase_name(r.phase) << '\n';
  }
  csv::write_file(path, out.str());
}

InteractionLog read_interactions_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  const std::size_t cols[] = {table.column("run_id"),   table.column("iteration"),
                              table.column("epoch"),    table.column("user_id"),
                              table.column("article_id"), table.column("position"),
                              table.column("clicked"),  table.column("phase")};
  InteractionLog log;
  log.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    InteractionRecord r;
    r.run_id = static_cast<int>(csv::parse_int(row[cols[0]]));
    r.iteration = static_cast<int>(csv::parse_int(row[cols[1]]));
    r.epoch = static_cast<int>(csv::parse_int(row[cols[2]]));
    r.user_id = static_cast<int>(csv::parse_int(row[cols[3]]));
    r.article_id = static_cast<int>(csv::parse_int(row[cols[4]]));
    r.position = static_cast<int>(csv::parse_int(row[cols[5]]));
    auto clicked = csv::parse_int(row[cols[6]]);
    if (clicked != 0 && clicked != 1) throw std::runtime_error("clicked must be 0 or 1");
    r.clicked = clicked == 1;
    const auto& phase = row[cols[7]];
    if (phase == "bootstrap") {
      r.phase = Phase::bootstrap;
    } else if (phase == "live") {
      r.phase = Phase::live;
    } else {
      throw std::runtime_error("unknown phase '" + phase + "'");
    }
    log.push_back(r);
  }
  return log;
}

}  // namespace fbsim
