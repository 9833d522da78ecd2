#include "fbsim/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbsim {

void StanceDistribution::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("stance distribution has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("stance distribution does not sum to 1");
}

void CalibrationParams::validate(int k) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("intervention.lambda must lie in [0,1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("intervention.alpha must lie in (0,1)");
  if (candidate_pool < k) {
    throw std::invalid_argument("intervention.pool must be >= rec_k (" + std::to_string(k) + ")");
  }
  if (!(target_smoothing >= 0.0)) throw std::invalid_argument("intervention.smoothing must be nonnegative");
}

StanceDistribution stance_distribution(std::span<const Stance> clicked, double smoothing) {
  if (!(smoothing >= 0.0)) throw std::invalid_argument("smoothing must be nonnegative");
  if (clicked.empty() && smoothing == 0.0) {
    throw std::domain_error("stance distribution undefined for zero clicks without smoothing");
  }
  std::array<double, kNumStances> counts{};
  for (Stance s : clicked) counts[static_cast<std::size_t>(s.index())] += 1.0;
  double denom = static_cast<double>(clicked.size()) + kNumStances * smoothing;
  StanceDistribution d;
  for (std::size_t s = 0; s < counts.size(); ++s) d.probs[s] = (counts[s] + smoothing) / denom;
  return d;
}

double calibration_divergence(const StanceDistribution& target, const StanceDistribution& list_dist,
                              double alpha) {
  double kl = 0.0;
  for (std::size_t s = 0; s < target.probs.size(); ++s) {
    double p = target.probs[s];
    if (p <= 0.0) continue;
    double q = (1.0 - alpha) * list_dist.probs[s] + alpha * p;
    kl += p * std::log(p / q);
  }
  return kl;
}

std::vector<int> calibrated_rerank(std::span<const Candidate> candidates, const StanceDistribution& target,
                                   const CalibrationParams& params, int k) {
  if (k < 0 || static_cast<int>(candidates.size()) < k) {
    throw std::invalid_argument("calibrated_rerank needs at least " + std::to_string(k) + " candidates, got " +
                                std::to_string(candidates.size()));
  }
  const std::size_t n = candidates.size();

  std::vector<double> rel(n, 0.5);
  if (n > 0) {
    auto [lo, hi] = std::minmax_element(candidates.begin(), candidates.end(),
                                        [](const Candidate& a, const Candidate& b) { return a.relevance < b.relevance; });
    double range = hi->relevance - lo->relevance;
    if (range > 0.0) {
      for (std::size_t i = 0; i < n; ++i) rel[i] = (candidates[i].relevance - lo->relevance) / range;
    }
  }

  std::vector<bool> taken(n, false);
  std::array<double, kNumStances> counts{};
  double rel_sum = 0.0;
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));

  for (int step = 0; step < k; ++step) {
    const double size = static_cast<double>(step + 1);
    std::size_t best = n;
    double best_obj = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      StanceDistribution q;
      for (std::size_t s = 0; s < counts.size(); ++s) q.probs[s] = counts[s] / size;
      q.probs[static_cast<std::size_t>(candidates[i].stance.index())] += 1.0 / size;
      double obj = (1.0 - params.lambda) * (rel_sum + rel[i]) -
                   params.lambda * calibration_divergence(target, q, params.alpha);
      if (best == n || obj > best_obj ||
          (obj == best_obj && candidates[i].article_id < candidates[best].article_id)) {
        best = i;
        best_obj = obj;
      }
    }
    taken[best] = true;
    counts[static_cast<std::size_t>(candidates[best].stance.index())] += 1.0;
    rel_sum += rel[best];
    chosen.push_back(best);
  }

  std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].relevance != candidates[b].relevance) return candidates[a].relevance > candidates[b].relevance;
    return candidates[a].article_id < candidates[b].article_id;
  });
  std::vector<int> ids;
  ids.reserve(chosen.size());
  for (std::size_t c : chosen) ids.push_back(candidates[c].article_id);
  return ids;
}

}  // namespace fbsim
