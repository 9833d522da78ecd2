#pragma once

#include <array>
#include <span>
#include <vector>

#include "fbsim/types.hpp"

namespace fbsim {

struct StanceDistribution {
  std::array<double, kNumStances> probs{};

  void validate() const;
};

enum class TargetScope { per_user, per_group };

struct CalibrationParams {
  bool enabled = false;
  double lambda = 0.9;
  double alpha = 0.01;
  int candidate_pool = 50;
  double target_smoothing = 0.5;
  TargetScope target_scope = TargetScope::per_user;

  void validate(int k) const;
};

/// Smoothed histogram of the stances of clicked articles:
/// (count_s + smoothing) / (total + 5 smoothing).
StanceDistribution stance_distribution(std::span<const Stance> clicked, double smoothing);

/// KL(target || (1 - alpha) list + alpha target).
double calibration_divergence(const StanceDistribution& target, const StanceDistribution& list_dist,
                              double alpha);

struct Candidate {
  int article_id = 0;
  Stance stance;
  double relevance = 0.0;
};

/// Greedy calibrated list of k ids from the candidate pool. Each step adds
/// the candidate maximizing
///   (1 - lambda) * sum of min-max normalized relevance - lambda * divergence
/// of the grown list. The returned list is ordered by raw relevance
/// (descending, ties by ascending id).
std::vector<int> calibrated_rerank(std::span<const Candidate> candidates, const StanceDistribution& target,
                                   const CalibrationParams& params, int k);

}  // namespace fbsim
