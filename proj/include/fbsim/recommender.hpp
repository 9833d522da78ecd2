#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "fbsim/behavior.hpp"
#include "fbsim/corpus.hpp"

namespace fbsim {

struct MFHyper {
  int latent_dim = 16;
  double learning_rate = 0.05;
  double l2_reg = 0.01;
  int sgd_epochs = 10;
  double init_scale = 0.1;
  bool warm_start = false;

  void validate() const;

  friend bool operator==(const MFHyper&, const MFHyper&) = default;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough unexposed articles left to fill a list for a user.
class ExhaustionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Latent-factor model: score(u, i) = <x_u, y_i>.
class MFModel {
 public:
  MFModel() = default;
  MFModel(int n_users, int n_items, const MFHyper& hyper);

  int n_users() const { return n_users_; }
  int n_items() const { return n_items_; }
  int dim() const { return hyper_.latent_dim; }
  const MFHyper& hyper() const { return hyper_; }

  std::span<double> user_vector(int u);
  std::span<const double> user_vector(int u) const;
  std::span<double> item_vector(int i);
  std::span<const double> item_vector(int i) const;

  /// Number of log rows the model was fit on.
  std::size_t trained_rows = 0;

  friend bool operator==(const MFModel&, const MFModel&) = default;

 private:
  int n_users_ = 0;
  int n_items_ = 0;
  MFHyper hyper_;
  std::vector<double> users_;
  std::vector<double> items_;
};

/// SGD on sum (y - x_u.y_i)^2 + l2 (|x|^2 + |y|^2) over the whole log,
/// clicked rows as 1 and exposed-but-unclicked rows as 0. Embeddings start
/// from N(0, init_scale^2) drawn from `rng`, or from `previous` when
/// hyper.warm_start is set and a previous model is given.
MFModel train_mf(const InteractionLog& log, int n_users, int n_articles, const MFHyper& hyper, Rng& rng,
                 const MFModel* previous = nullptr);

double predict(const MFModel& model, int user_id, int article_id);

struct ScoredArticle {
  int article_id = 0;
  double score = 0.0;
};

/// Up to n unexposed articles by descending score, ties by ascending id.
std::vector<ScoredArticle> top_candidates(const MFModel& model, const UserProfile& user, int n);

/// Exactly k unexposed articles by descending score; throws ExhaustionError
/// when fewer than k remain.
std::vector<int> recommend_topk(const MFModel& model, const UserProfile& user,
                                std::span<const ArticleUtility> all_articles, int k);

/// Per topic, `per_topic` articles covering it drawn without replacement;
/// concatenated in topic order with repeats dropped.
std::vector<int> random_exposures_per_topic(std::span<const ArticleUtility> articles, int per_topic, Rng& rng);

void write_model_csv(const std::filesystem::path& path, const MFModel& model);

}  // namespace fbsim
