#include "fbsim/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "fbsim/csv.hpp"

namespace fbsim {

void MFHyper::validate() const {
  if (latent_dim <= 0) throw std::invalid_argument("mf.latent_dim must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("mf.learning_rate must be positive");
  if (!(l2_reg >= 0.0)) throw std::invalid_argument("mf.l2_reg must be nonnegative");
  if (sgd_epochs <= 0) throw std::invalid_argument("mf.sgd_epochs must be positive");
  if (!(init_scale > 0.0)) throw std::invalid_argument("mf.init_scale must be positive");
}

MFModel::MFModel(int n_users, int n_items, const MFHyper& hyper)
    : n_users_(n_users),
      n_items_(n_items),
      hyper_(hyper),
      users_(static_cast<std::size_t>(n_users) * static_cast<std::size_t>(hyper.latent_dim), 0.0),
      items_(static_cast<std::size_t>(n_items) * static_cast<std::size_t>(hyper.latent_dim), 0.0) {}

std::span<double> MFModel::user_vector(int u) {
  return {users_.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(dim()),
          static_cast<std::size_t>(dim())};
}
std::span<const double> MFModel::user_vector(int u) const {
  return {users_.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(dim()),
          static_cast<std::size_t>(dim())};
}
std::span<double> MFModel::item_vector(int i) {
  return {items_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim()),
          static_cast<std::size_t>(dim())};
}
std::span<const double> MFModel::item_vector(int i) const {
  return {items_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim()),
          static_cast<std::size_t>(dim())};
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

MFModel train_mf(const InteractionLog& log, int n_users, int n_articles, const MFHyper& hyper, Rng& rng,
                 const MFModel* previous) {
  hyper.validate();
  if (log.empty()) throw TrainingError("cannot train on an empty interaction log");
  for (const auto& r : log) {
    if (r.user_id < 0 || r.user_id >= n_users || r.article_id < 0 || r.article_id >= n_articles) {
      throw TrainingError("log row references user " + std::to_string(r.user_id) + " / article " +
                          std::to_string(r.article_id) + " outside the model");
    }
  }

  MFModel model(n_users, n_articles, hyper);
  bool warm = hyper.warm_start && previous != nullptr && previous->n_users() == n_users &&
              previous->n_items() == n_articles && previous->dim() == hyper.latent_dim;
  if (warm) {
    for (int u = 0; u < n_users; ++u) std::ranges::copy(previous->user_vector(u), model.user_vector(u).begin());
    for (int i = 0; i < n_articles; ++i) std::ranges::copy(previous->item_vector(i), model.item_vector(i).begin());
  } else {
    std::normal_distribution<double> init(0.0, hyper.init_scale);
    for (int u = 0; u < n_users; ++u)
      for (double& v : model.user_vector(u)) v = init(rng);
    for (int i = 0; i < n_articles; ++i)
      for (double& v : model.item_vector(i)) v = init(rng);
  }

  std::vector<std::size_t> order(log.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double lr = hyper.learning_rate;
  const double reg = hyper.l2_reg;
  const auto d = static_cast<std::size_t>(hyper.latent_dim);
  std::vector<double> x_old(d);

  for (int epoch = 0; epoch < hyper.sgd_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto& r = log[idx];
      auto x = model.user_vector(r.user_id);
      auto y = model.item_vector(r.article_id);
      double err = (r.clicked ? 1.0 : 0.0) - dot(x, y);
      std::copy(x.begin(), x.end(), x_old.begin());
      for (std::size_t k = 0; k < d; ++k) {
        x[k] += lr * (err * y[k] - reg * x[k]);
        y[k] += lr * (err * x_old[k] - reg * y[k]);
      }
    }
    for (int u = 0; u < n_users; ++u) {
      if (!all_finite(model.user_vector(u))) {
        throw TrainingError("non-finite user embedding " + std::to_string(u) + " after SGD pass " +
                            std::to_string(epoch + 1) + " on " + std::to_string(log.size()) +
                            " rows (learning_rate=" + csv::real(lr) + ")");
      }
    }
    for (int i = 0; i < n_articles; ++i) {
      if (!all_finite(model.item_vector(i))) {
        throw TrainingError("non-finite item embedding " + std::to_string(i) + " after SGD pass " +
                            std::to_string(epoch + 1) + " on " + std::to_string(log.size()) +
                            " rows (learning_rate=" + csv::real(lr) + ")");
      }
    }
  }
  model.trained_rows = log.size();
  return model;
}

double predict(const MFModel& model, int user_id, int article_id) {
  if (user_id < 0 || user_id >= model.n_users()) {
    throw std::out_of_range("user id " + std::to_string(user_id) + " outside model");
  }
  if (article_id < 0 || article_id >= model.n_items()) {
    throw std::out_of_range("article id " + std::to_string(article_id) + " outside model");
  }
  return dot(model.user_vector(user_id), model.item_vector(article_id));
}

std::vector<ScoredArticle> top_candidates(const MFModel& model, const UserProfile& user, int n) {
  if (user.user_id < 0 || user.user_id >= model.n_users()) {
    throw std::out_of_range("user id " + std::to_string(user.user_id) + " outside model");
  }
  auto x = model.user_vector(user.user_id);
  std::vector<ScoredArticle> pool;
  pool.reserve(static_cast<std::size_t>(model.n_items()));
  for (int i = 0; i < model.n_items(); ++i) {
    if (user.exposed.contains(i)) continue;
    pool.push_back({i, dot(x, model.item_vector(i))});
  }
  auto better = [](const ScoredArticle& a, const ScoredArticle& b) {
    return a.score > b.score || (a.score == b.score && a.article_id < b.article_id);
  };
  auto keep = std::min(pool.size(), static_cast<std::size_t>(std::max(n, 0)));
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), better);
  pool.resize(keep);
  return pool;
}

std::vector<int> recommend_topk(const MFModel& model, const UserProfile& user,
                                std::span<const ArticleUtility> all_articles, int k) {
  if (static_cast<int>(all_articles.size()) != model.n_items()) {
    throw std::invalid_argument("catalog size does not match model");
  }
  auto top = top_candidates(model, user, k);
  if (static_cast<int>(top.size()) < k) {
    throw ExhaustionError("user " + std::to_string(user.user_id) + " has only " +
                          std::to_string(top.size()) + " unexposed articles left, need " + std::to_string(k));
  }
  std::vector<int> ids;
  ids.reserve(top.size());
  for (const auto& c : top) ids.push_back(c.article_id);
  return ids;
}

std::vector<int> random_exposures_per_topic(std::span<const ArticleUtility> articles, int per_topic, Rng& rng) {
  if (per_topic < 0) throw std::invalid_argument("per_topic must be nonnegative");
  std::array<std::vector<int>, kNumTopics> by_topic;
  for (const auto& a : articles) {
    for (TopicId t : a.topics) by_topic[static_cast<std::size_t>(t)].push_back(a.article_id);
  }
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(per_topic) * kNumTopics);
  ExposureSet seen;
  for (TopicId t = 0; t < kNumTopics; ++t) {
    const auto& pool = by_topic[static_cast<std::size_t>(t)];
    if (static_cast<int>(pool.size()) < per_topic) {
      throw std::invalid_argument("topic '" + std::string(topic_name(t)) + "' has only " +
                                  std::to_string(pool.size()) + " articles, need " + std::to_string(per_topic));
    }
    std::vector<int> sample;
    std::sample(pool.begin(), pool.end(), std::back_inserter(sample), per_topic, rng);
    // std::sample keeps input order; shuffle so the list order is random too.
    std::shuffle(sample.begin(), sample.end(), rng);
    for (int id : sample) {
      if (seen.insert(id)) picked.push_back(id);
    }
  }
  return picked;
}

void write_model_csv(const std::filesystem::path& path, const MFModel& model) {
  std::ostringstream out;
  out << "entity,id";
  for (int k = 0; k < model.dim(); ++k) out << ",dim" << k;
  out << '\n';
  auto row = [&](const char* entity, int id, std::span<const double> v) {
    out << entity << ',' << id;
    for (double x : v) out << ',' << csv::real(x);
    out << '\n';
  };
  for (int u = 0; u < model.n_users(); ++u) row("user", u, model.user_vector(u));
  for (int i = 0; i < model.n_items(); ++i) row("item", i, model.item_vector(i));
  csv::write_file(path, out.str());
}

}  // namespace fbsim
