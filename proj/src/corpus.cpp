#include "fbsim/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fbsim {

namespace {

constexpr std::array<std::string_view, 5> kTypologyNames = {
    "solid_liberal", "opportunity_democrat", "bystander", "market_skeptic_republican",
    "core_conservative"};

}  // namespace

std::string_view typology_name(Typology t) { return kTypologyNames.at(static_cast<std::size_t>(t)); }

std::optional<Typology> parse_typology(std::string_view name) {
  for (std::size_t i = 0; i < kTypologyNames.size(); ++i) {
    if (kTypologyNames[i] == name) return static_cast<Typology>(i);
  }
  return std::nullopt;
}

UtilityMatrix utility_matrix(const ArticleUtility& article) {
  UtilityMatrix a;
  for (TopicId t : article.topics) a(t, article.stance.index()) = 1;
  return a;
}

void TypologyTemplate::validate() const {
  double sum = 0.0;
  for (double w : base_weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument(std::string(typology_name(typology)) +
                                  ": base weights must be nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(typology_name(typology)) +
                                ": base weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw std::invalid_argument(std::string(typology_name(typology)) +
                                ": concentration must be positive");
  }
}

TemplateMap default_templates() {
  auto make = [](Typology t, std::array<double, kNumStances> w) {
    return std::pair{t, TypologyTemplate{t, w, 50.0}};
  };
  return TemplateMap{
      make(Typology::solid_liberal, {0.45, 0.30, 0.15, 0.07, 0.03}),
      make(Typology::opportunity_democrat, {0.25, 0.35, 0.25, 0.10, 0.05}),
      make(Typology::bystander, {0.10, 0.20, 0.40, 0.20, 0.10}),
      make(Typology::market_skeptic_republican, {0.05, 0.10, 0.25, 0.35, 0.25}),
      make(Typology::core_conservative, {0.03, 0.07, 0.15, 0.30, 0.45}),
  };
}

bool ExposureSet::insert(int article_id) {
  if (article_id < 0) throw std::invalid_argument("negative article id");
  auto idx = static_cast<std::size_t>(article_id);
  if (idx >= bits_.size()) bits_.resize(std::max(idx + 1, bits_.size() * 2), false);
  if (bits_[idx]) return false;
  bits_[idx] = true;
  ++count_;
  return true;
}

void CorpusSpec::validate() const {
  if (n_articles <= 0 || n_articles % kNumStances != 0) {
    throw std::invalid_argument("n_articles must be a positive multiple of 5 (got " +
                                std::to_string(n_articles) + ")");
  }
  if (!(multi_topic_prob >= 0.0 && multi_topic_prob <= 1.0)) {
    throw std::invalid_argument("multi_topic_prob must lie in [0,1]");
  }
  if (max_topics_per_article < 1 || max_topics_per_article > kNumTopics) {
    throw std::invalid_argument("max_topics_per_article must lie in [1,14] (got " +
                                std::to_string(max_topics_per_article) + ")");
  }
}

std::vector<ArticleUtility> generate_articles(const CorpusSpec& spec, Rng& rng) {
  spec.validate();
  std::array<TopicId, kNumTopics> all_topics{};
  std::iota(all_topics.begin(), all_topics.end(), 0);
  std::binomial_distribution<int> extra_topics(spec.max_topics_per_article - 1, spec.multi_topic_prob);

  std::vector<ArticleUtility> articles;
  articles.reserve(static_cast<std::size_t>(spec.n_articles));
  for (int i = 0; i < spec.n_articles; ++i) {
    ArticleUtility a;
    a.article_id = i;
    a.stance = Stance::from_index(i % kNumStances);
    int count = std::min(1 + extra_topics(rng), kNumTopics);
    a.topics.reserve(static_cast<std::size_t>(count));
    std::sample(all_topics.begin(), all_topics.end(), std::back_inserter(a.topics), count, rng);
    articles.push_back(std::move(a));
  }
  return articles;
}

std::vector<UserProfile> generate_users(int per_group, const TemplateMap& templates, Rng& rng) {
  if (per_group <= 0) throw std::invalid_argument("per_group must be positive");
  for (Typology t : kTypologies) {
    auto it = templates.find(t);
    if (it == templates.end()) {
      throw std::invalid_argument("missing template for typology " + std::string(typology_name(t)));
    }
    it->second.validate();
  }

  std::vector<UserProfile> users;
  users.reserve(static_cast<std::size_t>(per_group) * kTypologies.size());
  int next_id = 0;
  for (Typology t : kTypologies) {
    const TypologyTemplate& tmpl = templates.at(t);
    std::array<std::gamma_distribution<double>, kNumStances> gammas;
    for (int s = 0; s < kNumStances; ++s) {
      double shape = tmpl.concentration * tmpl.base_weights[static_cast<std::size_t>(s)];
      if (shape > 0.0) gammas[static_cast<std::size_t>(s)] = std::gamma_distribution<double>(shape, 1.0);
    }
    for (int n = 0; n < per_group; ++n) {
      UserProfile u;
      u.user_id = next_id++;
      u.typology = t;
      for (TopicId topic = 0; topic < kNumTopics; ++topic) {
        std::array<double, kNumStances> draw{};
        double sum = 0.0;
        for (int s = 0; s < kNumStances; ++s) {
          auto si = static_cast<std::size_t>(s);
          draw[si] = tmpl.base_weights[si] > 0.0 ? gammas[si](rng) : 0.0;
          sum += draw[si];
        }
        if (!(sum > 0.0)) {
          // Every gamma draw underflowed (tiny concentration); fall back to the template.
          draw = tmpl.base_weights;
          sum = 1.0;
        }
        for (int s = 0; s < kNumStances; ++s) u.preference(topic, s) = draw[static_cast<std::size_t>(s)] / sum;
      }
      users.push_back(std::move(u));
    }
  }
  return users;
}

}  // namespace fbsim
