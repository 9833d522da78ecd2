#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "fbsim/types.hpp"

namespace fbsim {

enum class Typology {
  solid_liberal,
  opportunity_democrat,
  bystander,
  market_skeptic_republican,
  core_conservative,
};

inline constexpr std::array<Typology, 5> kTypologies = {
    Typology::solid_liberal, Typology::opportunity_democrat, Typology::bystander,
    Typology::market_skeptic_republican, Typology::core_conservative};

std::string_view typology_name(Typology t);
std::optional<Typology> parse_typology(std::string_view name);

struct ArticleUtility {
  int article_id = 0;
  std::vector<TopicId> topics;  // sorted, unique, nonempty
  Stance stance;

  int n_topics() const { return static_cast<int>(topics.size()); }
};

/// Binary 14x5 matrix: ones at (t, stance.index()) for every covered topic t.
UtilityMatrix utility_matrix(const ArticleUtility& article);

struct TypologyTemplate {
  Typology typology = Typology::bystander;
  std::array<double, kNumStances> base_weights{};
  double concentration = 50.0;

  void validate() const;
};

using TemplateMap = std::map<Typology, TypologyTemplate>;

TemplateMap default_templates();

/// Set of article ids a user has been shown. Backed by a bitmap so the
/// recommender can test membership across the whole catalog cheaply.
class ExposureSet {
 public:
  bool contains(int article_id) const {
    auto idx = static_cast<std::size_t>(article_id);
    return idx < bits_.size() && bits_[idx];
  }
  /// Returns false if the id was already present.
  bool insert(int article_id);
  std::size_t size() const { return count_; }

  friend bool operator==(const ExposureSet&, const ExposureSet&) = default;

 private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

struct UserProfile {
  int user_id = 0;
  Typology typology = Typology::bystander;
  PreferenceMatrix preference;
  ExposureSet exposed;
};

struct CorpusSpec {
  int n_articles = 2000;
  double multi_topic_prob = 0.2;
  int max_topics_per_article = 2;

  void validate() const;
};

/// Articles are interleaved by stance (id % 5 gives the stance index), so
/// every prefix of 5k articles is stance-balanced.
std::vector<ArticleUtility> generate_articles(const CorpusSpec& spec, Rng& rng);

/// 5 x per_group users, grouped by typology in kTypologies order. Each
/// preference row is an independent Dirichlet(kappa * base_weights) draw.
std::vector<UserProfile> generate_users(int per_group, const TemplateMap& templates, Rng& rng);

// CSV persistence (articles.csv / users.csv).
void write_articles_csv(const std::filesystem::path& path, const std::vector<ArticleUtility>& articles);
std::vector<ArticleUtility> read_articles_csv(const std::filesystem::path& path);
void write_users_csv(const std::filesystem::path& path, const std::vector<UserProfile>& users);
std::vector<UserProfile> read_users_csv(const std::filesystem::path& path);

}  // namespace fbsim
