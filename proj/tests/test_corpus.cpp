#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "fbsim/corpus.hpp"

using namespace fbsim;

namespace {

int count_stance(const std::vector<ArticleUtility>& articles, int value) {
  return static_cast<int>(std::count_if(articles.begin(), articles.end(),
                                        [value](const ArticleUtility& a) { return a.stance.value() == value; }));
}

bool same_articles(const std::vector<ArticleUtility>& a, const std::vector<ArticleUtility>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].article_id != b[i].article_id || a[i].topics != b[i].topics || !(a[i].stance == b[i].stance)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("stance value and index are a bijection") {
  for (int v = -2; v <= 2; ++v) {
    Stance s = Stance::from_value(v);
    CHECK(s.index() == v + 2);
    CHECK(Stance::from_index(s.index()).value() == v);
  }
  CHECK_THROWS_AS(Stance::from_value(3), std::invalid_argument);
  CHECK_THROWS_AS(Stance::from_index(-1), std::invalid_argument);
}

TEST_CASE("topic labels are unique") {
  std::set<std::string_view> names(kTopicNames.begin(), kTopicNames.end());
  CHECK(names.size() == 14);
}

TEST_CASE("utility matrix of a two-topic liberal article") {
  ArticleUtility a{7, {0, 4}, Stance::from_value(-2)};  // abortion, immigration
  auto m = utility_matrix(a);
  CHECK(m(0, 0) == 1);
  CHECK(m(4, 0) == 1);
  CHECK(static_cast<int>(m.total()) == 2);
}

TEST_CASE("utility matrix of a single-topic conservative article") {
  ArticleUtility a{1, {2}, Stance::from_value(2)};  // guns
  auto m = utility_matrix(a);
  CHECK(m(2, 4) == 1);
  CHECK(static_cast<int>(m.total()) == 1);
}

TEST_CASE("generate_articles: one article per stance in the minimal corpus") {
  Rng rng(99);
  auto articles = generate_articles({5, 0.0, 1}, rng);
  REQUIRE(articles.size() == 5);
  for (int v = -2; v <= 2; ++v) CHECK(count_stance(articles, v) == 1);
  for (const auto& a : articles) CHECK(a.topics.size() == 1);
}

TEST_CASE("generate_articles: full-size corpus has 8,000 articles per stance") {
  Rng rng(1);
  auto articles = generate_articles({40000, 0.2, 2}, rng);
  REQUIRE(articles.size() == 40000);
  for (int v = -2; v <= 2; ++v) CHECK(count_stance(articles, v) == 8000);
}

TEST_CASE("generate_articles: invariants over random specs") {
  Rng meta(2024);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 5 * std::uniform_int_distribution<int>(1, 200)(meta);
    double p = std::uniform_real_distribution<double>(0.0, 1.0)(meta);
    int max_topics = std::uniform_int_distribution<int>(1, 14)(meta);
    Rng rng(meta());
    auto articles = generate_articles({n, p, max_topics}, rng);
    REQUIRE(static_cast<int>(articles.size()) == n);
    for (int v = -2; v <= 2; ++v) CHECK(count_stance(articles, v) == n / 5);
    for (const auto& a : articles) {
      CHECK(!a.topics.empty());
      CHECK(a.n_topics() <= max_topics);
      CHECK(std::is_sorted(a.topics.begin(), a.topics.end()));
      CHECK(std::adjacent_find(a.topics.begin(), a.topics.end()) == a.topics.end());
      auto m = utility_matrix(a);
      // ones only in the stance column, one per topic
      int ones = 0;
      for (int t = 0; t < kNumTopics; ++t)
        for (int s = 0; s < kNumStances; ++s) {
          if (m(t, s)) {
            CHECK(s == a.stance.index());
            ++ones;
          }
        }
      CHECK(ones == a.n_topics());
    }
  }
}

TEST_CASE("generate_articles: topic count follows 1 + Binomial(max-1, p)") {
  Rng rng(5);
  auto articles = generate_articles({50000, 0.3, 3}, rng);
  double mean = 0.0;
  for (const auto& a : articles) mean += a.n_topics();
  mean /= static_cast<double>(articles.size());
  // E = 1 + 2 * 0.3 = 1.6; sd of the mean ~ sqrt(2*.3*.7/50000) = 0.0029
  CHECK(mean == doctest::Approx(1.6).epsilon(0.01));
}

TEST_CASE("generate_articles: deterministic given the seed") {
  Rng a(42), b(42), c(43);
  auto x = generate_articles({500, 0.4, 3}, a);
  auto y = generate_articles({500, 0.4, 3}, b);
  auto z = generate_articles({500, 0.4, 3}, c);
  CHECK(same_articles(x, y));
  CHECK_FALSE(same_articles(x, z));
}

TEST_CASE("generate_articles: rejects invalid specs") {
  Rng rng(0);
  CHECK_THROWS_AS(generate_articles({12, 0.2, 2}, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_articles({10, 0.2, 15}, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_articles({10, 1.5, 2}, rng), std::invalid_argument);
}

TEST_CASE("default templates") {
  auto t = default_templates();
  REQUIRE(t.size() == 5);
  std::array<double, 5> expected{0.45, 0.30, 0.15, 0.07, 0.03};
  CHECK(t.at(Typology::solid_liberal).base_weights == expected);
  for (const auto& [typ, tmpl] : t) {
    CHECK(std::accumulate(tmpl.base_weights.begin(), tmpl.base_weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tmpl.concentration == 50.0);
    CHECK_NOTHROW(tmpl.validate());
  }
  const auto& w = t.at(Typology::bystander).base_weights;
  CHECK(std::max_element(w.begin(), w.end()) - w.begin() == 2);
}

TEST_CASE("generate_users: 100 per group gives 500 users") {
  Rng rng(3);
  auto users = generate_users(100, default_templates(), rng);
  REQUIRE(users.size() == 500);
  for (Typology g : kTypologies) {
    CHECK(std::count_if(users.begin(), users.end(), [g](const UserProfile& u) { return u.typology == g; }) == 100);
  }
  for (std::size_t i = 0; i < users.size(); ++i) CHECK(users[i].user_id == static_cast<int>(i));
}

TEST_CASE("generate_users: rows are stochastic") {
  Rng rng(4);
  auto users = generate_users(10, default_templates(), rng);
  REQUIRE(users.size() == 50);
  for (const auto& u : users) {
    CHECK(u.exposed.size() == 0);
    for (int t = 0; t < kNumTopics; ++t) {
      CHECK(std::abs(u.preference.row_sum(t) - 1.0) <= 1e-9);
      for (int s = 0; s < kNumStances; ++s) CHECK(u.preference(t, s) >= 0.0);
    }
  }
}

TEST_CASE("generate_users: huge concentration reproduces the template") {
  auto templates = default_templates();
  for (auto& [t, tmpl] : templates) tmpl.concentration = 1e9;
  Rng rng(6);
  auto users = generate_users(3, templates, rng);
  for (const auto& u : users) {
    const auto& w = templates.at(u.typology).base_weights;
    for (int t = 0; t < kNumTopics; ++t)
      for (int s = 0; s < kNumStances; ++s) CHECK(std::abs(u.preference(t, s) - w[static_cast<std::size_t>(s)]) < 1e-3);
  }
}

TEST_CASE("generate_users: deterministic and complains about missing templates") {
  Rng a(8), b(8);
  auto x = generate_users(4, default_templates(), a);
  auto y = generate_users(4, default_templates(), b);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].preference == y[i].preference);

  auto partial = default_templates();
  partial.erase(Typology::bystander);
  CHECK_THROWS_AS(generate_users(4, partial, a), std::invalid_argument);
}

TEST_CASE("template validation") {
  TypologyTemplate t{Typology::bystander, {0.5, 0.5, 0.1, 0.0, 0.0}, 50.0};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.base_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
  t.concentration = 0.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("exposure set only grows") {
  ExposureSet set;
  CHECK(set.insert(10));
  CHECK_FALSE(set.insert(10));
  CHECK(set.insert(3));
  CHECK(set.contains(10));
  CHECK(set.contains(3));
  CHECK_FALSE(set.contains(4));
  CHECK_FALSE(set.contains(100000));
  CHECK(set.size() == 2);
}

TEST_CASE("articles.csv and users.csv round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "fbsim_test_corpus_io";
  fs::remove_all(dir);
  Rng rng(11);
  auto articles = generate_articles({50, 0.5, 3}, rng);
  auto users = generate_users(2, default_templates(), rng);
  write_articles_csv(dir / "articles.csv", articles);
  write_users_csv(dir / "users.csv", users);

  CHECK(same_articles(read_articles_csv(dir / "articles.csv"), articles));
  auto loaded = read_users_csv(dir / "users.csv");
  REQUIRE(loaded.size() == users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    CHECK(loaded[i].typology == users[i].typology);
    for (std::size_t k = 0; k < PreferenceMatrix::kSize; ++k) {
      CHECK(loaded[i].preference.at(k) == doctest::Approx(users[i].preference.at(k)).epsilon(1e-8));
    }
  }
  fs::remove_all(dir);
}
