#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbsim/corpus.hpp"
#include "fbsim/csv.hpp"

namespace fbsim {

void write_articles_csv(const std::filesystem::path& path, const std::vector<ArticleUtility>& articles) {
  std::ostringstream out;
  out << "article_id,stance,topics\n";
  for (const auto& a : articles) {
    out << a.article_id << ',' << a.stance.value() << ',';
    for (std::size_t i = 0; i < a.topics.size(); ++i) {
      if (i) out << ';';
      out << a.topics[i];
    }
    out << '\n';
  }
  csv::write_file(path, out.str());
}

std::vector<ArticleUtility> read_articles_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  auto c_id = table.column("article_id");
  auto c_stance = table.column("stance");
  auto c_topics = table.column("topics");
  std::vector<ArticleUtility> articles;
  articles.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    ArticleUtility a;
    a.article_id = static_cast<int>(csv::parse_int(row[c_id]));
    a.stance = Stance::from_value(static_cast<int>(csv::parse_int(row[c_stance])));
    for (const auto& t : csv::split(row[c_topics], ';')) {
      auto topic = csv::parse_int(t);
      if (topic < 0 || topic >= kNumTopics) throw std::runtime_error("topic id out of range: " + t);
      a.topics.push_back(static_cast<TopicId>(topic));
    }
    std::sort(a.topics.begin(), a.topics.end());
    if (std::adjacent_find(a.topics.begin(), a.topics.end()) != a.topics.end()) {
      throw std::runtime_error("duplicate topic in article " + std::to_string(a.article_id));
    }
    articles.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (articles[i].article_id != static_cast<int>(i)) {
      throw std::runtime_error(path.string() + ": article ids must be 0..n-1 in order");
    }
  }
  return articles;
}

void write_users_csv(const std::filesystem::path& path, const std::vector<UserProfile>& users) {
  std::ostringstream out;
  out << "user_id,typology";
  for (int t = 0; t < kNumTopics; ++t)
    for (int s = 0; s < kNumStances; ++s) out << ",p_" << t << '_' << s;
  out << '\n';
  for (const auto& u : users) {
    out << u.user_id << ',' << typology_name(u.typology);
    for (double v : u.preference.cells()) out << ',' << csv::real(v);
    out << '\n';
  }
  csv::write_file(path, out.str());
}

std::vector<UserProfile> read_users_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  auto c_id = table.column("user_id");
  auto c_typ = table.column("typology");
  std::vector<std::size_t> cells;
  for (int t = 0; t < kNumTopics; ++t)
    for (int s = 0; s < kNumStances; ++s)
      cells.push_back(table.column("p_" + std::to_string(t) + "_" + std::to_string(s)));

  std::vector<UserProfile> users;
  for (const auto& row : table.rows) {
    UserProfile u;
    u.user_id = static_cast<int>(csv::parse_int(row[c_id]));
    auto typ = parse_typology(row[c_typ]);
    if (!typ) throw std::runtime_error("unknown typology '" + row[c_typ] + "'");
    u.typology = *typ;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double v = csv::parse_real(row[cells[k]]);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::runtime_error("user " + std::to_string(u.user_id) + ": negative or non-finite preference");
      }
      u.preference.at(k) = v;
    }
    users.push_back(std::move(u));
  }
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (users[i].user_id != static_cast<int>(i)) {
      throw std::runtime_error(path.string() + ": user ids must be 0..n-1 in order");
    }
  }
  return users;
}

}  // namespace fbsim
