#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "fbsim/metrics.hpp"

using namespace fbsim;

namespace {

std::vector<Stance> stances(std::initializer_list<int> values) {
  std::vector<Stance> out;
  for (int v : values) out.push_back(Stance::from_value(v));
  return out;
}

UserProfile member(int id, Typology g, const PreferenceMatrix& p = {}) {
  UserProfile u;
  u.user_id = id;
  u.typology = g;
  u.preference = p;
  return u;
}

PreferenceMatrix filled(double v) {
  PreferenceMatrix m;
  for (std::size_t k = 0; k < PreferenceMatrix::kSize; ++k) m.at(k) = v;
  return m;
}

EpochGroupRow metric_row(int run, int epoch, Typology g, std::optional<double> mps, double umps_value) {
  EpochGroupRow r;
  r.run_id = run;
  r.epoch = epoch;
  r.group = g;
  r.mean_mps = mps;
  r.mean_umps = umps_value;
  return r;
}

const AggregateRow& find(const std::vector<AggregateRow>& rows, int epoch, Typology g, Metric m) {
  auto it = std::find_if(rows.begin(), rows.end(),
                         [&](const AggregateRow& r) { return r.epoch == epoch && r.group == g && r.metric == m; });
  REQUIRE(it != rows.end());
  return *it;
}

}  // namespace

TEST_CASE("iteration_mps") {
  std::vector<int> ends{1, 0, 0, 0, 1};
  CHECK(*iteration_mps(stances({-2, -1, 0, 1, 2}), ends) == 0.0);
  std::vector<int> first_two{1, 1, 0, 0, 0};
  CHECK(std::abs(*iteration_mps(stances({-2, -2, -1, 0, 1}), first_two) - (-2.0)) <= 1e-9);
  std::vector<int> three{0, 1, 1, 1, 0};
  CHECK(std::abs(*iteration_mps(stances({2, -1, 1, 2, -2}), three) - 2.0 / 3.0) <= 1e-9);
  std::vector<int> none(5, 0);
  CHECK_FALSE(iteration_mps(stances({-2, -1, 0, 1, 2}), none).has_value());
  std::vector<int> short_clicks{1, 0};
  CHECK_THROWS_AS(iteration_mps(stances({-2, -1, 0}), short_clicks), std::invalid_argument);
}

TEST_CASE("umps") {
  PreferenceMatrix right;
  for (int t = 0; t < kNumTopics; ++t) right(t, 4) = 1.0;
  CHECK(std::abs(umps(right) - 28.0) <= 1e-9);
  CHECK(std::abs(umps(filled(0.2))) <= 1e-12);

  PreferenceMatrix mixed;
  mixed(0, 0) = 0.5;  // -1
  mixed(3, 1) = 0.5;  // -0.5
  mixed(5, 3) = 2.0;  // +2
  CHECK(std::abs(umps(mixed) - 0.5) <= 1e-12);
}

TEST_CASE("epoch_group_aggregate") {
  std::vector<UserProfile> users = {member(0, Typology::solid_liberal, filled(0.2)),
                                    member(1, Typology::solid_liberal, [] {
                                      PreferenceMatrix m;
                                      for (int t = 0; t < kNumTopics; ++t) m(t, 0) = 1.0;
                                      return m;
                                    }()),
                                    member(2, Typology::bystander, filled(0.2))};
  std::vector<IterationRecord> records = {
      {1, 3, 0, Typology::solid_liberal, -2.0, 2},
      {2, 3, 1, Typology::solid_liberal, -1.0, 1},
      {3, 3, 1, Typology::solid_liberal, std::nullopt, 0},
      {4, 2, 2, Typology::bystander, 0.5, 2},  // other epoch
  };
  auto rows = epoch_group_aggregate(records, users, 3, 7);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.run_id == 7);
    CHECK(r.epoch == 3);
    if (r.group == Typology::solid_liberal) {
      CHECK(*r.mean_mps == -1.5);
      CHECK(r.n_clicks == 3);
      CHECK(r.n_interactions == 3);
      CHECK(std::abs(r.mean_umps - (-14.0)) <= 1e-12);  // (0 + -28) / 2
    } else if (r.group == Typology::bystander) {
      CHECK_FALSE(r.mean_mps.has_value());
      CHECK(std::abs(r.mean_umps) <= 1e-12);
      CHECK(r.n_interactions == 0);
    } else {
      CHECK_FALSE(r.mean_mps.has_value());
      CHECK(r.mean_umps == 0.0);  // no members
    }
  }
}

TEST_CASE("bootstrap_reference") {
  std::vector<ArticleUtility> articles;
  for (int i = 0; i < 5; ++i) articles.push_back({i, {0}, Stance::from_index(i)});
  std::vector<UserProfile> users = {member(0, Typology::solid_liberal), member(1, Typology::bystander)};
  InteractionLog log;
  auto add = [&log](int user, int article, bool clicked, Phase phase) {
    log.push_back({0, 0, 0, user, article, 1, clicked, phase});
  };
  add(0, 0, true, Phase::bootstrap);
  add(0, 1, true, Phase::bootstrap);
  add(0, 4, false, Phase::bootstrap);
  add(0, 4, true, Phase::live);  // live clicks never count
  for (int i = 0; i < 5; ++i) add(1, i, true, Phase::bootstrap);

  auto ref = bootstrap_reference(log, users, articles);
  CHECK(*ref.mps.at(Typology::solid_liberal) == -1.5);
  CHECK(*ref.mps.at(Typology::bystander) == 0.0);
  CHECK(ref.clicks.at(Typology::solid_liberal) == 2);
  CHECK_FALSE(ref.mps.at(Typology::core_conservative).has_value());
  CHECK(ref.warnings.size() == 3);

  auto again = bootstrap_reference(log, users, articles);
  CHECK(again.mps == ref.mps);
}

TEST_CASE("aggregate_runs") {
  SUBCASE("single run: mean is the value, std is zero") {
    std::vector<std::vector<EpochGroupRow>> runs = {{metric_row(0, 1, Typology::bystander, 0.25, 1.5)}};
    auto rows = aggregate_runs(runs);
    const auto& mps = find(rows, 1, Typology::bystander, Metric::mps);
    CHECK(*mps.mean == 0.25);
    CHECK(*mps.std == 0.0);
    CHECK(*find(rows, 1, Typology::bystander, Metric::umps).mean == 1.5);
  }
  SUBCASE("sample standard deviation, absent values skipped") {
    std::vector<std::vector<EpochGroupRow>> runs = {{metric_row(0, 2, Typology::solid_liberal, -1.0, 0.0)},
                                                    {metric_row(1, 2, Typology::solid_liberal, -2.0, 0.0)},
                                                    {metric_row(2, 2, Typology::solid_liberal, std::nullopt, 3.0)}};
    auto rows = aggregate_runs(runs);
    const auto& mps = find(rows, 2, Typology::solid_liberal, Metric::mps);
    CHECK(*mps.mean == -1.5);
    CHECK(std::abs(*mps.std - std::sqrt(0.5)) <= 1e-12);
    const auto& u = find(rows, 2, Typology::solid_liberal, Metric::umps);
    CHECK(*u.mean == 1.0);
    CHECK(std::abs(*u.std - std::sqrt(3.0)) <= 1e-12);
  }
  SUBCASE("all absent gives an absent mean") {
    std::vector<std::vector<EpochGroupRow>> runs = {{metric_row(0, 1, Typology::bystander, std::nullopt, 0.0)}};
    CHECK_FALSE(find(aggregate_runs(runs), 1, Typology::bystander, Metric::mps).mean.has_value());
  }
  SUBCASE("order independent to the bit") {
    Rng rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<std::vector<EpochGroupRow>> runs;
    for (int r = 0; r < 10; ++r) {
      std::vector<EpochGroupRow> series;
      for (int e = 0; e < 5; ++e)
        for (Typology g : kTypologies) series.push_back(metric_row(r, e, g, u(rng), u(rng) * 10));
      runs.push_back(series);
    }
    auto forward = aggregate_runs(runs);
    std::reverse(runs.begin(), runs.end());
    std::swap(runs[2], runs[7]);
    auto shuffled = aggregate_runs(runs);
    REQUIRE(forward.size() == shuffled.size());
    for (std::size_t i = 0; i < forward.size(); ++i) {
      CHECK(forward[i].mean == shuffled[i].mean);
      CHECK(forward[i].std == shuffled[i].std);
    }
  }
}

TEST_CASE("metrics and aggregate CSV round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "fbsim_test_metrics";
  fs::remove_all(dir);
  std::vector<EpochGroupRow> rows = {metric_row(3, 0, Typology::solid_liberal, -1.25, -3.5),
                                     metric_row(3, 1, Typology::bystander, std::nullopt, 0.125)};
  rows[0].n_clicks = 40;
  rows[0].n_interactions = 1400;
  write_metrics_csv(dir / "metrics_epoch.csv", rows);
  auto back = read_metrics_csv(dir / "metrics_epoch.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].run_id == 3);
  CHECK(*back[0].mean_mps == -1.25);
  CHECK(back[0].n_clicks == 40);
  CHECK(back[0].n_interactions == 1400);
  CHECK_FALSE(back[1].mean_mps.has_value());
  CHECK(back[1].mean_umps == 0.125);

  std::vector<std::vector<EpochGroupRow>> runs = {rows};
  auto agg = aggregate_runs(runs);
  write_aggregate_csv(dir / "aggregate.csv", agg);
  auto agg_back = read_aggregate_csv(dir / "aggregate.csv");
  REQUIRE(agg_back.size() == agg.size());
  for (std::size_t i = 0; i < agg.size(); ++i) {
    CHECK(agg_back[i].epoch == agg[i].epoch);
    CHECK(agg_back[i].metric == agg[i].metric);
    CHECK(agg_back[i].mean.has_value() == agg[i].mean.has_value());
  }
  fs::remove_all(dir);
}
