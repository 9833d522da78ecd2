#include "fbsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fbsim/csv.hpp"

namespace fbsim {

std::optional<double> iteration_mps(std::span<const Stance> stances, std::span<const int> clicks) {
  if (stances.size() != clicks.size()) {
    throw std::invalid_argument("iteration_mps: " + std::to_string(stances.size()) + " stances vs " +
                                std::to_string(clicks.size()) + " click flags");
  }
  double weighted = 0.0;
  int n = 0;
  for (std::size_t p = 0; p < stances.size(); ++p) {
    if (clicks[p]) {
      weighted += stances[p].value();
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return weighted / n;
}

double umps(const PreferenceMatrix& preference) {
  double total = 0.0;
  for (TopicId t = 0; t < kNumTopics; ++t) {
    for (int s = 0; s < kNumStances; ++s) total += (s - 2) * preference(t, s);
  }
  return total;
}

std::vector<EpochGroupRow> epoch_group_aggregate(std::span<const IterationRecord> records,
                                                 std::span<const UserProfile> users, int epoch, int run_id) {
  std::vector<EpochGroupRow> rows;
  for (Typology g : kTypologies) {
    EpochGroupRow row;
    row.run_id = run_id;
    row.epoch = epoch;
    row.group = g;
    double mps_sum = 0.0;
    int mps_n = 0;
    for (const auto& r : records) {
      if (r.epoch != epoch || r.group != g) continue;
      ++row.n_interactions;
      row.n_clicks += r.n_clicks;
      if (r.mps) {
        mps_sum += *r.mps;
        ++mps_n;
      }
    }
    if (mps_n > 0) row.mean_mps = mps_sum / mps_n;
    double umps_sum = 0.0;
    int members = 0;
    for (const auto& u : users) {
      if (u.typology != g) continue;
      umps_sum += umps(u.preference);
      ++members;
    }
    row.mean_umps = members > 0 ? umps_sum / members : 0.0;
    rows.push_back(row);
  }
  return rows;
}

BootstrapReference bootstrap_reference(std::span<const InteractionRecord> log, std::span<const UserProfile> users,
                                       std::span<const ArticleUtility> articles) {
  std::map<Typology, double> sums;
  BootstrapReference ref;
  for (Typology g : kTypologies) {
    sums[g] = 0.0;
    ref.clicks[g] = 0;
  }
  for (const auto& r : log) {
    if (r.phase != Phase::bootstrap || !r.clicked) continue;
    Typology g = users[static_cast<std::size_t>(r.user_id)].typology;
    sums[g] += articles[static_cast<std::size_t>(r.article_id)].stance.value();
    ref.clicks[g] += 1;
  }
  for (Typology g : kTypologies) {
    if (ref.clicks[g] > 0) {
      ref.mps[g] = sums[g] / ref.clicks[g];
    } else {
      ref.mps[g] = std::nullopt;
      ref.warnings.push_back("group " + std::string(typology_name(g)) + " has no bootstrap clicks");
    }
  }
  return ref;
}

std::string_view metric_name(Metric m) { return m == Metric::mps ? "mps" : "umps"; }

std::vector<AggregateRow> aggregate_runs(std::span<const std::vector<EpochGroupRow>> runs) {
  // (epoch, group, metric) -> observed values
  std::map<std::tuple<int, Typology, Metric>, std::vector<double>> cells;
  for (const auto& run : runs) {
    for (const auto& row : run) {
      auto& mps = cells[{row.epoch, row.group, Metric::mps}];
      if (row.mean_mps) mps.push_back(*row.mean_mps);
      cells[{row.epoch, row.group, Metric::umps}].push_back(row.mean_umps);
    }
  }
  std::vector<AggregateRow> out;
  out.reserve(cells.size());
  for (auto& [key, values] : cells) {
    AggregateRow row;
    std::tie(row.epoch, row.group, row.metric) = key;
    if (!values.empty()) {
      // Sorting makes the floating-point sums independent of run order.
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (double v : values) sum += v;
      double mean = sum / static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      row.mean = mean;
      row.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    }
    out.push_back(row);
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochGroupRow>& rows) {
  std::ostringstream out;
  out << "run_id,epoch,group,mean_mps,mean_umps,n_clicks,n_interactions\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.epoch << ',' << typology_name(r.group) << ',' << csv::real(r.mean_mps) << ','
        << csv::real(r.mean_umps) << ',' << r.n_clicks << ',' << r.n_interactions << '\n';
  }
  csv::write_file(path, out.str());
}

namespace {

Typology typology_field(const std::string& s) {
  auto t = parse_typology(s);
  if (!t) throw std::runtime_error("unknown group '" + s + "'");
  return *t;
}

}  // namespace

std::vector<EpochGroupRow> read_metrics_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  const std::size_t c_run = table.column("run_id"), c_epoch = table.column("epoch"),
                    c_group = table.column("group"), c_mps = table.column("mean_mps"),
                    c_umps = table.column("mean_umps"), c_clicks = table.column("n_clicks"),
                    c_inter = table.column("n_interactions");
  std::vector<EpochGroupRow> rows;
  for (const auto& f : table.rows) {
    EpochGroupRow r;
    r.run_id = static_cast<int>(csv::parse_int(f[c_run]));
    r.epoch = static_cast<int>(csv::parse_int(f[c_epoch]));
    r.group = typology_field(f[c_group]);
    r.mean_mps = csv::parse_optional_real(f[c_mps]);
    r.mean_umps = csv::parse_real(f[c_umps]);
    r.n_clicks = static_cast<int>(csv::parse_int(f[c_clicks]));
    r.n_interactions = static_cast<int>(csv::parse_int(f[c_inter]));
    rows.push_back(r);
  }
  return rows;
}

void write_bootstrap_reference_csv(const std::filesystem::path& path, int run_id, const BootstrapReference& ref) {
  std::ostringstream out;
  out << "run_id,group,bootstrap_mps\n";
  for (Typology g : kTypologies) {
    auto it = ref.mps.find(g);
    out << run_id << ',' << typology_name(g) << ','
        << csv::real(it == ref.mps.end() ? std::nullopt : it->second) << '\n';
  }
  csv::write_file(path, out.str());
}

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "epoch,group,metric,mean,std\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << typology_name(r.group) << ',' << metric_name(r.metric) << ',' << csv::real(r.mean)
        << ',' << csv::real(r.std) << '\n';
  }
  csv::write_file(path, out.str());
}

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  const std::size_t c_epoch = table.column("epoch"), c_group = table.column("group"),
                    c_metric = table.column("metric"), c_mean = table.column("mean"), c_std = table.column("std");
  std::vector<AggregateRow> rows;
  for (const auto& f : table.rows) {
    AggregateRow r;
    r.epoch = static_cast<int>(csv::parse_int(f[c_epoch]));
    r.group = typology_field(f[c_group]);
    if (f[c_metric] == "mps") {
      r.metric = Metric::mps;
    } else if (f[c_metric] == "umps") {
      r.metric = Metric::umps;
    } else {
      throw std::runtime_error("unknown metric '" + f[c_metric] + "' in " + path.string());
    }
    r.mean = csv::parse_optional_real(f[c_mean]);
    r.std = csv::parse_optional_real(f[c_std]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fbsim
