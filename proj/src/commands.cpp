#include "fbsim/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fbsim/config.hpp"
#include "fbsim/csv.hpp"

namespace fbsim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Settings resolve_settings(const CommandOptions& opts) {
  Settings s = load_settings(opts.config, opts.preset);
  if (opts.threads) {
    if (*opts.threads < 1) throw ConfigError("--threads must be >= 1");
    s.experiment.threads = *opts.threads;
  }
  return s;
}

json base_manifest(const char* command, const Settings& s, const std::string& resolved) {
  json m;
  m["tool"] = "fbsim";
  m["version"] = kVersion;
  m["command"] = command;
  m["preset"] = s.preset;
  m["config_hash"] = content_hash(resolved);
  return m;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  csv::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string run_dir_name(int run_id) { return "run_" + std::to_string(run_id); }

}  // namespace

void cmd_generate(const CommandOptions& opts, std::ostream& log) {
  Settings s = resolve_settings(opts);
  if (opts.seed) {
    s.experiment.corpus_seed = *opts.seed;
    s.experiment.users_seed = *opts.seed;
  }
  const auto& e = s.experiment;
  const std::string resolved = resolved_text(s);
  if (opts.dry_run) {
    log << resolved << "\n# plan: generate " << e.corpus.n_articles << " articles (seed " << e.corpus_seed << ") and "
        << e.n_users() << " users (seed " << e.users_seed << ") into " << opts.out.string() << "\n";
    return;
  }
  Rng corpus_rng(e.corpus_seed);
  auto articles = generate_articles(e.corpus, corpus_rng);
  Rng users_rng(e.users_seed);
  auto users = generate_users(e.per_group_users, e.templates, users_rng);

  write_articles_csv(opts.out / "articles.csv", articles);
  write_users_csv(opts.out / "users.csv", users);
  csv::write_file(opts.out / "config.resolved.ini", resolved);
  json m = base_manifest("generate", s, resolved);
  m["corpus_seed"] = e.corpus_seed;
  m["users_seed"] = e.users_seed;
  m["files"] = {"articles.csv", "users.csv", "config.resolved.ini"};
  write_manifest(opts.out, m);
  log << "wrote " << articles.size() << " articles and " << users.size() << " users to " << opts.out.string()
      << "\n";
}

void cmd_run(const CommandOptions& opts, std::ostream& log) {
  Settings s = resolve_settings(opts);
  if (opts.seed) s.experiment.base_seed = *opts.seed;
  const auto& e = s.experiment;
  const std::string resolved = resolved_text(s);
  const fs::path runs_root = opts.out / "runs";

  if (opts.dry_run) {
    log << resolved << "\n# plan: " << e.repeats << " run(s), seeds " << e.base_seed << ".."
        << e.base_seed + static_cast<std::uint64_t>(e.repeats) - 1 << ", " << e.iterations << " iterations, "
        << e.epochs() << " epochs of " << e.retrain_every << ", " << e.threads << " thread(s)\n";
    for (int i = 0; i < e.repeats; ++i) log << "#   " << (runs_root / run_dir_name(i)).string() << "\n";
    log << "#   " << (opts.out / "aggregate.csv").string() << "\n";
    return;
  }

  // A stale aggregate must never survive a failed run.
  fs::remove(opts.out / "aggregate.csv");

  Population population = make_population(e);
  ModelSink sink;
  if (s.output.dump_models) {
    sink = [&runs_root](int run_id, int epoch, const MFModel& model) {
      write_model_csv(runs_root / run_dir_name(run_id) / ("model_epoch" + std::to_string(epoch) + ".csv"), model);
    };
  }
  log << "running " << e.repeats << " repeat(s) on " << e.threads << " thread(s)\n";
  RepeatResult result = run_repeats(e, population, sink);

  const std::string config_hash = content_hash(resolved);
  for (const auto& run : result.runs) {
    fs::path dir = runs_root / run_dir_name(run.run_id);
    if (s.output.write_interactions) write_interactions_csv(dir / "interactions.csv", run.log);
    write_metrics_csv(dir / "metrics_epoch.csv", run.metrics);
    write_bootstrap_reference_csv(dir / "bootstrap_reference.csv", run.run_id, run.bootstrap);
    write_users_csv(dir / "users_initial.csv", run.users_initial);
    write_users_csv(dir / "users_final.csv", run.users_final);
    json m = base_manifest("run", s, resolved);
    m["run_id"] = run.run_id;
    m["seed"] = run.seed;
    m["corpus_seed"] = e.corpus_seed;
    m["users_seed"] = e.users_seed;
    m["retrains"] = run.retrain_count;
    m["umps_law_checks"] = run.umps_law.checks;
    m["umps_law_violations"] = run.umps_law.violations;
    write_manifest(dir, m);
    for (const auto& w : run.bootstrap.warnings) log << "warning: run " << run.run_id << ": " << w << "\n";
  }
  csv::write_file(opts.out / "config.resolved.ini", resolved);
  // Aggregate what was written, so `aggregate` over these run directories
  // reproduces the file exactly.
  std::vector<std::vector<EpochGroupRow>> written;
  for (const auto& run : result.runs) {
    written.push_back(read_metrics_csv(runs_root / run_dir_name(run.run_id) / "metrics_epoch.csv"));
  }
  write_aggregate_csv(opts.out / "aggregate.csv", aggregate_runs(written));

  json m = base_manifest("run", s, resolved);
  m["base_seed"] = e.base_seed;
  m["repeats"] = e.repeats;
  json seeds = json::array();
  for (const auto& run : result.runs) seeds.push_back(run.seed);
  m["seeds"] = seeds;
  m["corpus_seed"] = e.corpus_seed;
  m["users_seed"] = e.users_seed;
  write_manifest(opts.out, m);
  log << "wrote " << result.runs.size() << " run(s) and " << (opts.out / "aggregate.csv").string() << "\n";
}

void cmd_aggregate(const CommandOptions& opts, std::ostream& log) {
  if (opts.inputs.empty()) throw std::invalid_argument("aggregate needs at least one run directory");
  std::vector<fs::path> run_dirs;
  for (const auto& in : opts.inputs) {
    if (fs::exists(in / "metrics_epoch.csv")) {
      run_dirs.push_back(in);
    } else if (fs::is_directory(in / "runs")) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in / "runs")) {
        if (fs::exists(entry.path() / "metrics_epoch.csv")) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      run_dirs.insert(run_dirs.end(), found.begin(), found.end());
    } else {
      throw std::invalid_argument(in.string() + " is neither a run directory nor a run output root");
    }
  }
  if (opts.dry_run) {
    log << "# plan: aggregate " << run_dirs.size() << " run(s) into " << (opts.out / "aggregate.csv").string() << "\n";
    for (const auto& d : run_dirs) log << "#   " << d.string() << "\n";
    return;
  }
  std::vector<std::vector<EpochGroupRow>> series;
  for (const auto& d : run_dirs) series.push_back(read_metrics_csv(d / "metrics_epoch.csv"));
  auto rows = aggregate_runs(series);
  write_aggregate_csv(opts.out / "aggregate.csv", rows);

  json m;
  m["tool"] = "fbsim";
  m["version"] = kVersion;
  m["command"] = "aggregate";
  json inputs = json::array();
  std::string joined;
  for (const auto& d : run_dirs) {
    inputs.push_back(d.string());
    joined += csv::read_file(d / "metrics_epoch.csv");
  }
  m["inputs"] = inputs;
  m["input_hash"] = content_hash(joined);
  write_manifest(opts.out, m);
  log << "aggregated " << run_dirs.size() << " run(s) into " << (opts.out / "aggregate.csv").string() << "\n";
}

namespace {

using Cell = std::pair<std::optional<double>, std::optional<double>>;  // mean, std
using Series = std::map<std::pair<int, Typology>, Cell>;

struct LoadedAggregate {
  Series mps;
  Series umps;
  std::set<int> epochs;
};

LoadedAggregate load_aggregate(const fs::path& in) {
  fs::path file = fs::is_directory(in) ? in / "aggregate.csv" : in;
  LoadedAggregate agg;
  for (const auto& r : read_aggregate_csv(file)) {
    auto& target = r.metric == Metric::mps ? agg.mps : agg.umps;
    target[{r.epoch, r.group}] = {r.mean, r.std};
    agg.epochs.insert(r.epoch);
  }
  return agg;
}

Cell lookup(const Series& s, int epoch, Typology g) {
  auto it = s.find({epoch, g});
  return it == s.end() ? Cell{} : it->second;
}

}  // namespace

void cmd_report(const CommandOptions& opts, std::ostream& log) {
  if (opts.inputs.empty() || opts.inputs.size() > 2) {
    throw std::invalid_argument("report takes one aggregate, or a baseline and a calibrated aggregate");
  }
  if (opts.dry_run) {
    log << "# plan: report from " << opts.inputs.size() << " aggregate(s) into " << opts.out.string() << "\n";
    return;
  }
  std::vector<LoadedAggregate> aggs;
  for (const auto& in : opts.inputs) aggs.push_back(load_aggregate(in));
  if (aggs.size() == 2 && aggs[0].epochs != aggs[1].epochs) {
    throw std::invalid_argument("aggregates cover different epoch ranges");
  }
  const auto& base = aggs[0];

  std::ostringstream mps;
  mps << "epoch";
  for (Typology g : kTypologies) mps << ',' << typology_name(g) << "_mean," << typology_name(g) << "_std";
  for (Typology g : kTypologies) mps << ',' << typology_name(g) << "_bootstrap";
  mps << '\n';
  for (int epoch : base.epochs) {
    if (epoch == 0) continue;
    mps << epoch;
    for (Typology g : kTypologies) {
      auto [m, sd] = lookup(base.mps, epoch, g);
      mps << ',' << csv::real(m) << ',' << csv::real(sd);
    }
    for (Typology g : kTypologies) mps << ',' << csv::real(lookup(base.mps, 0, g).first);
    mps << '\n';
  }
  csv::write_file(opts.out / "fig_mps.csv", mps.str());

  std::ostringstream umps_out;
  umps_out << "epoch";
  for (Typology g : kTypologies) umps_out << ',' << typology_name(g) << "_mean," << typology_name(g) << "_std";
  umps_out << '\n';
  for (int epoch : base.epochs) {
    umps_out << epoch;
    for (Typology g : kTypologies) {
      auto [m, sd] = lookup(base.umps, epoch, g);
      umps_out << ',' << csv::real(m) << ',' << csv::real(sd);
    }
    umps_out << '\n';
  }
  csv::write_file(opts.out / "fig_umps.csv", umps_out.str());

  if (aggs.size() == 2) {
    const auto& cal = aggs[1];
    std::ostringstream out;
    out << "epoch";
    for (Typology g : kTypologies) {
      auto n = typology_name(g);
      out << ',' << n << "_baseline_mean," << n << "_baseline_std," << n << "_calibrated_mean," << n
          << "_calibrated_std," << n << "_bootstrap";
    }
    out << '\n';
    for (int epoch : base.epochs) {
      if (epoch == 0) continue;
      out << epoch;
      for (Typology g : kTypologies) {
        auto [bm, bs] = lookup(base.mps, epoch, g);
        auto [cm, cs] = lookup(cal.mps, epoch, g);
        out << ',' << csv::real(bm) << ',' << csv::real(bs) << ',' << csv::real(cm) << ',' << csv::real(cs) << ','
            << csv::real(lookup(base.mps, 0, g).first);
      }
      out << '\n';
    }
    csv::write_file(opts.out / "fig_calibration.csv", out.str());
  }
  log << "wrote report tables to " << opts.out.string() << "\n";
}

}  // namespace fbsim
