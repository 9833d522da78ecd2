#include "fbsim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace fbsim {

namespace {

enum Stream : std::uint64_t { kBootstrapStream = 1, kIterationStream = 2, kTrainStream = 3 };

int epoch_of(int iteration, int retrain_every) { return (iteration - 1) / retrain_every + 1; }

void retrain(RunState& state, const ExperimentConfig& config, int epoch) {
  Rng rng(derive_seed(state.seed, kTrainStream, static_cast<std::uint64_t>(epoch)));
  const MFModel* previous = state.bootstrapped ? &state.model : nullptr;
  state.model = train_mf(state.log, static_cast<int>(state.users.size()),
                         static_cast<int>(state.articles->size()), config.mf, rng, previous);
  if (state.on_model) state.on_model(epoch, state.model);
}

}  // namespace

void ExperimentConfig::validate() const {
  corpus.validate();
  if (per_group_users <= 0) throw std::invalid_argument("users.per_group must be positive");
  for (const auto& [t, tmpl] : templates) tmpl.validate();
  for (Typology t : kTypologies) {
    if (!templates.count(t)) {
      throw std::invalid_argument("missing template for typology " + std::string(typology_name(t)));
    }
  }
  if (iterations < 0) throw std::invalid_argument("simulation.iterations must be nonnegative");
  if (retrain_every <= 0) throw std::invalid_argument("simulation.retrain_every must be positive");
  if (iterations % retrain_every != 0) {
    throw std::invalid_argument("simulation.iterations (" + std::to_string(iterations) +
                                ") must be divisible by simulation.retrain_every (" +
                                std::to_string(retrain_every) + ")");
  }
  if (rec_k < 1) throw std::invalid_argument("simulation.rec_k must be >= 1");
  if (bootstrap_per_topic < 0) throw std::invalid_argument("simulation.bootstrap_per_topic must be nonnegative");
  if (repeats < 1) throw std::invalid_argument("simulation.repeats must be >= 1");
  if (threads < 1) throw std::invalid_argument("simulation.threads must be >= 1");
  drift.validate();
  click.validate();
  mf.validate();
  calibration.validate(rec_k);

  // Each user may see its bootstrap lists plus rec_k per expected visit;
  // require three times that headroom in the catalog.
  double expected_visits = static_cast<double>(iterations) / n_users();
  double needed = kNumTopics * bootstrap_per_topic + rec_k * std::ceil(expected_visits) * 3.0;
  if (corpus.n_articles < needed) {
    throw std::invalid_argument("corpus.n_articles (" + std::to_string(corpus.n_articles) +
                                ") too small: need at least " + std::to_string(static_cast<long long>(needed)) +
                                " to avoid candidate exhaustion");
  }
}

Population make_population(const ExperimentConfig& config) {
  Population pop;
  if (config.articles_file) {
    pop.articles = std::make_shared<const std::vector<ArticleUtility>>(read_articles_csv(*config.articles_file));
  } else {
    Rng rng(config.corpus_seed);
    pop.articles = std::make_shared<const std::vector<ArticleUtility>>(generate_articles(config.corpus, rng));
  }
  if (config.users_file) {
    pop.users = read_users_csv(*config.users_file);
  } else {
    Rng rng(config.users_seed);
    pop.users = generate_users(config.per_group_users, config.templates, rng);
  }
  for (const auto& u : pop.users) {
    if (u.exposed.size() != 0) throw std::invalid_argument("population users must start unexposed");
  }
  return pop;
}

RunState make_state(const Population& population, int run_id, std::uint64_t seed) {
  RunState state;
  state.run_id = run_id;
  state.seed = seed;
  state.articles = population.articles;
  state.users = population.users;
  return state;
}

void bootstrap(RunState& state, const ExperimentConfig& config, Rng& rng) {
  if (state.bootstrapped || !state.log.empty()) throw std::logic_error("bootstrap requires a fresh state");
  const auto& articles = *state.articles;
  const ImpressionContext ctx{state.run_id, 0, 0, Phase::bootstrap};
  for (auto& user : state.users) {
    auto ids = random_exposures_per_topic(articles, config.bootstrap_per_topic, rng);
    int position = 0;
    for (int id : ids) {
      state.log.push_back(
          simulate_impression(user, articles[static_cast<std::size_t>(id)], ++position, config.click, ctx, rng));
    }
  }

  retrain(state, config, 0);
  state.bootstrapped = true;

  // Frozen calibration targets.
  std::vector<std::vector<Stance>> clicked_by_user(state.users.size());
  std::map<Typology, std::vector<Stance>> clicked_by_group;
  for (const auto& r : state.log) {
    if (!r.clicked) continue;
    Stance s = articles[static_cast<std::size_t>(r.article_id)].stance;
    clicked_by_user[static_cast<std::size_t>(r.user_id)].push_back(s);
    clicked_by_group[state.users[static_cast<std::size_t>(r.user_id)].typology].push_back(s);
  }
  const double smoothing = config.calibration.target_smoothing;
  state.targets.clear();
  for (const auto& user : state.users) {
    const auto& clicks = config.calibration.target_scope == TargetScope::per_user
                             ? clicked_by_user[static_cast<std::size_t>(user.user_id)]
                             : clicked_by_group[user.typology];
    state.targets.push_back(clicks.empty() && smoothing == 0.0 ? stance_distribution({}, 1.0)
                                                               : stance_distribution(clicks, smoothing));
  }

  state.bootstrap = bootstrap_reference(state.log, state.users, articles);

  // Epoch 0 rows summarize the bootstrap phase.
  for (Typology g : kTypologies) {
    EpochGroupRow row;
    row.run_id = state.run_id;
    row.epoch = 0;
    row.group = g;
    row.mean_mps = state.bootstrap.mps[g];
    row.n_clicks = state.bootstrap.clicks[g];
    double umps_sum = 0.0;
    int members = 0;
    for (const auto& u : state.users) {
      if (u.typology != g) continue;
      umps_sum += umps(u.preference);
      ++members;
    }
    row.mean_umps = members ? umps_sum / members : 0.0;
    for (const auto& r : state.log) {
      if (state.users[static_cast<std::size_t>(r.user_id)].typology == g) ++row.n_interactions;
    }
    state.metrics.push_back(row);
  }
}

void run_iteration(RunState& state, const ExperimentConfig& config, Rng& rng) {
  if (!state.bootstrapped) throw std::logic_error("run_iteration before bootstrap");
  if (state.iteration >= config.iterations) throw std::logic_error("iteration budget exhausted");
  const auto& articles = *state.articles;
  const int t = ++state.iteration;
  const int epoch = epoch_of(t, config.retrain_every);
  if (static_cast<int>(state.training_rows.size()) < epoch) state.training_rows.push_back(state.model.trained_rows);

  std::uniform_int_distribution<int> pick_user(0, static_cast<int>(state.users.size()) - 1);
  UserProfile& user = state.users[static_cast<std::size_t>(pick_user(rng))];

  std::vector<int> list;
  if (config.calibration.enabled) {
    auto pool = top_candidates(state.model, user, config.calibration.candidate_pool);
    if (static_cast<int>(pool.size()) < config.rec_k) {
      throw ExhaustionError("user " + std::to_string(user.user_id) + " has only " + std::to_string(pool.size()) +
                            " unexposed articles left, need " + std::to_string(config.rec_k));
    }
    std::vector<Candidate> candidates;
    candidates.reserve(pool.size());
    for (const auto& c : pool) {
      candidates.push_back({c.article_id, articles[static_cast<std::size_t>(c.article_id)].stance, c.score});
    }
    list = calibrated_rerank(candidates, state.targets[static_cast<std::size_t>(user.user_id)], config.calibration,
                             config.rec_k);
  } else {
    list = recommend_topk(state.model, user, articles, config.rec_k);
  }

  const ImpressionContext ctx{state.run_id, t, epoch, Phase::live};
  const double c = config.drift.influence;
  std::vector<Stance> stances;
  std::vector<int> clicks;
  int position = 0;
  for (int id : list) {
    const ArticleUtility& article = articles[static_cast<std::size_t>(id)];
    auto record = simulate_impression(user, article, ++position, config.click, ctx, rng);
    state.log.push_back(record);
    stances.push_back(article.stance);
    clicks.push_back(record.clicked ? 1 : 0);
    if (!record.clicked) continue;

    double before = umps(user.preference);
    user.preference = apply_drift(user.preference, article, c);
    if (config.drift.renormalize) {
      renormalize_rows(user.preference, article);
    } else {
      double err = std::abs(umps(user.preference) - before - c * article.stance.value() * article.n_topics());
      ++state.umps_law.checks;
      state.umps_law.max_error = std::max(state.umps_law.max_error, err);
      if (!(err <= 1e-9)) ++state.umps_law.violations;
    }
  }

  IterationRecord it;
  it.iteration = t;
  it.epoch = epoch;
  it.user_id = user.user_id;
  it.group = user.typology;
  it.mps = iteration_mps(stances, clicks);
  it.n_clicks = static_cast<int>(std::count(clicks.begin(), clicks.end(), 1));
  state.iterations.push_back(it);

  if (t % config.retrain_every == 0) {
    auto first = std::find_if(state.iterations.begin(), state.iterations.end(),
                              [epoch](const IterationRecord& r) { return r.epoch == epoch; });
    std::span<const IterationRecord> window(&*first, static_cast<std::size_t>(state.iterations.end() - first));
    auto rows = epoch_group_aggregate(window, state.users, epoch, state.run_id);
    state.metrics.insert(state.metrics.end(), rows.begin(), rows.end());
    retrain(state, config, epoch);
    ++state.retrain_count;
  }
}

RunResult run_experiment(const ExperimentConfig& config, const Population& population, std::uint64_t seed,
                         int run_id, std::function<void(int, const MFModel&)> on_model) {
  RunState state = make_state(population, run_id, seed);
  state.on_model = std::move(on_model);
  try {
    Rng boot_rng(derive_seed(seed, kBootstrapStream));
    bootstrap(state, config, boot_rng);
    Rng rng(derive_seed(seed, kIterationStream));
    while (state.iteration < config.iterations) run_iteration(state, config, rng);
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(seed, state.iteration, e.what());
  }

  RunResult result;
  result.run_id = run_id;
  result.seed = seed;
  result.metrics = std::move(state.metrics);
  result.bootstrap = std::move(state.bootstrap);
  result.log = std::move(state.log);
  result.users_initial = population.users;
  result.users_final = std::move(state.users);
  result.retrain_count = state.retrain_count;
  result.training_rows = std::move(state.training_rows);
  result.umps_law = state.umps_law;
  return result;
}

RepeatResult run_repeats(const ExperimentConfig& config, const Population& population,
                         const ModelSink& model_sink) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.repeats);
  std::vector<std::optional<RunResult>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        std::function<void(int, const MFModel&)> on_model;
        if (model_sink) {
          on_model = [&model_sink, i](int epoch, const MFModel& m) { model_sink(static_cast<int>(i), epoch, m); };
        }
        slots[i] = run_experiment(config, population, config.base_seed + i, static_cast<int>(i), on_model);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const RunError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(config.base_seed + i, 0, e.what());
    }
  }

  RepeatResult out;
  std::vector<std::vector<EpochGroupRow>> series;
  for (auto& slot : slots) {
    series.push_back(slot->metrics);
    out.runs.push_back(std::move(*slot));
  }
  out.aggregate = aggregate_runs(series);
  return out;
}

}  // namespace fbsim
