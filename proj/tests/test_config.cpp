#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fbsim/config.hpp"

using namespace fbsim;
namespace fs = std::filesystem;

namespace {

int error_line(std::string_view text) {
  try {
    parse_settings(text, "exp.ini", preset_settings("desk"));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

fs::path scratch_dir(const char* name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, std::string_view text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("presets") {
  auto desk = preset_settings("desk").experiment;
  CHECK(desk.corpus.n_articles == 2000);
  CHECK(desk.n_users() == 50);
  CHECK(desk.iterations == 4000);
  CHECK(desk.epochs() == 40);
  CHECK(desk.repeats == 10);
  CHECK_NOTHROW(desk.validate());

  auto paper = preset_settings("paper").experiment;
  CHECK(paper.corpus.n_articles == 40000);
  CHECK(paper.n_users() == 500);
  CHECK(paper.iterations == 40000);
  CHECK(paper.epochs() == 200);
  CHECK(paper.rec_k == 5);
  CHECK(paper.bootstrap_per_topic == 10);
  CHECK_NOTHROW(paper.validate());

  CHECK_THROWS_AS(preset_settings("laptop"), ConfigError);
}

TEST_CASE("parse_settings applies every section") {
  auto s = parse_settings(R"(
# comment line
[corpus]
n_articles = 3000   ; trailing comment
multi_topic_prob = 0.5
[users]
per_group = 4
weights.bystander = 0.1, 0.2, 0.4, 0.2, 0.1
concentration.bystander = 20
[click]
steepness = 12
midpoint = 0.25
[drift]
influence = 0.03
[mf]
latent_dim = 8
warm_start = true
[simulation]
iterations = 1000
retrain_every = 50
repeats = 3
base_seed = 7
threads = 2
[intervention]
enabled = true
lambda = 0.5
pool = 20
target = group
[output]
write_interactions = false
dump_models = true
)",
                          "exp.ini", preset_settings("desk"));
  const auto& e = s.experiment;
  CHECK(e.corpus.n_articles == 3000);
  CHECK(e.corpus.multi_topic_prob == 0.5);
  CHECK(e.per_group_users == 4);
  CHECK(e.templates.at(Typology::bystander).base_weights == std::array<double, 5>{0.1, 0.2, 0.4, 0.2, 0.1});
  CHECK(e.templates.at(Typology::bystander).concentration == 20.0);
  CHECK(e.click.steepness == 12.0);
  CHECK(e.click.midpoint == 0.25);
  CHECK(e.drift.influence == 0.03);
  CHECK(e.mf.latent_dim == 8);
  CHECK(e.mf.warm_start);
  CHECK(e.iterations == 1000);
  CHECK(e.retrain_every == 50);
  CHECK(e.repeats == 3);
  CHECK(e.base_seed == 7);
  CHECK(e.threads == 2);
  CHECK(e.calibration.enabled);
  CHECK(e.calibration.lambda == 0.5);
  CHECK(e.calibration.candidate_pool == 20);
  CHECK(e.calibration.target_scope == TargetScope::per_group);
  CHECK_FALSE(s.output.write_interactions);
  CHECK(s.output.dump_models);
  // untouched keys keep the preset value
  CHECK(e.rec_k == 5);
  CHECK(e.mf.learning_rate == 0.05);
}

TEST_CASE("config errors point at the offending line") {
  CHECK(error_line("[simulation]\niterations = 10\n\nbogus = 1\n") == 4);
  CHECK(error_line("[nowhere]\nx = 1\n") == 2);
  CHECK(error_line("n_articles = 5\n") == 1);
  CHECK(error_line("[corpus]\nn_articles\n") == 2);
  CHECK(error_line("[corpus\n") == 1);
  CHECK(error_line("[drift]\n\n\ninfluence = -1\n") == 4);
  CHECK(error_line("[mf]\nlatent_dim = 2.5\n") == 2);
  CHECK(error_line("[intervention]\nalpha = 1\n") == 2);
  CHECK(error_line("[intervention]\ntarget = everyone\n") == 2);
  CHECK(error_line("[output]\ndump_models = maybe\n") == 2);
  CHECK(error_line("[users]\nweights.bystander = 1, 2\n") == 2);

  try {
    parse_settings("[mf]\nlearning_rate = fast\n", "exp.ini", preset_settings("desk"));
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("exp.ini:2: ", 0) == 0);
  }
}

TEST_CASE("load_settings validates the combined result") {
  auto dir = scratch_dir("fbsim_test_config");
  write(dir / "bad_div.ini", "[simulation]\niterations = 4050\n");
  CHECK_THROWS_AS(load_settings(dir / "bad_div.ini", "desk"), ConfigError);
  write(dir / "tiny.ini", "[corpus]\nn_articles = 500\n");
  CHECK_THROWS_AS(load_settings(dir / "tiny.ini", "desk"), ConfigError);  // exhaustion pre-check
  write(dir / "bad_pool.ini", "[intervention]\npool = 3\n");
  CHECK_THROWS_AS(load_settings(dir / "bad_pool.ini", "desk"), ConfigError);
  CHECK_THROWS_AS(load_settings(dir / "missing.ini", "desk"), ConfigError);

  write(dir / "ok.ini", "[drift]\ninfluence = 0.03\n");
  auto s = load_settings(dir / "ok.ini", "paper");
  CHECK(s.preset == "paper");
  CHECK(s.experiment.drift.influence == 0.03);
  CHECK(s.experiment.corpus.n_articles == 40000);
  fs::remove_all(dir);
}

TEST_CASE("relative file paths resolve against the config directory") {
  auto dir = scratch_dir("fbsim_test_config_paths");
  write(dir / "templates.ini", "[solid_liberal]\nweights = 0.6, 0.2, 0.1, 0.05, 0.05\nkappa = 10\n");
  write(dir / "exp.ini", "[users]\ntemplates_file = templates.ini\n[corpus]\narticles_file = data/articles.csv\n");
  auto s = load_settings(dir / "exp.ini", "desk");
  CHECK(s.experiment.templates.at(Typology::solid_liberal).base_weights[0] == 0.6);
  CHECK(s.experiment.templates.at(Typology::solid_liberal).concentration == 10.0);
  CHECK(s.experiment.templates.at(Typology::core_conservative).base_weights[4] == 0.45);
  REQUIRE(s.experiment.articles_file.has_value());
  CHECK(*s.experiment.articles_file == dir / "data" / "articles.csv");
  fs::remove_all(dir);
}

TEST_CASE("parse_templates") {
  auto t = parse_templates("[bystander]\nweights = 0.2, 0.2, 0.2, 0.2, 0.2\n", "t.ini", default_templates());
  CHECK(t.at(Typology::bystander).base_weights[2] == 0.2);
  CHECK_THROWS_AS(parse_templates("[hermit]\nweights = 0.2,0.2,0.2,0.2,0.2\n", "t.ini", default_templates()),
                  ConfigError);
  CHECK_THROWS_AS(parse_templates("[bystander]\nweights = 0.5,0.5,0.5,0,0\n", "t.ini", default_templates()),
                  ConfigError);
  CHECK_THROWS_AS(parse_templates("[bystander]\ncolor = red\n", "t.ini", default_templates()), ConfigError);
}

TEST_CASE("resolved_text is canonical and re-parses to itself") {
  auto s = parse_settings("[drift]\ninfluence = 0.03\n[intervention]\nenabled = true\nlambda = 0.7\n", "x.ini",
                          preset_settings("desk"));
  auto text = resolved_text(s);
  CHECK(text.find("[users]") == text.rfind("[users]"));
  CHECK(text.find("influence = 0.029999999999999999") != std::string::npos);
  auto again = parse_settings(text, "resolved", preset_settings("desk"));
  CHECK(resolved_text(again) == text);
  CHECK(resolved_text(preset_settings("desk")) != resolved_text(preset_settings("paper")));
}

TEST_CASE("content_hash") {
  // FNV-1a 64 reference values
  CHECK(content_hash("") == "cbf29ce484222325");
  CHECK(content_hash("a") == "af63dc4c8601ec8c");
  CHECK(content_hash("foobar") == "85944171f73967e8");
}
