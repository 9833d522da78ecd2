#include "fbsim/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include "fbsim/csv.hpp"

namespace fbsim {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct IniEntry {
  int line = 0;
  std::string section;
  std::string key;
  std::string value;
};

std::vector<IniEntry> parse_ini(std::string_view text, const std::string& source) {
  std::vector<IniEntry> entries;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    std::string_view raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    auto hash = raw.find_first_of("#;");
    std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(source, line_no, "empty section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value', got '" + line + "'");
    IniEntry entry{line_no, section, trim(std::string_view(line).substr(0, eq)),
                   trim(std::string_view(line).substr(eq + 1))};
    if (entry.key.empty()) throw ConfigError(source, line_no, "missing key before '='");
    if (section.empty()) throw ConfigError(source, line_no, "key '" + entry.key + "' outside any section");
    entries.push_back(std::move(entry));
  }
  return entries;
}

long long to_int(const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& v) {
  try {
    return csv::parse_real(v);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("expected a real number, got '" + v + "'");
  }
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

int positive_int(const std::string& v) {
  auto x = to_int(v);
  if (x <= 0 || x > 2'000'000'000) throw std::invalid_argument("must be a positive integer");
  return static_cast<int>(x);
}

int nonneg_int(const std::string& v) {
  auto x = to_int(v);
  if (x < 0 || x > 2'000'000'000) throw std::invalid_argument("must be a nonnegative integer");
  return static_cast<int>(x);
}

double positive_real(const std::string& v) {
  double x = to_real(v);
  if (!(x > 0.0)) throw std::invalid_argument("must be positive");
  return x;
}

double nonneg_real(const std::string& v) {
  double x = to_real(v);
  if (!(x >= 0.0)) throw std::invalid_argument("must be nonnegative");
  return x;
}

double unit_real(const std::string& v) {
  double x = to_real(v);
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("must lie in [0,1]");
  return x;
}

std::array<double, kNumStances> to_weights(const std::string& v) {
  auto parts = csv::split(v, ',');
  if (parts.size() != kNumStances) throw std::invalid_argument("expected 5 comma-separated weights");
  std::array<double, kNumStances> w{};
  for (std::size_t i = 0; i < parts.size(); ++i) w[i] = nonneg_real(trim(parts[i]));
  return w;
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_weights(const std::array<double, kNumStances>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ", ";
    out += fmt_real(w[i]);
  }
  return out;
}

fs::path resolve(const fs::path& base_dir, const std::string& v) {
  fs::path p(v);
  return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(Settings&, const std::string&, const fs::path&)> set;
  std::function<std::string(const Settings&)> get;
};

#define FB_KEY(sec, key, setter, getter)                                                          \
  Key {                                                                                            \
    sec, key, [](Settings& s, const std::string& v, const fs::path& dir) { (void)dir; setter; }, \
        [](const Settings& s) -> std::string { (void)s; return getter; }                                  \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k = {
        FB_KEY("corpus", "n_articles", s.experiment.corpus.n_articles = positive_int(v),
               std::to_string(s.experiment.corpus.n_articles)),
        FB_KEY("corpus", "multi_topic_prob", s.experiment.corpus.multi_topic_prob = unit_real(v),
               fmt_real(s.experiment.corpus.multi_topic_prob)),
        FB_KEY("corpus", "max_topics_per_article", s.experiment.corpus.max_topics_per_article = positive_int(v),
               std::to_string(s.experiment.corpus.max_topics_per_article)),
        FB_KEY("corpus", "seed", s.experiment.corpus_seed = to_u64(v), std::to_string(s.experiment.corpus_seed)),
        FB_KEY("corpus", "articles_file",
               s.experiment.articles_file = v.empty() ? std::nullopt : std::optional<fs::path>(resolve(dir, v)),
               s.experiment.articles_file ? s.experiment.articles_file->string() : std::string()),

        FB_KEY("users", "per_group", s.experiment.per_group_users = positive_int(v),
               std::to_string(s.experiment.per_group_users)),
        FB_KEY("users", "seed", s.experiment.users_seed = to_u64(v), std::to_string(s.experiment.users_seed)),
        FB_KEY("users", "users_file",
               s.experiment.users_file = v.empty() ? std::nullopt : std::optional<fs::path>(resolve(dir, v)),
               s.experiment.users_file ? s.experiment.users_file->string() : std::string()),
        FB_KEY("users", "templates_file",
               s.experiment.templates = load_templates(resolve(dir, v), s.experiment.templates),
               std::string()),

        FB_KEY("click", "steepness", s.experiment.click.steepness = positive_real(v),
               fmt_real(s.experiment.click.steepness)),
        FB_KEY("click", "midpoint", s.experiment.click.midpoint = unit_real(v), fmt_real(s.experiment.click.midpoint)),

        FB_KEY("drift", "influence", s.experiment.drift.influence = nonneg_real(v),
               fmt_real(s.experiment.drift.influence)),
        FB_KEY("drift", "renormalize", s.experiment.drift.renormalize = to_bool(v),
               fmt_bool(s.experiment.drift.renormalize)),

        FB_KEY("mf", "latent_dim", s.experiment.mf.latent_dim = positive_int(v),
               std::to_string(s.experiment.mf.latent_dim)),
        FB_KEY("mf", "learning_rate", s.experiment.mf.learning_rate = positive_real(v),
               fmt_real(s.experiment.mf.learning_rate)),
        FB_KEY("mf", "l2_reg", s.experiment.mf.l2_reg = nonneg_real(v), fmt_real(s.experiment.mf.l2_reg)),
        FB_KEY("mf", "sgd_epochs", s.experiment.mf.sgd_epochs = positive_int(v),
               std::to_string(s.experiment.mf.sgd_epochs)),
        FB_KEY("mf", "init_scale", s.experiment.mf.init_scale = positive_real(v),
               fmt_real(s.experiment.mf.init_scale)),
        FB_KEY("mf", "warm_start", s.experiment.mf.warm_start = to_bool(v), fmt_bool(s.experiment.mf.warm_start)),

        FB_KEY("simulation", "iterations", s.experiment.iterations = nonneg_int(v),
               std::to_string(s.experiment.iterations)),
        FB_KEY("simulation", "retrain_every", s.experiment.retrain_every = positive_int(v),
               std::to_string(s.experiment.retrain_every)),
        FB_KEY("simulation", "rec_k", s.experiment.rec_k = positive_int(v), std::to_string(s.experiment.rec_k)),
        FB_KEY("simulation", "bootstrap_per_topic", s.experiment.bootstrap_per_topic = positive_int(v),
               std::to_string(s.experiment.bootstrap_per_topic)),
        FB_KEY("simulation", "repeats", s.experiment.repeats = positive_int(v), std::to_string(s.experiment.repeats)),
        FB_KEY("simulation", "base_seed", s.experiment.base_seed = to_u64(v), std::to_string(s.experiment.base_seed)),
        FB_KEY("simulation", "threads", s.experiment.threads = positive_int(v), std::to_string(s.experiment.threads)),

        FB_KEY("intervention", "enabled", s.experiment.calibration.enabled = to_bool(v),
               fmt_bool(s.experiment.calibration.enabled)),
        FB_KEY("intervention", "lambda", s.experiment.calibration.lambda = unit_real(v),
               fmt_real(s.experiment.calibration.lambda)),
        FB_KEY("intervention", "alpha", {
          double a = to_real(v);
          if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("must lie in (0,1)");
          s.experiment.calibration.alpha = a;
        }, fmt_real(s.experiment.calibration.alpha)),
        FB_KEY("intervention", "pool", s.experiment.calibration.candidate_pool = positive_int(v),
               std::to_string(s.experiment.calibration.candidate_pool)),
        FB_KEY("intervention", "smoothing", s.experiment.calibration.target_smoothing = nonneg_real(v),
               fmt_real(s.experiment.calibration.target_smoothing)),
        FB_KEY("intervention", "target", {
          if (v == "user") {
            s.experiment.calibration.target_scope = TargetScope::per_user;
          } else if (v == "group") {
            s.experiment.calibration.target_scope = TargetScope::per_group;
          } else {
            throw std::invalid_argument("expected 'user' or 'group'");
          }
        }, s.experiment.calibration.target_scope == TargetScope::per_user ? "user" : "group"),

        FB_KEY("output", "write_interactions", s.output.write_interactions = to_bool(v),
               fmt_bool(s.output.write_interactions)),
        FB_KEY("output", "dump_models", s.output.dump_models = to_bool(v), fmt_bool(s.output.dump_models)),
    };
    for (Typology t : kTypologies) {
      std::string name(typology_name(t));
      k.push_back(Key{"users", "weights." + name,
                      [t](Settings& s, const std::string& v, const fs::path&) {
                        s.experiment.templates[t].typology = t;
                        s.experiment.templates[t].base_weights = to_weights(v);
                      },
                      [t](const Settings& s) { return fmt_weights(s.experiment.templates.at(t).base_weights); }});
      k.push_back(Key{"users", "concentration." + name,
                      [t](Settings& s, const std::string& v, const fs::path&) {
                        s.experiment.templates[t].typology = t;
                        s.experiment.templates[t].concentration = positive_real(v);
                      },
                      [t](const Settings& s) { return fmt_real(s.experiment.templates.at(t).concentration); }});
    }
    return k;
  }();
  return keys;
}

#undef FB_KEY

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : key_table()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  for (const auto& k : key_table()) {
    if (k.section == section) return true;
  }
  return false;
}

}  // namespace

Settings preset_settings(std::string_view name) {
  Settings s;
  s.preset = std::string(name);
  auto& e = s.experiment;
  if (name == "desk") {
    e.corpus.n_articles = 2000;
    e.per_group_users = 10;
    e.iterations = 4000;
    e.retrain_every = 100;
  } else if (name == "paper") {
    e.corpus.n_articles = 40000;
    e.per_group_users = 100;
    e.iterations = 40000;
    e.retrain_every = 200;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected 'desk' or 'paper')");
  }
  e.repeats = 10;
  return s;
}

Settings parse_settings(std::string_view text, const std::string& source, Settings base, const fs::path& base_dir) {
  for (const auto& entry : parse_ini(text, source)) {
    if (!known_section(entry.section)) {
      throw ConfigError(source, entry.line, "unknown section [" + entry.section + "]");
    }
    const Key* key = find_key(entry.section, entry.key);
    if (!key) throw ConfigError(source, entry.line, "unknown key '" + entry.key + "' in [" + entry.section + "]");
    try {
      key->set(base, entry.value, base_dir);
    } catch (const std::exception& e) {
      throw ConfigError(source, entry.line, entry.section + "." + entry.key + ": " + e.what());
    }
  }
  return base;
}

Settings load_settings(const std::optional<fs::path>& config_path, std::string_view preset) {
  Settings s = preset_settings(preset);
  std::string source = "<preset " + std::string(preset) + ">";
  if (config_path) {
    source = config_path->string();
    std::string text;
    try {
      text = csv::read_file(*config_path);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    s = parse_settings(text, source, std::move(s), config_path->parent_path());
  }
  try {
    s.experiment.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return s;
}

TemplateMap parse_templates(std::string_view text, const std::string& source, TemplateMap base) {
  for (const auto& entry : parse_ini(text, source)) {
    auto t = parse_typology(entry.section);
    if (!t) throw ConfigError(source, entry.line, "unknown typology [" + entry.section + "]");
    auto& tmpl = base[*t];
    tmpl.typology = *t;
    try {
      if (entry.key == "weights") {
        tmpl.base_weights = to_weights(entry.value);
      } else if (entry.key == "concentration" || entry.key == "kappa") {
        tmpl.concentration = positive_real(entry.value);
      } else {
        throw std::invalid_argument("unknown key '" + entry.key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(source, entry.line, entry.section + ": " + e.what());
    }
  }
  for (const auto& [t, tmpl] : base) {
    try {
      tmpl.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source + ": " + e.what());
    }
  }
  return base;
}

TemplateMap load_templates(const fs::path& path, TemplateMap base) {
  return parse_templates(csv::read_file(path), path.string(), std::move(base));
}

std::string resolved_text(const Settings& settings) {
  std::ostringstream out;
  out << "# preset: " << settings.preset << '\n';
  static constexpr std::array<std::string_view, 8> kSections = {"corpus", "users",      "click",        "drift",
                                                                 "mf",     "simulation", "intervention", "output"};
  for (std::string_view section : kSections) {
    if (section != kSections.front()) out << '\n';
    out << '[' << section << "]\n";
    for (const auto& k : key_table()) {
      if (k.section != section || k.name == "templates_file") continue;  // folded into weights.*
      out << k.name << " = " << k.get(settings) << '\n';
    }
  }
  return out.str();
}

std::string content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fbsim
