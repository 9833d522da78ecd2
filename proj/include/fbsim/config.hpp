#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fbsim/simulation.hpp"

namespace fbsim {

/// Invalid configuration. When the problem is tied to a line of a config
/// file, the message starts with "<file>:<line>: ".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_ = 0;
};

struct OutputOptions {
  bool write_interactions = true;
  bool dump_models = false;
};

struct Settings {
  std::string preset = "desk";
  ExperimentConfig experiment;
  OutputOptions output;
};

/// Shipped presets: "paper" (40,000 articles, 500 users, 40,000 iterations,
/// retrain every 200) and "desk" (2,000 articles, 50 users, 4,000
/// iterations, retrain every 100).
Settings preset_settings(std::string_view name);

/// Applies an INI-style document on top of `base`:
///
///   [section]
///   key = value   # comment
///
/// Sections: corpus, users, click, drift, mf, simulation, intervention,
/// output. Unknown sections or keys are rejected. Relative file paths are
/// resolved against `base_dir`.
Settings parse_settings(std::string_view text, const std::string& source, Settings base,
                        const std::filesystem::path& base_dir = {});

/// Preset, then the config file if given, then validation.
Settings load_settings(const std::optional<std::filesystem::path>& config_path, std::string_view preset);

/// Per-typology overrides, one section per typology:
///
///   [core_conservative]
///   weights = 0.03, 0.07, 0.15, 0.30, 0.45
///   concentration = 50
TemplateMap parse_templates(std::string_view text, const std::string& source, TemplateMap base);
TemplateMap load_templates(const std::filesystem::path& path, TemplateMap base);

/// Canonical dump of every resolved setting, in the same INI syntax.
std::string resolved_text(const Settings& settings);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string content_hash(std::string_view text);

}  // namespace fbsim
