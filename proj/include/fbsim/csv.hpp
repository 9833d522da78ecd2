#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbsim::csv {

/// Formats a real with 9 significant digits, the precision used by every
/// CSV the simulator writes.
std::string real(double v);
std::string real(const std::optional<double>& v);

std::vector<std::string> split(std::string_view line, char sep = ',');

double parse_real(std::string_view field);
long long parse_int(std::string_view field);
std::optional<double> parse_optional_real(std::string_view field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws if absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file with a mandatory header row. Every row must
/// have as many fields as the header.
Table read(const std::filesystem::path& path);

/// Writes `contents` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace fbsim::csv
