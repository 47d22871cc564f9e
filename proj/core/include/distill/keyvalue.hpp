#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace distill {

/// One "key = value" entry of a versioned text config, keeping its line number.
struct KeyValueEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Line-oriented "key = value" document with a mandatory `schema = <n>` entry.
/// Lines starting with '#' are comments; blank lines are ignored.
struct KeyValueDocument {
  int schema = 0;
  std::vector<KeyValueEntry> entries;

  /// Throws ParseError on malformed lines, ConfigError on an unsupported schema.
  static KeyValueDocument parse(std::string_view text, std::string_view name, int supported_schema = 1);
  static KeyValueDocument load(const std::string& path, int supported_schema = 1);
};

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string read_file(const std::string& path);
/// Writes `text` to `path`, creating parent directories.
void write_file(const std::string& path, std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);
/// Strict full-string parse; nullopt on trailing garbage.
std::optional<double> parse_real(std::string_view text);

}  // namespace distill
