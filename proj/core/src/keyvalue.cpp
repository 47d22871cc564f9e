#include "distill/keyvalue.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "distill/error.hpp"

namespace distill {

std::string trim(std::string_view text) {
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

KeyValueDocument KeyValueDocument::parse(std::string_view text, std::string_view name, int supported_schema) {
  KeyValueDocument doc;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  bool have_schema = false;
  while (std::getline(in, line)) {
    ++number;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(std::string(name) + ": expected 'key = value'", number);
    KeyValueEntry entry{trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)), number};
    if (entry.key.empty()) throw ParseError(std::string(name) + ": empty key", number);
    if (entry.key == "schema") {
      int v = 0;
      auto [ptr, ec] = std::from_chars(entry.value.data(), entry.value.data() + entry.value.size(), v);
      if (ec != std::errc{} || ptr != entry.value.data() + entry.value.size())
        throw ParseError(std::string(name) + ": schema must be an integer", number);
      doc.schema = v;
      have_schema = true;
      continue;
    }
    doc.entries.push_back(std::move(entry));
  }
  if (!have_schema) throw ConfigError(std::string(name) + ": missing 'schema = " + std::to_string(supported_schema) + "'");
  if (doc.schema != supported_schema)
    throw ConfigError(std::string(name) + ": unsupported schema " + std::to_string(doc.schema));
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::string& path, int supported_schema) {
  return parse(read_file(path), path, supported_schema);
}

void write_file(const std::string& path, std::string_view text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + path);
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::optional<double> parse_real(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace distill
