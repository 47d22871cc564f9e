#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "distill/alert.hpp"
#include "distill/error.hpp"
#include "distill/ip.hpp"

namespace distill {

/// Source id -> tactics, with per-kind fallbacks (`tactics.map`).
struct TacticMappingConfig {
  std::map<std::string, TacticSet> by_source;
  std::map<SourceKind, TacticSet> by_kind;

  /// Source mapping first, then kind fallback; nullopt when neither applies.
  std::optional<TacticSet> lookup(const std::string& source, SourceKind kind) const;

  static TacticMappingConfig parse(std::string_view text, std::string_view name = "tactics.map");
  std::string serialize() const;
};

/// Severity -> score table and p-value handling (`scores.map`).
struct ScoreMappingConfig {
  std::map<int, double> severity_to_score{{1, 0.9}, {2, 0.6}, {3, 0.4}};
  bool p_value_mode = true;

  std::optional<double> score_for_severity(int severity) const;

  static ScoreMappingConfig parse(std::string_view text, std::string_view name = "scores.map");
  std::string serialize() const;
};

/// `network.conf`: internal CIDRs. Nested ranges are folded into their
/// enclosing range and the list is sorted.
NetworkConfig parse_network_config(std::string_view text, std::string_view name = "network.conf");
std::string serialize_network_config(const NetworkConfig& network);
NetworkConfig normalize(NetworkConfig network);

struct IngestConfig {
  TacticMappingConfig tactics;
  ScoreMappingConfig scores;
  NetworkConfig network = NetworkConfig::private_ranges();

  /// Reads tactics.map / scores.map / network.conf from `dir` when present.
  static IngestConfig load_dir(const std::filesystem::path& dir);
  void save_dir(const std::filesystem::path& dir) const;
};

/// Where a record came from; used to derive ids and error positions.
struct RecordContext {
  std::string shard;
  std::size_t line = 0;
};

/// Thrown when a well-formed record cannot be turned into an alert and must be
/// quarantined (e.g. no tactic mapping for its source).
class RejectError : public DataError {
 public:
  explicit RejectError(const std::string& what) : DataError(what) {}
};

/// EVE-style record. Returns nullopt for non-alert event types.
std::optional<Alert> parse_eve_record(std::string_view line, const RecordContext& ctx, const IngestConfig& config);

/// Generic dialect: {id?, timestamp, source, kind?, signature?, attributes{...}, score | p_value, tactics?}.
Alert parse_generic_record(std::string_view line, const RecordContext& ctx, const IngestConfig& config);

/// Dispatches on the presence of "event_type".
std::optional<Alert> parse_record(std::string_view line, const RecordContext& ctx, const IngestConfig& config);

/// IP attribute values that fall inside the internal ranges.
std::set<IpAddress> derive_assets(const Alert& alert, const NetworkConfig& network);

struct RejectedRecord {
  std::string shard;
  std::size_t line = 0;
  std::string text;
  std::string reason;

  /// The original record with a "_reject_reason" field added.
  std::string to_line() const;
};

struct IngestResult {
  std::vector<Alert> alerts;  // file order, then line order
  std::vector<RejectedRecord> rejects;
  std::size_t skipped = 0;  // non-alert records
};

/// Alert files under `paths` (directories are scanned for *.json / *.jsonl,
/// sorted by name). Files are parsed in parallel; output order is per file.
IngestResult ingest_paths(const std::vector<std::filesystem::path>& paths, const IngestConfig& config,
                          unsigned jobs = 1);

/// One shard of newline-delimited records; ids default to "shard:line".
IngestResult ingest_stream(std::istream& in, const std::string& shard, const IngestConfig& config);
IngestResult ingest_text(std::string_view text, const std::string& shard, const IngestConfig& config);

std::vector<std::filesystem::path> discover_alert_files(const std::vector<std::filesystem::path>& paths);

}  // namespace distill
