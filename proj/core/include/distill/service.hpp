#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "distill/error.hpp"
#include "distill/incident.hpp"

namespace distill {

class NotFoundError : public DataError {
 public:
  explicit NotFoundError(const std::string& what) : DataError(what) {}
};

/// Loaded incidents with their analyst evidence. Each incident has its own
/// lock; evidence changes re-score the incident while holding it, so readers
/// never see evidence and scores out of step.
class SessionStore {
 public:
  /// `sidecar` (optional) persists evidence across restarts.
  SessionStore(TransitionMatrix transitions, ScoringOptions scoring, std::filesystem::path sidecar = {});

  /// Replaces the loaded set. Evidence found in the sidecar for matching ids
  /// is re-applied; entries for unknown ids or absent tactics are dropped.
  void load(std::vector<Incident> incidents);
  bool loaded() const;

  /// Snapshot in listing order.
  std::vector<Incident> list() const;
  Incident get(const std::string& id) const;

  /// nullopt state clears the tactic's evidence. Returns the new scores.
  TacticScores set_tactic_evidence(const std::string& id, Tactic tactic, std::optional<TacticState> state);
  /// Inactive removes the alert's factor; Clear (nullopt) restores it.
  TacticScores set_alert_evidence(const std::string& id, const std::string& alert_id,
                                  std::optional<TacticState> state);
  TacticScores clear_evidence(const std::string& id);

 private:
  struct Entry {
    mutable std::mutex mutex;
    Incident incident;
  };

  /// Keeps the loaded set alive while the caller holds the entry.
  std::shared_ptr<Entry> entry(const std::string& id) const;
  void rescore(Incident& incident) const;
  void persist() const;

  TransitionMatrix transitions_;
  ScoringOptions scoring_;
  std::filesystem::path sidecar_;
  mutable std::mutex sidecar_mutex_;
  std::shared_ptr<const std::map<std::string, std::shared_ptr<Entry>>> entries_;
  mutable std::mutex load_mutex_;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Routes without a socket: method, path and body in, status and JSON out.
class IncidentApi {
 public:
  explicit IncidentApi(SessionStore& store) : store_(store) {}
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  SessionStore& store_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path ui_dir;  // served under /ui/ when set
  unsigned threads = 4;
};

/// HTTP front end over IncidentApi, plus static files under /ui/.
class HttpService {
 public:
  HttpService(SessionStore& store, ServeOptions options);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds the address; port 0 picks a free port. Returns the bound port.
  /// Throws ConfigError when the address cannot be bound.
  int bind();
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// bind() then run().
void serve(SessionStore& store, const ServeOptions& options);

}  // namespace distill
