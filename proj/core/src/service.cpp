#include "distill/service.hpp"

#include <algorithm>
#include <fstream>

#include "distill/codec.hpp"
#include "distill/keyvalue.hpp"
#include "httplib.h"
#include "json.hpp"

namespace distill {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ordered_json evidence_json(const Incident& inc) {
  ordered_json tactics = ordered_json::object();
  for (const auto& [t, s] : inc.evidence) tactics[std::string(tactic_name(t))] = std::string(tactic_state_name(s));
  ordered_json alerts = ordered_json::array();
  for (const auto& a : inc.inactive_alerts) alerts.push_back(a);
  return {{"tactics", tactics}, {"alerts", alerts}};
}

ordered_json error_json(const std::string& message) { return {{"error", message}}; }

HttpResponse reply(int status, const ordered_json& doc) { return {status, doc.dump(2) + "\n"}; }

std::vector<std::string> path_parts(std::string_view path) {
  std::vector<std::string> parts;
  for (auto& p : split(path, '/'))
    if (!p.empty()) parts.push_back(p);
  return parts;
}

std::optional<TacticState> parse_state(const json& body) {
  auto it = body.find("state");
  if (it == body.end() || !it->is_string()) throw FieldError("state", "expected Active, Inactive or Clear");
  const auto text = it->get<std::string>();
  if (text == "Clear") return std::nullopt;
  auto state = parse_tactic_state(text);
  if (!state) throw FieldError("state", "expected Active, Inactive or Clear, got '" + text + "'");
  return state;
}

}  // namespace

SessionStore::SessionStore(TransitionMatrix transitions, ScoringOptions scoring, fs::path sidecar)
    : transitions_(std::move(transitions)), scoring_(scoring), sidecar_(std::move(sidecar)) {}

void SessionStore::load(std::vector<Incident> incidents) {
  json saved = json::object();
  if (!sidecar_.empty() && fs::exists(sidecar_)) {
    try {
      saved = json::parse(read_file(sidecar_.string())).value("incidents", json::object());
    } catch (const json::exception& e) {
      throw DataError("evidence sidecar " + sidecar_.string() + ": " + e.what());
    }
  }
  auto entries = std::make_shared<std::map<std::string, std::shared_ptr<Entry>>>();
  for (auto& inc : incidents) {
    if (auto it = saved.find(inc.id); it != saved.end() && it->is_object()) {
      inc.evidence.clear();
      inc.inactive_alerts.clear();
      const json tactics = it->value("tactics", json::object());
      for (const auto& [name, state] : tactics.items()) {
        auto t = parse_tactic(name);
        auto s = state.is_string() ? parse_tactic_state(state.get<std::string>()) : std::nullopt;
        if (t && s && inc.tactics.contains(*t)) inc.evidence[*t] = *s;
      }
      for (const auto& a : it->value("alerts", json::array())) {
        if (!a.is_string()) continue;
        const auto id = a.get<std::string>();
        if (std::any_of(inc.nodes.begin(), inc.nodes.end(), [&](const auto& v) { return v.id == id; }))
          inc.inactive_alerts.insert(id);
      }
    }
    rescore(inc);
    auto entry = std::make_shared<Entry>();
    const std::string id = inc.id;
    entry->incident = std::move(inc);
    if (!entries->emplace(id, std::move(entry)).second) throw DataError("duplicate incident id '" + id + "'");
  }
  std::lock_guard lock(load_mutex_);
  entries_ = std::move(entries);
}

bool SessionStore::loaded() const {
  std::lock_guard lock(load_mutex_);
  return entries_ != nullptr;
}

std::vector<Incident> SessionStore::list() const {
  std::shared_ptr<const std::map<std::string, std::shared_ptr<Entry>>> entries;
  {
    std::lock_guard lock(load_mutex_);
    entries = entries_;
  }
  std::vector<Incident> out;
  if (!entries) return out;
  for (const auto& [id, e] : *entries) {
    std::lock_guard lock(e->mutex);
    out.push_back(e->incident);
  }
  std::stable_sort(out.begin(), out.end(), incident_before);
  return out;
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& id) const {
  std::lock_guard lock(load_mutex_);
  if (!entries_) throw NotFoundError("no incidents loaded");
  auto it = entries_->find(id);
  if (it == entries_->end()) throw NotFoundError("unknown incident '" + id + "'");
  return it->second;
}

Incident SessionStore::get(const std::string& id) const {
  const auto e = entry(id);
  std::lock_guard lock(e->mutex);
  return e->incident;
}

void SessionStore::rescore(Incident& incident) const { score_incident(incident, transitions_, scoring_); }

TacticScores SessionStore::set_tactic_evidence(const std::string& id, Tactic tactic, std::optional<TacticState> state) {
  const auto e = entry(id);
  TacticScores scores;
  {
    std::lock_guard lock(e->mutex);
    Incident& inc = e->incident;
    if (!inc.tactics.contains(tactic))
      throw FieldError("tactic", std::string(tactic_name(tactic)) + " is not a tactic of incident '" + id + "'");
    Incident next = inc;
    if (state) {
      next.evidence[tactic] = *state;
    } else {
      next.evidence.erase(tactic);
    }
    rescore(next);  // throws before anything changes, e.g. on zero mass
    inc = std::move(next);
    scores = inc.scores;
  }
  persist();
  return scores;
}

TacticScores SessionStore::set_alert_evidence(const std::string& id, const std::string& alert_id,
                                              std::optional<TacticState> state) {
  if (state == TacticState::Active)
    throw FieldError("state", "alerts can only be marked Inactive or cleared");
  const auto e = entry(id);
  TacticScores scores;
  {
    std::lock_guard lock(e->mutex);
    Incident& inc = e->incident;
    if (std::none_of(inc.nodes.begin(), inc.nodes.end(), [&](const auto& v) { return v.id == alert_id; }))
      throw FieldError("alert", "'" + alert_id + "' is not an alert of incident '" + id + "'");
    Incident next = inc;
    if (state) {
      next.inactive_alerts.insert(alert_id);
    } else {
      next.inactive_alerts.erase(alert_id);
    }
    rescore(next);
    inc = std::move(next);
    scores = inc.scores;
  }
  persist();
  return scores;
}

TacticScores SessionStore::clear_evidence(const std::string& id) {
  const auto e = entry(id);
  TacticScores scores;
  {
    std::lock_guard lock(e->mutex);
    e->incident.evidence.clear();
    e->incident.inactive_alerts.clear();
    rescore(e->incident);
    scores = e->incident.scores;
  }
  persist();
  return scores;
}

void SessionStore::persist() const {
  if (sidecar_.empty()) return;
  std::lock_guard file_lock(sidecar_mutex_);
  std::shared_ptr<const std::map<std::string, std::shared_ptr<Entry>>> entries;
  {
    std::lock_guard lock(load_mutex_);
    entries = entries_;
  }
  ordered_json incidents = ordered_json::object();
  if (entries) {
    for (const auto& [id, e] : *entries) {
      std::lock_guard lock(e->mutex);
      if (e->incident.evidence.empty() && e->incident.inactive_alerts.empty()) continue;
      incidents[id] = evidence_json(e->incident);
    }
  }
  const ordered_json doc = {{"schema", 1}, {"incidents", incidents}};
  const fs::path tmp = sidecar_.string() + ".tmp";
  write_file(tmp.string(), doc.dump(2) + "\n");
  fs::rename(tmp, sidecar_);
}

HttpResponse IncidentApi::handle(std::string_view method, std::string_view path, std::string_view body) const {
  const auto parts = path_parts(path);
  try {
    if (parts.size() == 1 && parts[0] == "health") {
      if (method != "GET") return reply(405, error_json("method not allowed"));
      const bool loaded = store_.loaded();
      return reply(200, {{"status", "ok"}, {"loaded", loaded}, {"incidents", loaded ? store_.list().size() : 0}});
    }
    if (parts.empty() || parts[0] != "incidents") return reply(404, error_json("no route for " + std::string(path)));
    if (!store_.loaded()) return reply(409, error_json("no incidents loaded"));

    if (parts.size() == 1) {
      if (method != "GET") return reply(405, error_json("method not allowed"));
      return {200, incident_index_json(store_.list()) + "\n"};
    }
    const std::string& id = parts[1];
    if (parts.size() == 2) {
      if (method != "GET") return reply(405, error_json("method not allowed"));
      return {200, incident_to_json(store_.get(id)) + "\n"};
    }
    if (parts.size() == 3 && parts[2] == "similar") {
      store_.get(id);
      return reply(501, error_json("similar-alert suggestions are not available"));
    }
    if (parts.size() == 3 && parts[2] == "evidence") {
      if (method == "DELETE") {
        store_.clear_evidence(id);
      } else if (method == "POST") {
        json doc;
        try {
          doc = json::parse(body);
        } catch (const json::exception& e) {
          throw DataError(std::string("request body is not JSON: ") + e.what());
        }
        if (!doc.is_object()) throw DataError("request body must be an object");
        const bool has_tactic = doc.contains("tactic"), has_alert = doc.contains("alert");
        if (has_tactic == has_alert) throw FieldError("tactic", "give exactly one of 'tactic' or 'alert'");
        const auto state = parse_state(doc);
        if (has_tactic) {
          const auto& t = doc.at("tactic");
          auto tactic = t.is_string() ? parse_tactic(t.get<std::string>()) : std::nullopt;
          if (!tactic) throw FieldError("tactic", "unknown tactic " + t.dump());
          store_.set_tactic_evidence(id, *tactic, state);
        } else {
          const auto& a = doc.at("alert");
          if (!a.is_string()) throw FieldError("alert", "expected an alert id");
          store_.set_alert_evidence(id, a.get<std::string>(), state);
        }
      } else {
        return reply(405, error_json("method not allowed"));
      }
      const Incident inc = store_.get(id);
      ordered_json doc;
      doc["id"] = inc.id;
      doc["top_score"] = inc.top_score();
      // same layout as the scores part of the incident document
      const auto scores = ordered_json::parse(scores_to_json(inc.scores));
      doc["scores"] = scores.at("scores");
      doc["inference"] = {{"converged", scores.at("converged")}, {"iterations", scores.at("iterations")}};
      doc["evidence"] = evidence_json(inc);
      return reply(200, doc);
    }
    return reply(404, error_json("no route for " + std::string(path)));
  } catch (const NotFoundError& e) {
    return reply(404, error_json(e.what()));
  } catch (const DataError& e) {
    return reply(400, error_json(e.what()));
  } catch (const ConfigError& e) {
    return reply(400, error_json(e.what()));
  } catch (const std::exception& e) {
    return reply(500, error_json(e.what()));
  }
}

struct HttpService::Impl {
  Impl(SessionStore& store, ServeOptions opts) : api(store), options(std::move(opts)) {}
  IncidentApi api;
  ServeOptions options;
  httplib::Server server;
};

HttpService::HttpService(SessionStore& store, ServeOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  auto& server = impl_->server;
  const unsigned threads = std::max(1u, impl_->options.threads);
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // SO_REUSEADDR only: with SO_REUSEPORT a second instance would silently share the port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  const auto& ui = impl_->options.ui_dir;
  if (!ui.empty() && !server.set_mount_point("/ui", ui.string()))
    throw ConfigError("UI directory not found: " + ui.string());

  auto route = [api = &impl_->api](const httplib::Request& req, httplib::Response& res) {
    const auto out = api->handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body, out.content_type);
  };
  server.Get(".*", route);
  server.Post(".*", route);
  server.Delete(".*", route);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
  auto& o = impl_->options;
  const int port = o.port == 0 ? impl_->server.bind_to_any_port(o.host) : (impl_->server.bind_to_port(o.host, o.port) ? o.port : -1);
  if (port < 0) throw ConfigError("cannot listen on " + o.host + ":" + std::to_string(o.port));
  return port;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

void serve(SessionStore& store, const ServeOptions& options) {
  HttpService service(store, options);
  service.bind();
  service.run();
}

}  // namespace distill
