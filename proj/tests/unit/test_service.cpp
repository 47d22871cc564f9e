#include <random>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "distill/codec.hpp"
#include "distill/service.hpp"

using namespace distill;
using nlohmann::json;

namespace {

const TransitionMatrix& T() { return default_transition_matrix(); }

std::vector<Incident> sample_incidents() {
  std::mt19937_64 rng(31);
  std::vector<Incident> out;
  for (int i = 0; i < 5; ++i) out.push_back(make_incident("x" + std::to_string(i), fixtures::random_incident_alerts(rng, 3, 5), T()));
  score_incidents(out, T());
  order_incidents(out);
  return out;
}

json body(const HttpResponse& r) { return json::parse(r.body); }

double score_of(const json& doc, const std::string& tactic) {
  for (const auto& s : doc["scores"])
    if (s["tactic"] == tactic) return s["score"].get<double>();
  throw std::runtime_error("no score for " + tactic);
}

std::string post(const std::string& what, const std::string& key, const std::string& state) {
  return json{{key, what}, {"state", state}}.dump();
}

}  // namespace

TEST_CASE("routes before and after loading") {
  SessionStore store(T(), {});
  IncidentApi api(store);
  auto health = api.handle("GET", "/health", "");
  CHECK(health.status == 200);
  CHECK(body(health)["loaded"] == false);
  CHECK(api.handle("GET", "/incidents", "").status == 409);
  CHECK(api.handle("GET", "/nowhere", "").status == 404);

  store.load(sample_incidents());
  CHECK(body(api.handle("GET", "/health", ""))["incidents"] == 5);
  CHECK(api.handle("POST", "/health", "").status == 405);
  CHECK(api.handle("DELETE", "/incidents", "").status == 405);
  CHECK(api.handle("GET", "/incidents/inc-999", "").status == 404);
  CHECK(api.handle("GET", "/incidents/inc-001/similar", "").status == 501);
  CHECK(api.handle("GET", "/incidents/inc-999/similar", "").status == 404);
  CHECK(api.handle("PUT", "/incidents/inc-001/evidence", "{}").status == 405);
  CHECK(api.handle("GET", "/incidents/inc-001/other", "").status == 404);
}

TEST_CASE("listing follows score order") {
  SessionStore store(T(), {});
  IncidentApi api(store);
  const auto incidents = sample_incidents();
  store.load(incidents);
  auto list = body(api.handle("GET", "/incidents", ""))["incidents"];
  REQUIRE(list.size() == incidents.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    CHECK(list[i]["id"] == incidents[i].id);
    if (i) CHECK(list[i - 1]["top_score"].get<double>() >= list[i]["top_score"].get<double>());
  }
  auto one = api.handle("GET", "/incidents/inc-002", "");
  CHECK(one.status == 200);
  CHECK(json::parse(one.body) == json::parse(incident_to_json(incidents[1])));
}

TEST_CASE("evidence requests") {
  SessionStore store(T(), {});
  IncidentApi api(store);
  const auto incidents = sample_incidents();
  store.load(incidents);
  const Incident& first = incidents[0];
  const auto tactic = std::string(tactic_name(first.tactics.to_vector().front()));
  const auto path = "/incidents/" + first.id + "/evidence";

  auto r = api.handle("POST", path, post(tactic, "tactic", "Inactive"));
  REQUIRE(r.status == 200);
  CHECK(score_of(body(r), tactic) == 0.0);
  CHECK(body(r)["evidence"]["tactics"][tactic] == "Inactive");
  auto again = api.handle("POST", path, post(tactic, "tactic", "Inactive"));
  CHECK(again.body == r.body);

  Incident expected = first;
  expected.evidence[first.tactics.to_vector().front()] = TacticState::Inactive;
  score_incident(expected, T());
  CHECK(store.get(first.id).scores.marginals == expected.scores.marginals);

  // a tactic the incident lacks, an unknown tactic, bad states and bodies
  Tactic absent = Tactic::InitialAccess;
  for (auto t : all_tactics())
    if (!first.tactics.contains(t)) absent = t;
  CHECK(api.handle("POST", path, post(std::string(tactic_name(absent)), "tactic", "Active")).status == 400);
  CHECK(api.handle("POST", path, post("Teleportation", "tactic", "Active")).status == 400);
  CHECK(api.handle("POST", path, post(tactic, "tactic", "Maybe")).status == 400);
  CHECK(api.handle("POST", path, "not json").status == 400);
  CHECK(api.handle("POST", path, "{\"state\": \"Active\"}").status == 400);
  CHECK(api.handle("POST", "/incidents/inc-999/evidence", post(tactic, "tactic", "Active")).status == 404);

  // clear restores the loaded scores exactly
  CHECK(api.handle("DELETE", path, "").status == 200);
  CHECK(store.get(first.id).scores.marginals == first.scores.marginals);
  CHECK(incident_to_json(store.get(first.id)) == incident_to_json(first));

  api.handle("POST", path, post(tactic, "tactic", "Active"));
  CHECK(api.handle("POST", path, post(tactic, "tactic", "Clear")).status == 200);
  CHECK(store.get(first.id).scores.marginals == first.scores.marginals);
}

TEST_CASE("alert evidence") {
  SessionStore store(T(), {});
  IncidentApi api(store);
  const auto incidents = sample_incidents();
  store.load(incidents);
  const Incident& inc = incidents[1];
  const auto path = "/incidents/" + inc.id + "/evidence";
  const auto alert = inc.nodes[1].id;

  REQUIRE(api.handle("POST", path, post(alert, "alert", "Inactive")).status == 200);
  auto expected = infer_exact(remove_alert_factor(incident_factor_graph(inc, T()), alert));
  CHECK(store.get(inc.id).scores.marginals == expected.marginals);

  CHECK(api.handle("POST", path, post(alert, "alert", "Active")).status == 400);
  CHECK(api.handle("POST", path, post("nope", "alert", "Inactive")).status == 400);
  CHECK(api.handle("POST", path, json{{"alert", alert}, {"tactic", "Execution"}, {"state", "Inactive"}}.dump()).status == 400);

  REQUIRE(api.handle("POST", path, post(alert, "alert", "Clear")).status == 200);
  CHECK(store.get(inc.id).scores.marginals == inc.scores.marginals);
}

TEST_CASE("concurrent evidence posts keep scores consistent") {
  SessionStore store(T(), {});
  IncidentApi api(store);
  const auto incidents = sample_incidents();
  store.load(incidents);
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      for (int i = 0; i < 25; ++i) {
        const Incident& inc = incidents[(w + i) % incidents.size()];
        const auto t = std::string(tactic_name(inc.tactics.to_vector()[i % inc.tactics.size()]));
        api.handle("POST", "/incidents/" + inc.id + "/evidence", post(t, "tactic", i % 2 ? "Active" : "Inactive"));
        api.handle("GET", "/incidents", "");
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& listed : store.list()) {
    Incident check = listed;
    score_incident(check, T());
    CHECK(check.scores.marginals == listed.scores.marginals);
  }
}

TEST_CASE("evidence survives a restart through the sidecar") {
  fixtures::TempDir tmp("sidecar");
  const auto incidents = sample_incidents();
  const auto sidecar = tmp / "evidence.json";
  const auto tactic = incidents[2].tactics.to_vector().front();
  {
    SessionStore store(T(), {}, sidecar);
    store.load(incidents);
    store.set_tactic_evidence(incidents[2].id, tactic, TacticState::Active);
    store.set_alert_evidence(incidents[3].id, incidents[3].nodes[0].id, TacticState::Inactive);
  }
  SessionStore reopened(T(), {}, sidecar);
  reopened.load(incidents);
  CHECK(reopened.get(incidents[2].id).evidence.at(tactic) == TacticState::Active);
  CHECK(reopened.get(incidents[2].id).scores.at(tactic) == 1.0);
  CHECK(reopened.get(incidents[3].id).inactive_alerts.count(incidents[3].nodes[0].id) == 1);
  CHECK(reopened.get(incidents[0].id).evidence.empty());

  reopened.clear_evidence(incidents[2].id);
  SessionStore third(T(), {}, sidecar);
  third.load(incidents);
  CHECK(third.get(incidents[2].id).evidence.empty());
}

TEST_CASE("http front end") {
  SessionStore store(T(), {});
  store.load(sample_incidents());
  ServeOptions options;
  options.port = 0;
  options.threads = 2;
  HttpService service(store, options);
  const int port = service.bind();
  REQUIRE(port > 0);
  std::thread server([&] { service.run(); });

  httplib::Client client("127.0.0.1", port);
  auto list = client.Get("/incidents");
  REQUIRE(list);
  CHECK(list->status == 200);
  CHECK(list->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(json::parse(list->body)["incidents"].size() == 5);

  const auto first = store.list().front();
  const auto tactic = std::string(tactic_name(first.tactics.to_vector().front()));
  auto posted = client.Post("/incidents/" + first.id + "/evidence", post(tactic, "tactic", "Inactive"), "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 200);
  auto cleared = client.Delete("/incidents/" + first.id + "/evidence");
  REQUIRE(cleared);
  CHECK(cleared->status == 200);
  auto missing = client.Get("/incidents/inc-404");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto preflight = client.Options("/incidents");
  REQUIRE(preflight);
  CHECK(preflight->status == 204);

  service.stop();
  server.join();

  ServeOptions taken;
  taken.port = port;
  HttpService holder(store, options);
  const int held = holder.bind();
  taken.port = held;
  HttpService clash(store, taken);
  CHECK_THROWS_AS(clash.bind(), ConfigError);
}
