#include <algorithm>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "distill/error.hpp"
#include "distill/partition.hpp"

using namespace distill;
using fixtures::node;

namespace {

/// Graph with explicit symmetric edges (stored once, low -> high index).
AlertGraph handmade(std::vector<GeneralizedAlert> nodes, std::vector<GraphEdge> edges) {
  AlertGraph g;
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  std::sort(g.edges.begin(), g.edges.end(), [](auto& a, auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return g;
}

AlertGraph two_cliques() {
  std::vector<GeneralizedAlert> nodes;
  for (int i = 0; i < 8; ++i) nodes.push_back(node("n" + std::to_string(i), {Tactic::Execution}, {"10.0.0.1"}, i));
  std::vector<GraphEdge> edges;
  for (std::size_t base : {0u, 4u})
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) edges.push_back({base + i, base + j, 0.8});
  edges.push_back({3, 4, 0.45});
  return handmade(std::move(nodes), std::move(edges));
}

oracle::Columns as_columns(const IncidentPartition& p, std::size_t n) {
  oracle::Columns cols;
  for (const auto& c : p.columns) {
    std::vector<bool> in(n, false);
    for (auto i : c) in[i] = true;
    cols.push_back(in);
  }
  return cols;
}

Assignment random_assignment(std::mt19937_64& rng, std::size_t n, std::size_t k, int max_memb, int max_card) {
  Assignment x(n, std::vector<std::uint8_t>(k, 0));
  std::vector<int> sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int memb = 0;
    for (std::size_t c = 0; c < k; ++c)
      if (rng() % 2 && memb < max_memb && sizes[c] < max_card) {
        x[i][c] = 1;
        ++memb;
        ++sizes[c];
      }
  }
  return x;
}

}  // namespace

TEST_CASE("problem construction") {
  std::mt19937_64 rng(3);
  auto g = fixtures::random_graph(rng, 7);
  PartitionOptions o;
  CHECK(o.gamma0 == 1.0);
  CHECK(o.gamma1 == 0.5);
  CHECK(o.gamma2 == 0.5);
  CHECK(o.max_memb == 2);
  CHECK(o.max_card == 20);
  auto p = build_problem(g, o);
  CHECK(p.k == 1);
  CHECK(p.c == doctest::Approx(oracle::big_c(oracle::symmetric(g))));
  CHECK(p.lp.integer_count() >= p.nodes() * p.k);

  o.max_card = 3;
  CHECK(build_problem(g, o).k == 3);
  o.k = 5;
  CHECK(build_problem(g, o).k == 5);

  CHECK_THROWS_AS(build_problem(AlertGraph{}, PartitionOptions{}), DataError);
  PartitionOptions bad;
  bad.max_card = 0;
  CHECK_THROWS_AS(build_problem(g, bad), ConfigError);
  bad = {};
  bad.gamma1 = -1;
  CHECK_THROWS_AS(build_problem(g, bad), ConfigError);
}

TEST_CASE("single node and edgeless graphs") {
  auto single = handmade({node("a", {Tactic::Impact}, {"10.0.0.1", "10.0.0.2"}, 0)}, {});
  PartitionOptions o;
  o.k = 1;
  auto p = build_problem(single, o);
  CHECK(p.c == 0.0);
  const Assignment one{{1}};
  // gamma0 * C * 1 + gamma1 * (11 tactics missing -> 1) + gamma2 * 2 assets
  CHECK(partition_objective(one, p) == doctest::Approx(o.gamma0 * p.c + o.gamma1 * 1 + o.gamma2 * 2));

  auto flat = handmade({node("a", {Tactic::Impact}, {"10.0.0.1"}, 0), node("b", {Tactic::Impact}, {"10.0.0.2"}, 1)}, {});
  auto q = build_problem(flat, o);
  CHECK(q.c == 0.0);
  CHECK(min_slack_objective(Assignment{{1}, {1}}, q) == 0.0);
}

TEST_CASE("two cliques split along the weak edge") {
  auto g = two_cliques();
  PartitionOptions o;
  o.k = 2;
  o.max_card = 4;
  o.cover = true;
  auto p = build_problem(g, o);
  auto exact = solve_exact(p);
  CHECK(exact.status == PartitionStatus::Optimal);
  auto cols = exact.columns;
  std::sort(cols.begin(), cols.end());
  CHECK(cols == std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}, {4, 5, 6, 7}});
  auto best = oracle::enumerate(g, 2, o);
  CHECK(exact.objective == doctest::Approx(best.value).epsilon(1e-12));
  CHECK(exact.lower_bound <= exact.objective + 1e-9);
}

TEST_CASE("without cover and with uniform weights the empty column wins") {
  std::vector<GeneralizedAlert> nodes;
  std::vector<GraphEdge> edges;
  for (int i = 0; i < 5; ++i) nodes.push_back(node("n" + std::to_string(i), {Tactic::Execution}, {"10.0.0.1"}, i));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) edges.push_back({i, j, 0.7});
  auto g = handmade(nodes, edges);
  PartitionOptions o;
  o.k = 1;
  o.max_card = 5;
  o.gamma1 = o.gamma2 = 0;
  auto r = solve_exact(build_problem(g, o));
  REQUIRE(r.columns.size() == 1);
  CHECK(r.columns[0].empty());
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(oracle::enumerate(g, 1, o).value == doctest::Approx(0.0));
}

TEST_CASE("exact solver matches enumeration on random 6-node graphs") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    auto g = fixtures::random_graph(rng, 6);
    PartitionOptions o;
    o.k = 2;
    o.max_card = 3 + static_cast<int>(rng() % 4);
    o.max_memb = 1 + static_cast<int>(rng() % 2);
    o.cover = seed % 2 == 0;
    o.tactic_penalty = seed % 3 == 0 ? TacticPenalty::One : TacticPenalty::Infinity;
    auto p = build_problem(g, o);
    auto exact = solve_exact(p);
    auto best = oracle::enumerate(g, 2, o);
    CHECK(exact.objective == doctest::Approx(best.value).epsilon(1e-9));
    const auto x = to_assignment(exact.columns, g.size());
    CHECK(is_feasible(x, p));
    CHECK(oracle::objective(g, as_columns(exact, g.size()), o) == doctest::Approx(exact.objective).epsilon(1e-9));
  }
}

TEST_CASE("relaxation bounds the exact optimum") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed * 7);
    auto g = fixtures::random_graph(rng, 6);
    PartitionOptions o;
    o.k = 2;
    o.max_card = 4;
    o.cover = seed % 2 == 1;
    auto p = build_problem(g, o);
    auto exact = solve_exact(p);
    auto relaxed = solve_relaxed(p);
    CHECK(relaxed.status == PartitionStatus::RelaxedRounded);
    CHECK(relaxed.lower_bound <= exact.objective + 1e-9);
    CHECK(exact.objective <= relaxed.objective + 1e-9);
    CHECK(is_feasible(to_assignment(relaxed.columns, g.size()), p));
    CHECK(relaxed.objective == doctest::Approx(partition_objective(to_assignment(relaxed.columns, g.size()), p)));
    if (std::abs(relaxed.lower_bound - relaxed.objective) < 1e-9) CHECK(relaxed.objective == doctest::Approx(exact.objective));
  }
}

TEST_CASE("an integral relaxation agrees with the exact solve") {
  auto g = handmade({node("a", {Tactic::Impact}, {"10.0.0.1"}, 0), node("b", {Tactic::Impact}, {"10.0.0.2"}, 1),
                     node("c", {Tactic::Collection}, {"10.0.0.3"}, 2)},
                    {});
  PartitionOptions o;
  o.k = 2;
  auto p = build_problem(g, o);
  auto exact = solve_exact(p);
  auto relaxed = solve_relaxed(p);
  CHECK(relaxed.lower_bound == doctest::Approx(relaxed.objective));
  CHECK(relaxed.objective == doctest::Approx(exact.objective));
  CHECK(relaxed.columns == exact.columns);
}

TEST_CASE("40-node graph: exact refuses, relaxation completes") {
  std::mt19937_64 rng(40);
  auto g = fixtures::random_graph(rng, 40);
  PartitionOptions o;
  o.k = 5;
  o.max_card = 10;
  o.cover = true;
  auto p = build_problem(g, o);
  try {
    solve_exact(p);
    FAIL("exact mode should refuse 200 binaries");
  } catch (const SolverLimitError& e) {
    CHECK(std::string(e.what()).find("relaxed") != std::string::npos);
  }
  auto relaxed = solve_relaxed(p);
  CHECK(relaxed.columns.size() == 5);
  CHECK(is_feasible(to_assignment(relaxed.columns, g.size()), p));
  CHECK(relaxed.lower_bound <= relaxed.objective + 1e-9);
}

TEST_CASE("slack term in closed form and as a program") {
  std::mt19937_64 rng(12);
  const SimplexSolver solver;
  for (int trial = 0; trial < 25; ++trial) {
    auto g = fixtures::random_graph(rng, 8);
    PartitionOptions o;
    o.k = 2;
    o.max_card = 5;
    auto p = build_problem(g, o);
    const auto w = oracle::symmetric(g);

    CHECK(min_slack_objective(Assignment(8, std::vector<std::uint8_t>(2, 0)), p) == 0.0);
    Assignment all(8, std::vector<std::uint8_t>{1, 0});
    CHECK(min_slack_objective(all, p) == doctest::Approx(p.c * 8));

    auto x = random_assignment(rng, 8, 2, o.max_memb, o.max_card);
    oracle::Columns cols(2, std::vector<bool>(8));
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t c = 0; c < 2; ++c) cols[c][i] = x[i][c] != 0;
    const double closed = min_slack_objective(x, p);
    CHECK(closed == doctest::Approx(oracle::slack(w, cols)).epsilon(1e-12));
    CHECK(std::abs(oracle::slack_lp(w, cols, solver) - closed) <= 1e-6);

    // The full program with X fixed minimizes to the closed-form objective.
    auto fixed = solver.solve(p.with_fixed_assignment(x));
    REQUIRE(fixed.status == LpStatus::Optimal);
    CHECK(std::abs(fixed.objective - partition_objective(x, p)) <= 1e-6);
  }
}

TEST_CASE("tactic and asset terms") {
  std::vector<GeneralizedAlert> nodes;
  for (std::size_t t = 0; t < kTacticCount; ++t)
    nodes.push_back(node("n" + std::to_string(10 + t), {tactic_at(t)}, {t < 3 ? std::string("10.0.0.") + std::to_string(t + 1) : "10.0.0.1"}, 0));
  auto g = handmade(nodes, {});
  PartitionOptions o;
  o.k = 3;
  o.max_card = 12;
  auto p = build_problem(g, o);
  Assignment x(12, std::vector<std::uint8_t>(3, 0));
  for (std::size_t i = 0; i < 12; ++i) x[i][0] = 1;       // all 12 tactics
  for (std::size_t i = 0; i < 11; ++i) x[i][1] = 1;       // 11 of 12
  for (std::size_t i = 6; i < 12; ++i) x[i][2] = 1;   // 6 of 12
  auto inf = tactic_asset_terms(x, p);
  CHECK(inf.alpha == std::vector<double>{0, 1, 1});
  CHECK(inf.asset_counts[0] == 3);
  CHECK(inf.missing[1] == TacticSet{Tactic::Impact});

  o.tactic_penalty = TacticPenalty::One;
  auto one = tactic_asset_terms(x, build_problem(g, o));
  CHECK(one.alpha == std::vector<double>{0, 1, 6});

  Assignment empty(12, std::vector<std::uint8_t>(3, 0));
  CHECK(tactic_asset_terms(empty, p).alpha == std::vector<double>{1, 1, 1});
  CHECK(tactic_asset_terms(empty, p).asset_counts == std::vector<double>{0, 0, 0});
}

TEST_CASE("auto mode splits components and keeps the caps") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    auto g = fixtures::random_graph(rng, 14);
    PartitionOptions o;
    o.max_card = 4;
    o.cover = true;
    auto report = partition_graph(g, PartitionMode::Auto, o, {}, 2);
    std::vector<int> memb(g.size(), 0);
    for (const auto& c : report.partition.columns) {
      CHECK(c.size() <= 4u);
      for (auto i : c) ++memb[i];
    }
    const auto deg = g.degrees();
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(memb[i] <= o.max_memb);
      if (deg[i] > 0) CHECK(memb[i] >= 1);
    }
    CHECK(report.exact_components + report.relaxed_components == report.components);
  }
  auto empty = partition_graph(AlertGraph{}, PartitionMode::Auto, PartitionOptions{});
  CHECK(empty.partition.columns.empty());
}

TEST_CASE("assignment helpers and problem dump") {
  std::vector<std::vector<std::size_t>> cols{{0, 2}, {}, {1}};
  auto x = to_assignment(cols, 3);
  CHECK(to_columns(x) == cols);

  std::mt19937_64 rng(77);
  auto g = fixtures::random_graph(rng, 5);
  PartitionOptions o;
  o.k = 2;
  auto p = build_problem(g, o);
  auto back = parse_lp_text(to_lp_text(p.lp));
  CHECK(back.integer_count() == p.lp.integer_count());
  CHECK(solve_milp(back).objective == doctest::Approx(solve_exact(p).objective));

  CHECK(parse_partition_mode("relaxed") == PartitionMode::Relaxed);
  CHECK(parse_tactic_penalty("one") == TacticPenalty::One);
  CHECK_FALSE(parse_partition_mode("nope"));
}
