#include <random>

#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "distill/factor_graph.hpp"
#include "distill/ingest.hpp"
#include "distill/partition.hpp"
#include "distill/scenario.hpp"
#include "distill/templating.hpp"

using namespace distill;

namespace {

const Scenario& darpa() {
  static const Scenario s = generate_scenario({});
  return s;
}

std::string darpa_text() {
  std::string text;
  for (const auto& r : darpa().records) text += r + "\n";
  return text;
}

void BM_Ingest(benchmark::State& state) {
  const auto text = darpa_text();
  for (auto _ : state) benchmark::DoNotOptimize(ingest_text(text, "bench", darpa().config));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(darpa().records.size()));
}
BENCHMARK(BM_Ingest)->Unit(benchmark::kMillisecond);

void BM_Templating(benchmark::State& state) {
  const auto alerts = ingest_text(darpa_text(), "bench", darpa().config).alerts;
  const auto catalog = build_catalog(alerts);
  for (auto _ : state) benchmark::DoNotOptimize(run_templating(alerts, catalog, darpa().config.network));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(alerts.size()));
}
BENCHMARK(BM_Templating)->Unit(benchmark::kMillisecond);

void BM_GraphBuild(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<GeneralizedAlert> nodes;
  for (long i = 0; i < state.range(0); ++i)
    nodes.push_back(fixtures::node("g" + std::to_string(i), {tactic_at(rng() % kTacticCount)},
                                   {"10.0." + std::to_string(rng() % 4) + ".1"}, static_cast<long long>(rng() % 1000)));
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(nodes, default_transition_matrix()));
}
BENCHMARK(BM_GraphBuild)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_SolveExact(benchmark::State& state) {
  std::mt19937_64 rng(8);
  const auto g = fixtures::random_graph(rng, static_cast<std::size_t>(state.range(0)));
  PartitionOptions o;
  o.k = 2;
  o.max_card = 5;
  const auto p = build_problem(g, o);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(p));
}
BENCHMARK(BM_SolveExact)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_SolveRelaxed(benchmark::State& state) {
  std::mt19937_64 rng(9);
  const auto g = fixtures::random_graph(rng, static_cast<std::size_t>(state.range(0)));
  PartitionOptions o;
  o.max_card = 10;
  const auto p = build_problem(g, o);
  for (auto _ : state) benchmark::DoNotOptimize(solve_relaxed(p));
}
BENCHMARK(BM_SolveRelaxed)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Inference(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto fg = build_fg(fixtures::random_incident_alerts(rng, static_cast<std::size_t>(state.range(0)), 12),
                           default_transition_matrix());
  for (auto _ : state) {
    if (state.range(1))
      benchmark::DoNotOptimize(infer_sum_product(fg));
    else
      benchmark::DoNotOptimize(infer_exact(fg));
  }
}
BENCHMARK(BM_Inference)->ArgsProduct({{4, 8, 12}, {0, 1}})->ArgNames({"tactics", "bp"});

}  // namespace
BENCHMARK_MAIN();
