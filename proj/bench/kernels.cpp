#include <benchmark/benchmark.h>

#include <map>

#include "lsmr/analysis.hpp"
#include "lsmr/scenario.hpp"
#include "lsmr/sweep.hpp"

using namespace lsmr;

namespace {

// Message spans of a contended EPaxos run on the five-site delay matrix.
const std::vector<MessageSpan>& geo_spans(std::uint32_t commands) {
    static std::map<std::uint32_t, std::vector<MessageSpan>> cache;
    auto it = cache.find(commands);
    if (it != cache.end()) return it->second;
    Scenario s;
    s.config = default_config(Protocol::EPaxos, 5);
    s.delays = DelayModel::geo5();
    s.closed_loop = ClosedLoop{4, commands, 0.3, 42};
    s.seed = 7;
    return cache[commands] = message_spans(run(s).trace);
}

void BM_AsynchronySerial(benchmark::State& state) {
    const auto& ms = geo_spans(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(asynchrony_degree_serial(ms));
    state.counters["messages"] = static_cast<double>(ms.size());
}

void BM_AsynchronyParallel(benchmark::State& state) {
    const auto& ms = geo_spans(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(asynchrony_degree(ms));
    state.counters["messages"] = static_cast<double>(ms.size());
}

std::vector<SweepPoint> small_sweep() {
    ScenarioConfig c = parse_scenario_config(R"({
      "system": {"n": 5}, "protocol": "epaxos",
      "delays": {"preset": "geo5"},
      "workload": {"closed_loop": true, "clients_per_process": 4, "commands": 200},
      "sweep": {"conflict_rates": [0, 0.1, 0.3], "protocols": ["epaxos", "mencius"], "seeds": [1]}})");
    return sweep_points(c);
}

void BM_SweepSerial(benchmark::State& state) {
    auto points = small_sweep();
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(points));
}

void BM_SweepParallel(benchmark::State& state) {
    auto points = small_sweep();
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(points, 0));
}

}  // namespace

BENCHMARK(BM_AsynchronySerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AsynchronyParallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
