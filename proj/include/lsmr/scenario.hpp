#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsmr/simulation.hpp"

namespace lsmr {

struct WorkloadSpec {
    bool closed_loop = false;
    std::uint32_t clients_per_process = 1;
    std::uint32_t commands = 0;
    double conflict_rate = 0.0;
    std::int64_t window = 100;  // open loop: submit times are drawn from [0, window)
    std::vector<WorkloadItem> submissions;  // explicit items, used as given
};

struct SchedulerSpec {
    std::string kind = "nice";  // nice | random | exhaustive | chain
    std::size_t k = 0;          // chain length
    std::uint32_t max_crashes = 0;
    std::uint64_t max_states = 20'000'000;
};

struct OutputSpec {
    std::string trace;        // empty: no trace file
    std::string metrics_dir;  // empty: no CSV files
};

struct SweepSpec {
    std::vector<double> conflict_rates;
    std::vector<Protocol> protocols;
    std::vector<std::uint64_t> seeds;
};

// A parsed experiment file. Unknown keys anywhere are rejected.
struct ScenarioConfig {
    SystemConfig system;
    DelayModel delays;
    WorkloadSpec workload;
    std::vector<CrashSpec> crashes;
    std::int64_t fd_timeout = 0;
    RecoveryRule recovery_rule = RecoveryRule::Union;
    QuorumPolicy quorum_policy = QuorumPolicy::Lowest;
    SchedulerSpec scheduler;
    std::uint64_t seed = 0;
    std::uint64_t max_events = 5'000'000;
    OutputSpec outputs;
    std::optional<SweepSpec> sweep;
};

ScenarioConfig parse_scenario_config(const std::string& text);
ScenarioConfig load_scenario_config(const std::string& path);

// Timed scenario for the nice and random schedulers; the workload is drawn from the seed.
Scenario to_scenario(const ScenarioConfig& cfg);
// Exhaustive bounds: explicit submissions grouped per process.
ExhaustiveSpec to_exhaustive(const ScenarioConfig& cfg);

// One point of a sweep: the base config with protocol, conflict rate and seed replaced.
struct SweepPoint {
    Protocol protocol;
    double conflict_rate;
    std::uint64_t seed;
    ScenarioConfig config;
};
std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg);

}  // namespace lsmr
