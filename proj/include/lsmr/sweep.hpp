#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsmr/analysis.hpp"
#include "lsmr/scenario.hpp"

namespace lsmr {

// Figures printed after a run. Latencies are in simulated time units.
struct RunSummary {
    std::size_t commands = 0;
    std::size_t executed = 0;
    double commit_p50 = 0, commit_p99 = 0;
    double execute_p50 = 0, execute_p99 = 0;
    std::size_t max_live_chain = 0;
    std::optional<double> batch_correlation;
};

using ChainTimeline = std::vector<std::pair<std::int64_t, std::size_t>>;
RunSummary summarize(const LatencyReport& r, const ChainTimeline& chains);
std::string format_summary(const RunSummary& s);

struct SweepResult {
    Protocol protocol = Protocol::EPaxos;
    double conflict_rate = 0;
    std::uint64_t seed = 0;
    bool deadlock = false;
    std::string error;  // set when the run threw
    RunSummary summary;
    LatencyReport report;
    std::string trace_jsonl;  // filled only when traces are kept
};

// Runs every point and returns results in point order whatever the thread count.
std::vector<SweepResult> run_sweep(const std::vector<SweepPoint>& points, int jobs,
                                   bool keep_traces = false);
std::vector<SweepResult> run_sweep_serial(const std::vector<SweepPoint>& points,
                                          bool keep_traces = false);

}  // namespace lsmr
