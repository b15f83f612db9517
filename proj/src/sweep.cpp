#include "lsmr/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <omp.h>

#include "lsmr/simulation.hpp"

namespace lsmr {

RunSummary summarize(const LatencyReport& r, const ChainTimeline& chains) {
    RunSummary s;
    std::vector<double> commit, execute, batch;
    for (const auto& c : r.commands) {
        ++s.commands;
        if (auto l = c.commit_latency()) commit.push_back(static_cast<double>(*l));
        if (auto l = c.execute_latency()) {
            execute.push_back(static_cast<double>(*l));
            ++s.executed;
        }
    }
    s.commit_p50 = percentile(commit, 0.50);
    s.commit_p99 = percentile(commit, 0.99);
    s.execute_p50 = percentile(execute, 0.50);
    s.execute_p99 = percentile(execute, 0.99);
    for (const auto& [time, len] : chains) s.max_live_chain = std::max(s.max_live_chain, len);
    s.batch_correlation = r.correlation;
    return s;
}

std::string format_summary(const RunSummary& s) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "commands %zu executed %zu commit p50 %.1f p99 %.1f execute p50 %.1f p99 %.1f "
                  "max live chain %zu",
                  s.commands, s.executed, s.commit_p50, s.commit_p99, s.execute_p50, s.execute_p99,
                  s.max_live_chain);
    return buf;
}

namespace {

SweepResult run_point(const SweepPoint& p, bool keep_trace) {
    RunResult r = run(to_scenario(p.config));
    SweepResult out;
    out.protocol = p.protocol;
    out.conflict_rate = p.conflict_rate;
    out.seed = p.seed;
    out.deadlock = r.deadlock;
    out.report = latency_stats(r.trace);
    out.summary = summarize(out.report, live_chain_timeline(r.trace));
    if (keep_trace) {
        std::ostringstream os;
        write_jsonl(r.trace, os);
        out.trace_jsonl = os.str();
    }
    return out;
}

}  // namespace

std::vector<SweepResult> run_sweep_serial(const std::vector<SweepPoint>& points, bool keep_traces) {
    std::vector<SweepResult> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(run_point(p, keep_traces));
    return out;
}

std::vector<SweepResult> run_sweep(const std::vector<SweepPoint>& points, int jobs, bool keep_traces) {
    std::vector<SweepResult> out(points.size());
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    // each point owns its engine and rng; results land in their own slot
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i) {
        try {
            out[i] = run_point(points[i], keep_traces);
        } catch (const std::exception& e) {
            // an exception must not escape the parallel region
            out[i].protocol = points[i].protocol;
            out[i].conflict_rate = points[i].conflict_rate;
            out[i].seed = points[i].seed;
            out[i].error = e.what();
        }
    }
    return out;
}

}  // namespace lsmr
