#include "lsmr/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "lsmr/analysis.hpp"
#include "lsmr/chain.hpp"
#include "lsmr/scenario.hpp"
#include "lsmr/simulation.hpp"
#include "lsmr/sweep.hpp"
#include "lsmr/verification.hpp"

namespace lsmr::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> properties;
    int jobs = 0;
    std::uint32_t n = 5;
    std::size_t k = 7;
    std::string trace;
};

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw ConfigInvalid("cannot write " + p.string());
    return f;
}

ScenarioConfig load(const Options& o) {
    ScenarioConfig c = load_scenario_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (!o.out_dir.empty()) {
        c.outputs.trace = (fs::path(o.out_dir) / "trace.jsonl").string();
        c.outputs.metrics_dir = o.out_dir;
    }
    return c;
}

void write_metrics(const LatencyReport& r, const ChainTimeline& chains, const std::string& dir) {
    if (dir.empty()) return;
    const fs::path d(dir);
    auto cdf = open_out(d / "cdf.csv");
    write_cdf_csv(r, cdf);
    auto cmds = open_out(d / "commands.csv");
    write_commands_csv(r, cmds);
    auto out = open_out(d / "chains.csv");
    write_chains_csv(chains, out);
}

void write_trace(const Trace& t, const std::string& path) {
    if (path.empty()) return;
    auto f = open_out(path);
    write_jsonl(t, f);
}

int report_verdicts(const std::vector<Verdict>& vs, std::ostream& out) {
    out << verdicts_to_json(vs).dump(2) << "\n";
    for (const auto& v : vs)
        if (!v.pass) return kFailed;
    return kOk;
}

int simulate_exhaustive(const ScenarioConfig& c, std::ostream& out) {
    std::vector<std::string> props = safety_properties();
    props.push_back("reliability");
    std::size_t failures = 0;
    std::vector<Verdict> first_bad;
    const ExhaustiveStats st = explore(to_exhaustive(c), [&](const Trace& t) {
        for (auto& v : check_properties(t, props, false))
            if (!v.pass) {
                ++failures;
                if (first_bad.empty()) first_bad.push_back(v);
            }
        return true;
    });
    out << "states " << st.states << " maximal runs " << st.maximal_runs << " failures " << failures
        << "\n";
    if (!first_bad.empty()) return report_verdicts(first_bad, out);
    return kOk;
}

int simulate_chain(const ScenarioConfig& c, std::ostream& out) {
    const ChainRun r = run_chain(build_chain_plan(c.system, c.scheduler.k));
    write_trace(r.trace, c.outputs.trace);
    write_metrics(latency_stats(r.trace), live_chain_timeline(r.trace), c.outputs.metrics_dir);
    out << "live chain " << r.live_chain << " asynchrony " << r.asynchrony << "\n";
    return r.live_chain == c.scheduler.k && r.asynchrony == 2 ? kOk : kFailed;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const ScenarioConfig c = load(o);
    if (c.scheduler.kind == "exhaustive") return simulate_exhaustive(c, out);
    if (c.scheduler.kind == "chain") return simulate_chain(c, out);
    const RunResult r = run(to_scenario(c));
    write_trace(r.trace, c.outputs.trace);
    const LatencyReport rep = latency_stats(r.trace);
    const ChainTimeline chains = live_chain_timeline(r.trace);
    write_metrics(rep, chains, c.outputs.metrics_dir);
    out << format_summary(summarize(rep, chains)) << "\n";
    if (r.deadlock) {
        err << "deadlock: " << r.deadlock_reason << "\n";
        return kDeadlock;
    }
    return kOk;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
    for (const auto& p : o.properties)
        if (!is_property(p)) {
            err << "unknown property '" << p << "'\n";
            return kBadInput;
        }
    Trace t;
    try {
        t = load_trace(o.trace);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kBadInput;
    }
    const auto& names = o.properties.empty() ? all_properties() : o.properties;
    return report_verdicts(check_properties(t, names), out);
}

int cmd_chain(const Options& o, std::ostream& out, std::ostream& err) {
    SystemConfig cfg;
    try {
        cfg = chain_config(o.n);
    } catch (const NotRollOptimal& e) {
        err << e.what() << "\n";
        return kBadInput;
    }
    const ChainPlan plan = build_chain_plan(cfg, o.k);
    for (const auto& v : plan_violations(plan)) err << v << "\n";
    const ChainRun r = run_chain(plan);
    if (!o.out_dir.empty()) {
        write_trace(r.trace, (fs::path(o.out_dir) / "trace.jsonl").string());
        write_metrics(latency_stats(r.trace), live_chain_timeline(r.trace), o.out_dir);
    }
    out << "n " << cfg.n << " F " << cfg.F << " f " << cfg.f << " k " << o.k << "\n";
    out << "live chain " << r.live_chain << "\n";
    out << "asynchrony " << r.asynchrony << " (announce messages), " << r.asynchrony_all
        << " (all messages)\n";
    const bool ok = plan_violations(plan).empty() && r.live_chain == o.k && r.asynchrony == 2;
    return ok ? kOk : kFailed;
}

int cmd_skyline(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.n < 2) {
        err << "n must be at least 2\n";
        return kBadInput;
    }
    out << "skyline n=" << o.n << ":";
    for (auto [F, f] : roll_skyline(o.n)) out << " (" << F << "," << f << ")";
    out << "\n";
    out << std::left << std::setw(10) << "protocol" << std::setw(14) << "fast quorum" << std::setw(4)
        << "f" << std::setw(16) << "optimal latency" << "ROLL-optimal\n";
    for (Protocol p : {Protocol::Rotating, Protocol::Mencius, Protocol::EPaxos}) {
        const ProtocolClass c = classify(p, o.n);
        out << std::setw(10) << c.protocol << std::setw(14)
            << (c.fast_quorum ? std::to_string(c.fast_quorum) : "-") << std::setw(4) << c.f
            << std::setw(16) << (c.optimal_latency ? "yes" : "no") << (c.roll_optimal ? "yes" : "no")
            << "\n";
    }
    return kOk;
}

std::string rate_label(double r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << r;
    return os.str();
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const ScenarioConfig c = load(o);
    if (c.scheduler.kind != "nice" && c.scheduler.kind != "random")
        throw ConfigInvalid("sweeps run the nice or random scheduler");
    const auto points = sweep_points(c);
    const auto results = run_sweep(points, o.jobs);
    const std::string dir = c.outputs.metrics_dir;
    std::ofstream summary;
    if (!dir.empty()) {
        summary = open_out(fs::path(dir) / "sweep.csv");
        summary << "protocol,conflict_rate,seed,commands,commit_p50,commit_p99,execute_p50,"
                   "execute_p99,max_live_chain,deadlock\n";
    }
    int code = kOk;
    for (const auto& r : results) {
        const std::string name =
            std::string(to_string(r.protocol)) + "_rho" + rate_label(r.conflict_rate) + "_seed" +
            std::to_string(r.seed);
        if (!r.error.empty()) {
            err << name << ": " << r.error << "\n";
            code = kBadInput;
            continue;
        }
        if (r.deadlock) code = kDeadlock;
        out << name << " " << format_summary(r.summary) << (r.deadlock ? " DEADLOCK" : "") << "\n";
        if (dir.empty()) continue;
        auto cdf = open_out(fs::path(dir) / ("cdf_" + name + ".csv"));
        write_cdf_csv(r.report, cdf);
        const auto& s = r.summary;
        summary << to_string(r.protocol) << "," << r.conflict_rate << "," << r.seed << ","
                << s.commands << "," << s.commit_p50 << "," << s.commit_p99 << "," << s.execute_p50
                << "," << s.execute_p99 << "," << s.max_live_chain << "," << r.deadlock << "\n";
    }
    return code;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Leaderless state-machine replication simulator and checker", "lsmr"};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "run one scenario and write its trace and metrics");
    sim->add_option("--config", o.config, "scenario file")->required();
    sim->add_option("--seed", o.seed, "override the scenario seed");
    sim->add_option("--out-dir", o.out_dir, "write trace.jsonl and CSV files here");

    auto* chk = app.add_subcommand("check", "verify properties of a recorded trace");
    chk->add_option("trace,--trace", o.trace, "trace file (JSON lines)")->required();
    chk->add_option("--properties", o.properties, "property names (default: all)")->delimiter(',');

    auto* chn = app.add_subcommand("chain", "build the chaining adversary and measure it");
    chn->add_option("--n", o.n, "number of processes");
    chn->add_option("--k", o.k, "chain length")->check(CLI::PositiveNumber);
    chn->add_option("--out-dir", o.out_dir, "write the trace and CSV files here");

    auto* sky = app.add_subcommand("skyline", "print the feasible (F, f) skyline and protocol table");
    sky->add_option("--n", o.n, "number of processes");

    auto* swp = app.add_subcommand("sweep", "run a scenario over protocols, conflict rates and seeds");
    swp->add_option("--config", o.config, "scenario file")->required();
    swp->add_option("--out-dir", o.out_dir, "write per-point CDFs and sweep.csv here");
    swp->add_option("--jobs", o.jobs, "worker threads (default: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (*sim) return cmd_simulate(o, out, err);
        if (*chk) return cmd_check(o, out, err);
        if (*chn) return cmd_chain(o, out, err);
        if (*sky) return cmd_skyline(o, out, err);
        if (*swp) return cmd_sweep(o, out, err);
    } catch (const ConfigInvalid& e) {
        err << "config error: " << e.what() << "\n";
        return kBadInput;
    } catch (const NotRollOptimal& e) {
        err << e.what() << "\n";
        return kBadInput;
    } catch (const SchedulerDeadlock& e) {
        err << "deadlock: " << e.what() << "\n";
        return kDeadlock;
    } catch (const BoundsExceeded& e) {
        err << e.what() << "\n";
        return kFailed;
    }
    return kBadInput;
}

}  // namespace lsmr::cli
