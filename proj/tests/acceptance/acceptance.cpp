// Runs every acceptance criterion and prints one PASS/FAIL line for each.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "lsmr/analysis.hpp"
#include "lsmr/chain.hpp"
#include "lsmr/scenario.hpp"
#include "lsmr/simulation.hpp"
#include "lsmr/sweep.hpp"
#include "lsmr/verification.hpp"

using namespace lsmr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Failures counted per property, with the first few reported.
struct Tally {
    std::map<std::string, std::size_t> failures;
    std::vector<std::string> samples;

    void record(const std::string& where, const std::vector<Verdict>& vs) {
        for (const Verdict& v : vs) {
            if (v.pass) continue;
            ++failures[v.property];
            if (samples.size() < 5) samples.push_back(where + " " + v.property + ": " + v.detail);
        }
    }
    std::size_t total() const {
        std::size_t n = 0;
        for (auto& [k, v] : failures) n += v;
        return n;
    }
    std::size_t of(const std::vector<std::string>& names) const {
        std::size_t n = 0;
        for (auto& name : names)
            if (auto it = failures.find(name); it != failures.end()) n += it->second;
        return n;
    }
    std::string describe() const {
        std::ostringstream o;
        for (auto& [k, v] : failures) o << ' ' << k << '=' << v;
        for (auto& s : samples) o << "\n    " << s;
        return o.str();
    }
};

const std::vector<std::string> kGeneric = {"generic-stability", "generic-consistency"};

std::vector<std::string> without_generic(const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (auto& n : names)
        if (std::find(kGeneric.begin(), kGeneric.end(), n) == kGeneric.end()) out.push_back(n);
    return out;
}

// Generic reductions are tallied apart so that the reduction criterion can report them.
Tally suite_tally, suite_generic, exhaustive_tally, exhaustive_generic;
std::size_t suite_traces = 0, exhaustive_traces = 0;

Outcome safety_suite() {
    const auto t0 = Clock::now();
    const auto names = without_generic(safety_properties());
    std::size_t deadlocks = 0;
    std::map<std::string, std::size_t> per_protocol;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        Scenario s = random_scenario(seed);
        RunResult r = run(s);
        if (r.deadlock) ++deadlocks;
        ++per_protocol[to_string(s.config.protocol)];
        const std::string where = "seed " + std::to_string(seed);
        suite_tally.record(where, check_properties(r.trace, names, false));
        suite_generic.record(where, check_generic(r.trace));
        ++suite_traces;
    }
    Outcome o;
    o.pass = suite_tally.total() == 0 && deadlocks == 0;
    std::ostringstream d;
    d << "10000 runs (";
    for (auto& [p, n] : per_protocol) d << p << ' ' << n << ' ';
    d << "), failures " << suite_tally.total() << ", deadlocks " << deadlocks << ", "
      << std::fixed << std::setprecision(1) << seconds_since(t0) << " s" << suite_tally.describe();
    o.detail = d.str();
    return o;
}

struct Combo {
    std::string label;
    Protocol protocol;
    std::uint32_t n;
    std::vector<std::vector<Key>> submissions;
    std::uint32_t max_crashes;
    std::vector<ProcessId> crashable;
};

Outcome exhaustive_oracle() {
    const auto t0 = Clock::now();
    const std::vector<Combo> combos = {
        {"epaxos n=3 3 cmds 1 crash", Protocol::EPaxos, 3, {{1}, {1}, {1}}, 1, {}},
        {"epaxos n=3 3 cmds mixed keys 1 crash", Protocol::EPaxos, 3, {{1, 2}, {1}, {}}, 1, {}},
        {"epaxos n=2 4 cmds", Protocol::EPaxos, 2, {{1, 1}, {1, 1}}, 0, {}},
        {"mencius n=3 3 cmds", Protocol::Mencius, 3, {{1}, {1}, {1}}, 0, {}},
        {"mencius n=3 2 cmds 1 crash", Protocol::Mencius, 3, {{1}, {1}, {}}, 1, {}},
        {"mencius n=3 3 cmds crash p3", Protocol::Mencius, 3, {{1}, {1}, {1}}, 1, {2}},
        {"rotating n=3 3 cmds 1 crash", Protocol::Rotating, 3, {{1}, {1}, {1}}, 1, {}},
    };
    auto names = without_generic(safety_properties());
    names.push_back("reliability");
    std::ostringstream d;
    bool ok = true;
    for (const Combo& c : combos) {
        const auto c0 = Clock::now();
        ExhaustiveSpec spec;
        spec.config = default_config(c.protocol, c.n);
        spec.submissions = c.submissions;
        spec.max_crashes = c.max_crashes;
        spec.crashable = c.crashable;
        ExhaustiveStats stats;
        try {
            stats = explore(spec, [&](const Trace& t) {
                exhaustive_tally.record(c.label, check_properties(t, names, false));
                exhaustive_generic.record(c.label, check_generic(t));
                ++exhaustive_traces;
                return true;
            });
        } catch (const BoundsExceeded& e) {
            ok = false;
            d << "\n    " << c.label << ": " << e.what();
            continue;
        }
        d << "\n    " << c.label << ": states " << stats.states << ", maximal runs " << stats.maximal_runs
          << ", " << std::fixed << std::setprecision(1) << seconds_since(c0) << " s";
    }
    std::size_t caught = 0, fixtures = 0;
    for (const auto& entry : std::filesystem::directory_iterator(std::string(LSMR_FIXTURES) + "/violations")) {
        ++fixtures;
        const std::string name = entry.path().stem().string();
        if (is_property(name) && !check_property(load_trace(entry.path().string()), name).pass) ++caught;
        else d << "\n    fixture " << name << " was accepted";
    }
    Outcome o;
    o.pass = ok && exhaustive_tally.total() == 0 && caught == fixtures && fixtures == all_properties().size();
    std::ostringstream head;
    head << combos.size() << " state spaces, failures " << exhaustive_tally.total() << ", forged traces rejected "
         << caught << "/" << fixtures << ", " << std::fixed << std::setprecision(1) << seconds_since(t0) << " s"
         << exhaustive_tally.describe();
    o.detail = head.str() + d.str();
    return o;
}

Outcome optimal_latency() {
    std::size_t fast_announces = 0, slow_or_unflagged = 0, rotating_announces = 0, rotating_flagged = 0;
    std::vector<std::string> samples;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Scenario s;
        const auto protocol = static_cast<Protocol>(seed % 3);
        const std::uint32_t n = 3 + 2 * static_cast<std::uint32_t>((seed / 3) % 3);
        s.config = default_config(protocol, n);
        s.delays = DelayModel::uniform(1, 10);
        std::mt19937_64 rng(seed);
        s.items = random_workload(n, 12, 0.0, 60, rng);  // every command on its own key
        s.quorum_policy = QuorumPolicy::Random;
        s.seed = seed;
        RunResult r = run(s);
        auto contention = contended_all(r.trace);
        for (const AnnounceInfo& a : announces(r.trace)) {
            if (a.recovery) continue;
            if (protocol == Protocol::Rotating) {
                ++rotating_announces;
                if (a.flag) ++rotating_flagged;
                continue;
            }
            if (contention[a.cmd]) continue;
            ++fast_announces;
            if (a.latency != 2 || !a.flag) {
                ++slow_or_unflagged;
                if (samples.size() < 3)
                    samples.push_back("seed " + std::to_string(seed) + " " + to_string(a.cmd) + " latency " +
                                      std::to_string(a.latency) + " flag " + (a.flag ? "true" : "false"));
            }
        }
    }
    Outcome o;
    o.pass = fast_announces > 0 && slow_or_unflagged == 0 && rotating_announces > 0 && rotating_flagged == 0;
    std::ostringstream d;
    d << "1000 runs, epaxos/mencius announces " << fast_announces << " (off the 2-delay fast path: "
      << slow_or_unflagged << "), rotating announces " << rotating_announces << " (flagged: " << rotating_flagged
      << ")";
    for (auto& s : samples) d << "\n    " << s;
    o.detail = d.str();
    return o;
}

std::string sky_string(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& sky) {
    std::string s;
    for (auto [F, f] : sky) s += "(" + std::to_string(F) + "," + std::to_string(f) + ")";
    return s;
}

Outcome roll_table() {
    using Sky = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
    Outcome o;
    std::ostringstream d;
    const Sky s5 = roll_skyline(5), s7 = roll_skyline(7);
    if (s5 != Sky{{2, 2}} || s7 != Sky{{2, 3}, {3, 2}}) o.pass = false;
    d << "skyline n=5 " << sky_string(s5) << ", n=7 " << sky_string(s7);
    // Odd sizes and n = 8, where lying on the skyline and n = 2f + 1 coincide.
    for (std::uint32_t n : {3u, 5u, 7u, 8u, 9u, 11u}) {
        const std::uint32_t f = (n - 1) / 2;
        auto rot = classify(Protocol::Rotating, n);
        auto men = classify(Protocol::Mencius, n);
        auto ep = classify(Protocol::EPaxos, n);
        bool row = rot.fast_quorum == 0 && !rot.optimal_latency && !rot.roll_optimal && rot.f == f &&
                   men.fast_quorum == n && men.f == f && men.optimal_latency && !men.roll_optimal &&
                   ep.fast_quorum == (3 * n) / 4 && ep.f == f && ep.optimal_latency &&
                   ep.roll_optimal == (n == 2 * f + 1);
        if (!row) {
            o.pass = false;
            d << "; table mismatch at n=" << n;
        }
    }
    d << "; table rows n in {3,5,7,8,9,11} match";
    o.detail = d.str();
    return o;
}

Outcome chaining() {
    Outcome o;
    std::ostringstream d;
    double worst = 0;
    std::size_t good = 0;
    for (std::size_t k = 1; k <= 32; ++k) {
        const auto t0 = Clock::now();
        ChainPlan plan = build_chain_plan(chain_config(5), k);
        ChainRun r = run_chain(plan);
        const std::size_t live = max_live_chain(r.trace, r.prefix_end);
        const bool nice = std::none_of(r.trace.steps.begin(), r.trace.steps.end(), [](const Step& s) {
            return s.event == EventType::Crash || s.event == EventType::Suspect;
        });
        const double secs = seconds_since(t0);
        worst = std::max(worst, secs);
        if (live == k && r.live_chain == k && r.asynchrony == 2 && nice && plan_violations(plan).empty() &&
            secs <= 10.0)
            ++good;
        else
            d << "\n    k=" << k << ": live " << live << ", asynchrony " << r.asynchrony << ", " << secs << " s";
    }
    ChainPlan p7 = build_chain_plan(chain_config(5), 7);
    const bool shape = plan_violations(p7).empty() && p7.ranks[0].quorum == std::vector<ProcessId>{0, 1, 2} &&
                       p7.ranks[1].quorum == std::vector<ProcessId>{2, 3, 4} &&
                       p7.ranks[1].early == std::vector<ProcessId>{2};
    o.pass = good == 32 && shape;
    std::ostringstream head;
    head << "k=1..32 with live chain k and announce asynchrony 2: " << good << "/32, slowest "
         << std::fixed << std::setprecision(2) << worst << " s; k=7 quorums "
         << (shape ? "Q1={p1,p2,p3} Q2={p3,p4,p5} P2={p3}" : "differ from the expected block structure");
    o.detail = head.str() + d.str();
    return o;
}

Outcome reduction() {
    Outcome o;
    const std::size_t bad = suite_generic.total() + exhaustive_generic.total();
    o.pass = bad == 0 && suite_traces > 0 && exhaustive_traces > 0;
    o.detail = std::to_string(suite_traces + exhaustive_traces) + " traces reduced to logs, violations " +
               std::to_string(bad) + suite_generic.describe() + exhaustive_generic.describe();
    return o;
}

Outcome latency_trend() {
    const auto t0 = Clock::now();
    ScenarioConfig cfg = load_scenario_config(std::string(LSMR_CONFIGS) + "/conflict_sweep.json");
    auto points = sweep_points(cfg);
    auto results = run_sweep(points, 0);
    std::map<std::pair<Protocol, double>, const SweepResult*> at;
    for (const auto& r : results) {
        if (!r.error.empty() || r.deadlock) {
            Outcome o{false, to_string(r.protocol) + std::string(" run failed: ") + r.error};
            return o;
        }
        at[{r.protocol, r.conflict_rate}] = &r;
    }
    auto rates = cfg.sweep->conflict_rates;
    const double lo = *std::min_element(rates.begin(), rates.end());
    const double hi = *std::max_element(rates.begin(), rates.end());
    const double ep_lo = at.at({Protocol::EPaxos, lo})->summary.execute_p99;
    const double ep_hi = at.at({Protocol::EPaxos, hi})->summary.execute_p99;
    double m_min = 1e300, m_max = 0;
    for (double r : rates) {
        const double p = at.at({Protocol::Mencius, r})->summary.execute_p99;
        m_min = std::min(m_min, p);
        m_max = std::max(m_max, p);
    }
    const double corr = at.at({Protocol::EPaxos, hi})->summary.batch_correlation.value_or(0.0);
    const double ratio = ep_hi / ep_lo;
    const double spread = (m_max - m_min) / m_min;
    Outcome o;
    o.pass = ratio >= 1.5 && spread < 0.2 && corr > 0.3;
    std::ostringstream d;
    d << std::fixed << std::setprecision(2) << "epaxos p99 " << ep_lo / 10 << " ms -> " << ep_hi / 10
      << " ms (x" << ratio << "), mencius p99 spread " << spread * 100 << "%, epaxos latency/batch correlation "
      << corr << " at rho=" << hi << ", " << std::setprecision(1) << seconds_since(t0) << " s";
    o.detail = d.str();
    return o;
}

std::string bytes_of(const Trace& t) {
    std::ostringstream out;
    write_jsonl(t, out);
    return out.str();
}

Outcome determinism() {
    std::size_t same = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed, ++total)
        if (bytes_of(run(random_scenario(seed)).trace) == bytes_of(run(random_scenario(seed)).trace)) ++same;
    for (const char* file : {"epaxos5_nice.json", "random_crash.json", "geo5_closed_loop.json"}) {
        ScenarioConfig cfg = load_scenario_config(std::string(LSMR_CONFIGS) + "/" + file);
        cfg.workload.commands = std::min<std::uint32_t>(cfg.workload.commands, 300);
        ++total;
        if (bytes_of(run(to_scenario(cfg)).trace) == bytes_of(run(to_scenario(cfg)).trace)) ++same;
    }
    ChainPlan plan = build_chain_plan(chain_config(5), 7);
    ++total;
    if (bytes_of(run_chain(plan).trace) == bytes_of(run_chain(plan).trace)) ++same;
    Outcome o;
    o.pass = same == total;
    o.detail = std::to_string(same) + "/" + std::to_string(total) + " scenarios re-ran byte-identically";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*fn)();
    };
    // The reduction criterion reuses the traces collected by the first two.
    const Criterion criteria[] = {
        {1, "safety invariant suite", safety_suite},
        {2, "exhaustive oracle", exhaustive_oracle},
        {3, "optimal latency", optimal_latency},
        {4, "ROLL skyline and classification", roll_table},
        {5, "chaining effect", chaining},
        {6, "generic log reduction", reduction},
        {7, "conflict-rate latency trend", latency_trend},
        {8, "determinism", determinism},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
                  << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}
