#include "lsmr/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsmr/bytes.hpp"
#include "lsmr/chain.hpp"

namespace lsmr {

namespace {

using json = nlohmann::json;

// Walks one JSON object, remembering which keys were read so the rest can be refused.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigInvalid(where_ + " must be an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        if (!has(key)) throw ConfigInvalid(where_ + "." + key + " is required");
        return j_.at(key);
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return as<T>(j_.at(key), where_ + "." + key);
    }

    template <typename T>
    T need(const std::string& key) {
        return as<T>(at(key), where_ + "." + key);
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigInvalid("unknown key " + where_ + "." + it.key());
    }

    template <typename T>
    static T as(const json& v, const std::string& where) {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigInvalid(where + " must be a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigInvalid(where + " must be an integer");
                if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0)
                    throw ConfigInvalid(where + " must be non-negative");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigInvalid(where + ": " + e.what());
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

DelayModel parse_delays(const json& j) {
    Section s(j, "delays");
    const auto preset = s.need<std::string>("preset");
    DelayModel d;
    if (preset == "constant") {
        d = DelayModel::constant(s.get<std::int64_t>("value", 1));
    } else if (preset == "uniform") {
        d = DelayModel::uniform(s.get<std::int64_t>("lo", 1), s.get<std::int64_t>("hi", 10));
    } else if (preset == "geo5") {
        d = DelayModel::geo5();
    } else if (preset == "matrix") {
        d = DelayModel::from_matrix(
            s.need<std::vector<std::vector<std::int64_t>>>("matrix"));
    } else {
        throw ConfigInvalid("unknown delay preset '" + preset + "'");
    }
    s.done();
    return d;
}

WorkloadSpec parse_workload(const json& j) {
    Section s(j, "workload");
    WorkloadSpec w;
    w.closed_loop = s.get<bool>("closed_loop", false);
    w.clients_per_process = s.get<std::uint32_t>("clients_per_process", 1);
    w.commands = s.get<std::uint32_t>("commands", 0);
    w.conflict_rate = s.get<double>("conflict_rate", 0.0);
    w.window = s.get<std::int64_t>("window", 100);
    if (s.has("submissions")) {
        const json& list = s.at("submissions");
        if (!list.is_array()) throw ConfigInvalid("workload.submissions must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section e(list[i], "workload.submissions[" + std::to_string(i) + "]");
            WorkloadItem item;
            item.time = e.get<std::int64_t>("time", 0);
            item.process = e.need<ProcessId>("process");
            item.key = e.need<Key>("key");
            item.quorum = e.get<std::vector<ProcessId>>("quorum", {});
            e.done();
            w.submissions.push_back(std::move(item));
        }
    }
    s.done();
    if (w.conflict_rate < 0.0 || w.conflict_rate > 1.0)
        throw ConfigInvalid("workload.conflict_rate must lie in [0, 1]");
    if (w.window <= 0) throw ConfigInvalid("workload.window must be positive");
    if (w.closed_loop && w.clients_per_process == 0)
        throw ConfigInvalid("workload.clients_per_process must be positive");
    return w;
}

void parse_failures(const json& j, ScenarioConfig& c) {
    Section s(j, "failures");
    if (s.has("crashes")) {
        const json& list = s.at("crashes");
        if (!list.is_array()) throw ConfigInvalid("failures.crashes must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section e(list[i], "failures.crashes[" + std::to_string(i) + "]");
            c.crashes.push_back({e.need<ProcessId>("process"), e.get<std::int64_t>("time", 0)});
            e.done();
        }
    }
    c.fd_timeout = s.get<std::int64_t>("fd_timeout", 0);
    const auto rule = s.get<std::string>("recovery_rule", "union");
    if (rule == "union") c.recovery_rule = RecoveryRule::Union;
    else if (rule == "threshold") c.recovery_rule = RecoveryRule::Threshold;
    else throw ConfigInvalid("unknown recovery rule '" + rule + "'");
    s.done();
}

SchedulerSpec parse_scheduler(const json& j) {
    SchedulerSpec out;
    if (j.is_string()) {
        out.kind = j.get<std::string>();
    } else {
        Section s(j, "scheduler");
        out.kind = s.need<std::string>("kind");
        out.k = s.get<std::size_t>("k", 0);
        out.max_crashes = s.get<std::uint32_t>("max_crashes", 0);
        out.max_states = s.get<std::uint64_t>("max_states", out.max_states);
        s.done();
    }
    static const std::set<std::string> kinds = {"nice", "random", "exhaustive", "chain"};
    if (!kinds.count(out.kind)) throw ConfigInvalid("unknown scheduler '" + out.kind + "'");
    return out;
}

SweepSpec parse_sweep(const json& j) {
    Section s(j, "sweep");
    SweepSpec w;
    w.conflict_rates = s.get<std::vector<double>>("conflict_rates", {});
    for (const auto& p : s.get<std::vector<std::string>>("protocols", {}))
        w.protocols.push_back(parse_protocol(p));
    w.seeds = s.get<std::vector<std::uint64_t>>("seeds", {});
    s.done();
    for (double r : w.conflict_rates)
        if (r < 0.0 || r > 1.0) throw ConfigInvalid("sweep.conflict_rates must lie in [0, 1]");
    return w;
}

void check(const ScenarioConfig& c) {
    validate(c.system);
    if (c.delays.kind == DelayModel::Kind::Matrix && c.delays.matrix.size() != c.system.n)
        throw ConfigInvalid("delay matrix must be n by n");
    for (const auto& cr : c.crashes)
        if (cr.process >= c.system.n) throw ConfigInvalid("crash of an unknown process");
    if (c.crashes.size() > c.system.f) throw ConfigInvalid("more crashes than f");
    for (const auto& w : c.workload.submissions) {
        if (w.process >= c.system.n) throw ConfigInvalid("submission at an unknown process");
        for (ProcessId q : w.quorum)
            if (q >= c.system.n) throw ConfigInvalid("quorum names an unknown process");
    }
    const auto& k = c.scheduler.kind;
    if (k == "nice" && !c.crashes.empty())
        throw ConfigInvalid("the nice scheduler runs without crashes");
    if (k == "chain") {
        if (c.scheduler.k == 0) throw ConfigInvalid("scheduler.k must be positive for chain");
        build_chain_plan(c.system, 1);  // throws NotRollOptimal
    }
    if (k == "exhaustive" && c.scheduler.max_crashes > c.system.f)
        throw ConfigInvalid("scheduler.max_crashes exceeds f");
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("not valid JSON: ") + e.what());
    }
    Section s(j, "config");
    ScenarioConfig c;
    const Protocol protocol = parse_protocol(s.need<std::string>("protocol"));
    {
        Section sys(s.at("system"), "system");
        const auto n = sys.need<std::uint32_t>("n");
        c.system = default_config(protocol, n);
        c.system.F = sys.get<std::uint32_t>("F", c.system.F);
        c.system.f = sys.get<std::uint32_t>("f", c.system.f);
        sys.done();
    }
    c.system.consensus = parse_consensus_mode(s.get<std::string>("consensus_mode", "oracle"));
    c.delays = s.has("delays") ? parse_delays(s.at("delays")) : DelayModel::constant(1);
    if (s.has("workload")) c.workload = parse_workload(s.at("workload"));
    if (s.has("failures")) parse_failures(s.at("failures"), c);
    c.quorum_policy = parse_quorum_policy(s.get<std::string>("quorum_policy", "lowest"));
    if (s.has("scheduler")) c.scheduler = parse_scheduler(s.at("scheduler"));
    c.seed = s.get<std::uint64_t>("seed", 0);
    c.max_events = s.get<std::uint64_t>("max_events", c.max_events);
    if (s.has("outputs")) {
        Section o(s.at("outputs"), "outputs");
        c.outputs.trace = o.get<std::string>("trace", "");
        c.outputs.metrics_dir = o.get<std::string>("metrics_dir", "");
        o.done();
    }
    if (s.has("sweep")) c.sweep = parse_sweep(s.at("sweep"));
    s.done();
    check(c);
    return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_config(buf.str());
}

Scenario to_scenario(const ScenarioConfig& c) {
    Scenario s;
    s.config = c.system;
    s.delays = c.delays;
    s.crashes = c.crashes;
    s.fd_timeout = c.fd_timeout;
    s.quorum_policy = c.quorum_policy;
    s.recovery_rule = c.recovery_rule;
    s.scheduler = c.scheduler.kind;
    s.seed = c.seed;
    s.max_events = c.max_events;
    s.items = c.workload.submissions;
    if (c.workload.closed_loop) {
        s.closed_loop = ClosedLoop{c.workload.clients_per_process, c.workload.commands,
                                   c.workload.conflict_rate, 42};
    } else if (c.workload.commands > 0) {
        // a separate stream from the run's own, so adding crashes does not move submits
        std::mt19937_64 rng(bytes::mix(c.seed ^ 0x5eedull));
        auto more = random_workload(c.system.n, c.workload.commands, c.workload.conflict_rate,
                                    c.workload.window, rng);
        s.items.insert(s.items.end(), more.begin(), more.end());
        std::stable_sort(s.items.begin(), s.items.end(),
                         [](const WorkloadItem& a, const WorkloadItem& b) { return a.time < b.time; });
    }
    return s;
}

ExhaustiveSpec to_exhaustive(const ScenarioConfig& c) {
    ExhaustiveSpec e;
    e.config = c.system;
    e.submissions.assign(c.system.n, {});
    for (const auto& w : c.workload.submissions) e.submissions[w.process].push_back(w.key);
    e.max_crashes = c.scheduler.max_crashes;
    e.max_states = c.scheduler.max_states;
    e.recovery_rule = c.recovery_rule;
    return e;
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& c) {
    std::vector<Protocol> protocols{c.system.protocol};
    std::vector<double> rates{c.workload.conflict_rate};
    std::vector<std::uint64_t> seeds{c.seed};
    if (c.sweep) {
        if (!c.sweep->protocols.empty()) protocols = c.sweep->protocols;
        if (!c.sweep->conflict_rates.empty()) rates = c.sweep->conflict_rates;
        if (!c.sweep->seeds.empty()) seeds = c.sweep->seeds;
    }
    std::vector<SweepPoint> out;
    for (Protocol p : protocols)
        for (double r : rates)
            for (std::uint64_t seed : seeds) {
                ScenarioConfig v = c;
                v.sweep.reset();
                if (p != c.system.protocol) {
                    // each protocol runs with its own quorum sizes at this n
                    SystemConfig d = default_config(p, c.system.n);
                    d.consensus = c.system.consensus;
                    v.system = d;
                }
                v.workload.conflict_rate = r;
                v.seed = seed;
                check(v);
                out.push_back({p, r, seed, std::move(v)});
            }
    return out;
}

}  // namespace lsmr
