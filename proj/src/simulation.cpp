#include "lsmr/simulation.hpp"

#include <algorithm>
#include <memory>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "lsmr/bytes.hpp"

namespace lsmr {

std::int64_t DelayModel::sample(ProcessId from, ProcessId to, std::mt19937_64& rng) const {
    switch (kind) {
        case Kind::Constant: return value;
        case Kind::Uniform: return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
        case Kind::Matrix: return matrix.at(from).at(to);
    }
    return value;
}

std::int64_t DelayModel::max_delay() const {
    switch (kind) {
        case Kind::Constant: return value;
        case Kind::Uniform: return hi;
        case Kind::Matrix: {
            std::int64_t m = 0;
            for (auto& row : matrix)
                for (auto v : row) m = std::max(m, v);
            return m;
        }
    }
    return value;
}

double DelayModel::mean(ProcessId from, ProcessId to) const {
    switch (kind) {
        case Kind::Constant: return static_cast<double>(value);
        case Kind::Uniform: return (lo + hi) / 2.0;
        case Kind::Matrix: return static_cast<double>(matrix.at(from).at(to));
    }
    return 0;
}

DelayModel DelayModel::constant(std::int64_t v) {
    DelayModel d;
    d.kind = Kind::Constant;
    d.value = v;
    return d;
}

DelayModel DelayModel::uniform(std::int64_t lo, std::int64_t hi) {
    if (lo < 0 || hi < lo) throw ConfigInvalid("uniform delays need 0 <= min <= max");
    DelayModel d;
    d.kind = Kind::Uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

DelayModel DelayModel::from_matrix(std::vector<std::vector<std::int64_t>> m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != m.size()) throw ConfigInvalid("delay matrix must be square");
        for (auto v : m[i])
            if (v < 0) throw ConfigInvalid("delays must be non-negative");
    }
    DelayModel d;
    d.kind = Kind::Matrix;
    d.matrix = std::move(m);
    return d;
}

DelayModel DelayModel::geo5() {
    // round trips in ms between South Carolina, Finland, Quebec, Australia, Taiwan
    const std::int64_t ping[5][5] = {{0, 123, 25, 199, 184},
                                     {123, 0, 120, 308, 289},
                                     {25, 120, 0, 202, 182},
                                     {199, 308, 202, 0, 127},
                                     {184, 289, 182, 127, 0}};
    std::vector<std::vector<std::int64_t>> m(5, std::vector<std::int64_t>(5));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) m[i][j] = ping[i][j] * 5;
    return from_matrix(std::move(m));
}

const char* to_string(QuorumPolicy q) {
    switch (q) {
        case QuorumPolicy::Lowest: return "lowest";
        case QuorumPolicy::Nearest: return "nearest";
        case QuorumPolicy::Random: return "random";
    }
    return "?";
}

QuorumPolicy parse_quorum_policy(const std::string& s) {
    if (s == "lowest") return QuorumPolicy::Lowest;
    if (s == "nearest") return QuorumPolicy::Nearest;
    if (s == "random") return QuorumPolicy::Random;
    throw ConfigInvalid("unknown quorum policy '" + s + "'");
}

std::vector<ProcessId> pick_quorum(ProcessId coord, const SystemConfig& cfg, QuorumPolicy policy,
                                   const DelayModel& delays, std::mt19937_64& rng) {
    if (policy == QuorumPolicy::Lowest) return default_quorum(coord, cfg);
    std::vector<ProcessId> others;
    for (ProcessId p = 0; p < cfg.n; ++p)
        if (p != coord) others.push_back(p);
    if (policy == QuorumPolicy::Nearest) {
        std::stable_sort(others.begin(), others.end(), [&](ProcessId a, ProcessId b) {
            return delays.mean(coord, a) < delays.mean(coord, b);
        });
    } else {
        std::shuffle(others.begin(), others.end(), rng);
    }
    std::vector<ProcessId> q{coord};
    q.insert(q.end(), others.begin(), others.begin() + (cfg.fast_quorum_size() - 1));
    std::sort(q.begin(), q.end());
    return q;
}

std::vector<WorkloadItem> random_workload(std::uint32_t n, std::uint32_t commands, double rho,
                                          std::int64_t window, std::mt19937_64& rng) {
    std::vector<WorkloadItem> out;
    std::uniform_int_distribution<std::int64_t> when(0, std::max<std::int64_t>(window - 1, 0));
    std::uniform_int_distribution<ProcessId> who(0, n - 1);
    std::bernoulli_distribution hot(rho);
    for (std::uint32_t i = 0; i < commands; ++i) {
        WorkloadItem w;
        w.time = when(rng);
        w.process = who(rng);
        w.key = hot(rng) ? 42 : 1000 + i;
        out.push_back(w);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const WorkloadItem& a, const WorkloadItem& b) { return a.time < b.time; });
    return out;
}

Scenario random_scenario(std::uint64_t seed) {
    static const std::uint32_t sizes[] = {3, 5, 7};
    static const double rates[] = {0.0, 0.05, 0.3, 1.0};
    std::mt19937_64 rng(bytes::mix(seed));
    Scenario s;
    const auto protocol = static_cast<Protocol>(seed % 3);
    const std::uint32_t n = sizes[rng() % 3];
    s.config = default_config(protocol, n);
    s.config.consensus = (seed / 3) % 2 ? ConsensusMode::Quorum : ConsensusMode::Oracle;
    s.delays = DelayModel::uniform(1, 10);
    const double rho = rates[rng() % 4];
    const std::uint32_t commands = 4 + static_cast<std::uint32_t>(rng() % 7);
    s.items = random_workload(n, commands, rho, 40, rng);
    const std::uint32_t crashes = static_cast<std::uint32_t>(rng() % (s.config.f + 1));
    std::vector<ProcessId> procs(n);
    std::iota(procs.begin(), procs.end(), 0);
    std::shuffle(procs.begin(), procs.end(), rng);
    for (std::uint32_t i = 0; i < crashes; ++i)
        s.crashes.push_back({procs[i], static_cast<std::int64_t>(rng() % 80)});
    s.quorum_policy = QuorumPolicy::Random;
    s.scheduler = crashes ? "random" : "nice";
    s.seed = seed;
    return s;
}

namespace {

struct Event {
    enum class Kind : std::uint8_t { Crash, Deliver, Suspect, Timer, Submit };
    std::int64_t time = 0;
    std::uint64_t order = 0;
    Kind kind = Kind::Deliver;
    MessageId message = 0;
    ProcessId process = 0;
    ProcessId other = 0;
    std::size_t item = 0;
    TimerRequest timer;

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        return order > o.order;
    }
};

class TimedRun {
public:
    explicit TimedRun(const Scenario& s) : s_(s), rng_(s.seed), engine_(make_engine(s)) {
        fd_timeout_ = s.fd_timeout > 0 ? s.fd_timeout : 10 * std::max<std::int64_t>(1, s.delays.max_delay());
        items_ = s.items;
    }

    RunResult go() {
        if (s_.scheduler == "nice" && !s_.crashes.empty())
            throw ConfigInvalid("a nice run has no crashes");
        for (const auto& c : s_.crashes) {
            if (c.process >= s_.config.n) throw ConfigInvalid("crash of an unknown process");
            Event e;
            e.kind = Event::Kind::Crash;
            e.time = c.time;
            e.process = c.process;
            push(e);
        }
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (items_[i].process >= s_.config.n) throw ConfigInvalid("submit at an unknown process");
            schedule_submit(i, items_[i].time);
        }
        if (s_.closed_loop) start_clients();

        RunResult r;
        while (!queue_.empty()) {
            if (r.events >= s_.max_events) {
                r.deadlock = true;
                r.deadlock_reason = "event budget exhausted";
                break;
            }
            Event e = queue_.top();
            queue_.pop();
            ++r.events;
            engine_.set_time(e.time);
            dispatch(e);
            collect();
        }
        r.trace.config = s_.config;
        r.trace.scheduler = s_.scheduler;
        r.trace.seed = s_.seed;
        r.trace.steps = engine_.take_steps();
        if (!r.deadlock) find_stall(r);
        return r;
    }

private:
    static Engine make_engine(const Scenario& s) {
        EngineOptions o;
        o.recovery_rule = s.recovery_rule;
        return Engine(s.config, o);
    }

    void push(Event e) {
        e.order = order_++;
        queue_.push(e);
    }

    void schedule_submit(std::size_t item, std::int64_t at) {
        Event e;
        e.kind = Event::Kind::Submit;
        e.time = at;
        e.item = item;
        push(e);
    }

    void start_clients() {
        const ClosedLoop& cl = *s_.closed_loop;
        std::uniform_int_distribution<std::int64_t> stagger(0, std::max<std::int64_t>(0, s_.delays.max_delay()));
        for (std::uint32_t c = 0; c < cl.clients_per_process; ++c)
            for (ProcessId p = 0; p < s_.config.n; ++p) next_client_command(p, stagger(rng_));
    }

    void next_client_command(ProcessId p, std::int64_t at) {
        const ClosedLoop& cl = *s_.closed_loop;
        if (issued_ >= cl.commands) return;
        WorkloadItem w;
        w.time = at;
        w.process = p;
        w.key = std::bernoulli_distribution(cl.conflict_rate)(rng_) ? cl.hot_key : 1'000'000 + issued_;
        ++issued_;
        items_.push_back(w);
        client_item_.insert(items_.size() - 1);
        schedule_submit(items_.size() - 1, at);
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case Event::Kind::Crash: {
                engine_.crash(e.process);
                for (ProcessId q = 0; q < s_.config.n; ++q) {
                    if (q == e.process) continue;
                    Event sus;
                    sus.kind = Event::Kind::Suspect;
                    sus.time = e.time + fd_timeout_;
                    sus.process = q;
                    sus.other = e.process;
                    push(sus);
                }
                return;
            }
            case Event::Kind::Deliver:
                if (engine_.in_flight().count(e.message)) engine_.deliver(e.message);
                return;
            case Event::Kind::Suspect:
                if (!engine_.crashed(e.process)) engine_.suspect(e.process, e.other);
                return;
            case Event::Kind::Timer: engine_.fire_timer(e.timer); return;
            case Event::Kind::Submit: {
                const WorkloadItem& w = items_[e.item];
                if (engine_.crashed(w.process)) return;
                std::vector<ProcessId> q = w.quorum;
                if (q.empty() && s_.config.protocol == Protocol::EPaxos)
                    q = pick_quorum(w.process, s_.config, s_.quorum_policy, s_.delays, rng_);
                CommandId id = engine_.submit(w.process, w.key, {}, q);
                if (client_item_.count(e.item)) client_cmds_.emplace(id, w.process);
                return;
            }
        }
    }

    void collect() {
        for (MessageId m : engine_.take_sent()) {
            const Message& msg = engine_.in_flight().at(m);
            Event e;
            e.kind = Event::Kind::Deliver;
            e.message = m;
            e.time = engine_.time() + s_.delays.sample(msg.src, msg.dst, rng_);
            push(e);
        }
        const std::int64_t base = 4 * std::max<std::int64_t>(1, s_.delays.max_delay());
        for (const TimerRequest& t : engine_.take_timers()) {
            Event e;
            e.kind = Event::Kind::Timer;
            e.timer = t;
            e.time = engine_.time() + base +
                     std::uniform_int_distribution<std::int64_t>(0, base * t.attempt)(rng_);
            push(e);
        }
        for (const ExecutionNote& x : engine_.take_executions()) {
            auto it = client_cmds_.find(x.cmd);
            if (it == client_cmds_.end() || it->second != x.process) continue;
            client_cmds_.erase(it);
            next_client_command(x.process, engine_.time());
        }
    }

    void find_stall(RunResult& r) const {
        std::set<CommandId> submitted;
        for (const Step& s : r.trace.steps)
            if (s.kind == StepKind::Invoke && s.event == EventType::Submit && !s.recovery)
                submitted.insert(s.cmd);
        for (ProcessId p = 0; p < s_.config.n; ++p) {
            if (engine_.crashed(p)) continue;
            for (CommandId c : submitted) {
                if (!engine_.process(p).store.is_decided(c)) {
                    r.deadlock = true;
                    r.deadlock_reason = "command " + to_string(c) + " undecided at process " +
                                        std::to_string(p) + " with no step left to take";
                    return;
                }
            }
        }
    }

    const Scenario& s_;
    std::mt19937_64 rng_;
    Engine engine_;
    std::int64_t fd_timeout_ = 0;
    std::vector<WorkloadItem> items_;
    std::set<std::size_t> client_item_;
    std::map<CommandId, ProcessId> client_cmds_;
    std::uint32_t issued_ = 0;
    std::uint64_t order_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
};

}  // namespace

RunResult run(const Scenario& s) {
    validate(s.config);
    return TimedRun(s).go();
}

namespace {

// Steps live in a shared parent-linked list so copying a node does not copy its history.
struct StepLog {
    std::shared_ptr<const StepLog> parent;
    std::vector<Step> steps;
};

struct Node {
    Engine engine;
    std::vector<std::size_t> next;
    std::uint32_t crashes = 0;
    std::shared_ptr<const StepLog> log;
};

std::vector<Step> history(const Node& n) {
    std::vector<const StepLog*> chain;
    std::size_t total = 0;
    for (const StepLog* l = n.log.get(); l; l = l->parent.get()) {
        chain.push_back(l);
        total += l->steps.size();
    }
    std::vector<Step> out;
    out.reserve(total);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        out.insert(out.end(), (*it)->steps.begin(), (*it)->steps.end());
    return out;
}

struct Action {
    enum class Kind : std::uint8_t { Submit, Deliver, Crash, Suspect };
    Kind kind;
    std::uint64_t a = 0;
    ProcessId b = 0;
};

struct HashPair {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& h) const {
        return h.first ^ (h.second * 0x9e3779b97f4a7c15ull);
    }
};

std::pair<std::uint64_t, std::uint64_t> state_hash(const Node& n) {
    std::string s;
    n.engine.canonical(s);
    for (std::size_t i : n.next) bytes::put(s, static_cast<std::uint64_t>(i));
    bytes::put(s, static_cast<std::uint64_t>(n.crashes));
    return bytes::hash128(s);
}

std::vector<Action> enabled(const Node& n, const ExhaustiveSpec& spec) {
    std::vector<Action> out;
    const std::uint32_t procs = spec.config.n;
    for (ProcessId p = 0; p < procs; ++p)
        if (!n.engine.crashed(p) && n.next[p] < spec.submissions[p].size())
            out.push_back({Action::Kind::Submit, p, 0});
    // An inert delivery commutes with every other action and cannot be disabled, so
    // taking it first still reaches every final state.
    for (auto& [id, m] : n.engine.in_flight())
        if (n.engine.inert(id)) return {{Action::Kind::Deliver, id, 0}};
    for (auto& [id, m] : n.engine.in_flight()) out.push_back({Action::Kind::Deliver, id, 0});
    if (n.crashes < spec.max_crashes) {
        for (ProcessId p = 0; p < procs; ++p) {
            if (n.engine.crashed(p)) continue;
            if (!spec.crashable.empty() &&
                std::find(spec.crashable.begin(), spec.crashable.end(), p) == spec.crashable.end())
                continue;
            out.push_back({Action::Kind::Crash, p, 0});
        }
    }
    for (ProcessId c = 0; c < procs; ++c) {
        if (!n.engine.crashed(c)) continue;
        bool draining = false;
        for (auto& [id, m] : n.engine.in_flight())
            if (m.src == c) draining = true;
        if (draining) continue;
        for (ProcessId q = 0; q < procs; ++q)
            if (!n.engine.crashed(q) && !n.engine.process(q).suspected[c])
                out.push_back({Action::Kind::Suspect, q, c});
    }
    return out;
}

void apply(Node& n, const Action& a, const ExhaustiveSpec& spec) {
    Engine& e = n.engine;
    e.set_time(e.time() + 1);
    switch (a.kind) {
        case Action::Kind::Submit: {
            ProcessId p = static_cast<ProcessId>(a.a);
            e.submit(p, spec.submissions[p][n.next[p]++]);
            break;
        }
        case Action::Kind::Deliver: e.deliver(a.a); break;
        case Action::Kind::Crash:
            e.crash(static_cast<ProcessId>(a.a));
            ++n.crashes;
            break;
        case Action::Kind::Suspect: e.suspect(static_cast<ProcessId>(a.a), a.b); break;
    }
    e.take_sent();
    e.take_timers();
    e.take_executions();
    auto log = std::make_shared<StepLog>();
    log->parent = std::move(n.log);
    log->steps = e.take_steps();
    n.log = std::move(log);
}

}  // namespace

ExhaustiveStats explore(const ExhaustiveSpec& spec,
                        const std::function<bool(const Trace&)>& visit) {
    validate(spec.config);
    std::size_t total = 0;
    for (auto& s : spec.submissions) total += s.size();
    if (spec.config.n > 3 || total > 4 || spec.submissions.size() != spec.config.n)
        throw BoundsExceeded("exhaustive mode is limited to 3 processes and 4 commands");
    if (spec.config.consensus != ConsensusMode::Oracle)
        throw BoundsExceeded("exhaustive mode runs with oracle consensus");

    ExhaustiveStats stats;
    std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, HashPair> seen;
    std::vector<Node> stack;
    stack.push_back(Node{Engine(spec.config, EngineOptions{spec.recovery_rule, {}}), std::vector<std::size_t>(spec.config.n, 0), 0, nullptr});
    seen.insert(state_hash(stack.back()));
    stats.states = 1;
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        std::vector<Action> acts = enabled(node, spec);
        if (acts.empty()) {
            ++stats.maximal_runs;
            Trace t;
            t.config = spec.config;
            t.scheduler = "exhaustive";
            t.steps = history(node);
            if (!visit(t)) return stats;
            continue;
        }
        // push in reverse so the first enabled action is explored first
        for (auto it = acts.rbegin(); it != acts.rend(); ++it) {
            Node child = node;
            apply(child, *it, spec);
            ++stats.transitions;
            if (!seen.insert(state_hash(child)).second) continue;
            if (++stats.states > spec.max_states)
                throw BoundsExceeded("state budget exhausted");
            stack.push_back(std::move(child));
        }
    }
    return stats;
}

}  // namespace lsmr
