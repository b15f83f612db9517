#include "lsmr/verification.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "lsmr/analysis.hpp"
#include "lsmr/replay.hpp"

namespace lsmr {

namespace {

Verdict make(const std::string& name) {
    Verdict v;
    v.property = name;
    return v;
}

void fail(Verdict& v, std::string detail, std::vector<std::uint64_t> witness) {
    if (!v.pass) return;  // keep the first violation
    v.pass = false;
    v.detail = std::move(detail);
    v.counterexample = std::move(witness);
}

bool is_decision(const Step& s) {
    return s.kind == StepKind::Local &&
           (s.event == EventType::Commit || s.event == EventType::Abort);
}

bool is_original_submit(const Step& s) {
    return s.kind == StepKind::Invoke && s.event == EventType::Submit && !s.recovery;
}

std::set<ProcessId> crashed_processes(const Trace& t) {
    std::set<ProcessId> out;
    for (const Step& s : t.steps)
        if (s.event == EventType::Crash) out.insert(s.process);
    return out;
}

struct Keys {
    std::map<CommandId, Key> keys;
    bool conflict(CommandId a, CommandId b) const {
        if (a == b) return false;
        auto x = keys.find(a), y = keys.find(b);
        return x != keys.end() && y != keys.end() && x->second == y->second;
    }
};

}  // namespace

const std::vector<std::string>& safety_properties() {
    static const std::vector<std::string> v = {
        "validity",   "consistency",         "stability",          "invariant-1",
        "invariant-2", "visibility",         "weak-agreement",     "consensus-agreement",
        "consensus-validity", "generic-stability", "generic-consistency"};
    return v;
}

const std::vector<std::string>& roll_properties() {
    static const std::vector<std::string> v = {"reliability", "optimal-latency", "load-balancing"};
    return v;
}

const std::vector<std::string>& all_properties() {
    static const std::vector<std::string> v = [] {
        std::vector<std::string> out = safety_properties();
        out.insert(out.end(), roll_properties().begin(), roll_properties().end());
        return out;
    }();
    return v;
}

bool is_property(const std::string& name) {
    const auto& all = all_properties();
    return std::find(all.begin(), all.end(), name) != all.end();
}

std::map<CommandId, Key> command_keys(const Trace& t) {
    std::map<CommandId, Key> out;
    for (const Step& s : t.steps)
        if (s.kind == StepKind::Invoke && s.event == EventType::Submit && s.body)
            out.emplace(s.cmd, s.body->key);
    return out;
}

Verdict check_validity(const Trace& t) {
    Verdict v = make("validity");
    std::map<CommandId, std::uint64_t> submitted;
    for (const Step& s : t.steps) {
        if (is_original_submit(s)) submitted.emplace(s.cmd, s.seq);
        // an abort may close a slot nobody used; only commits must trace back to a submit
        if (is_decision(s) && s.value.is_committed() && !submitted.count(s.cmd))
            fail(v, "command " + to_string(s.cmd) + " committed without being submitted", {s.seq});
    }
    return v;
}

Verdict check_consistency(const Trace& t) {
    Verdict v = make("consistency");
    Keys keys{command_keys(t)};
    struct Proc {
        DepsStore store;
        std::map<Key, std::vector<std::pair<CommandId, std::uint64_t>>> committed;
    };
    std::vector<Proc> procs(t.config.n);
    for (const Step& s : t.steps) {
        if (!is_decision(s) || s.process >= procs.size()) continue;
        Proc& P = procs[s.process];
        try {
            if (!P.store.apply(s.cmd, s.value)) continue;
        } catch (const ConflictingCommit&) {
            continue;
        }
        if (!s.value.is_committed()) continue;
        auto k = keys.keys.find(s.cmd);
        if (k == keys.keys.end()) continue;
        auto& same = P.committed[k->second];
        for (auto& [d, seq] : same) {
            if (contains(P.store.deps(s.cmd).ids, d) || contains(P.store.deps(d).ids, s.cmd))
                continue;
            fail(v,
                 "conflicting " + to_string(d) + " and " + to_string(s.cmd) +
                     " committed at process " + std::to_string(s.process) +
                     " without either in the other's deps",
                 {seq, s.seq});
        }
        same.emplace_back(s.cmd, s.seq);
    }
    return v;
}

Verdict check_stability(const Trace& t) {
    Verdict v = make("stability");
    StoreReplay replay(t.config.n);
    std::map<CommandId, std::pair<DepsValue, std::uint64_t>> first;
    for (const Step& s : t.steps) {
        if (s.event == EventType::ConflictingCommit) {
            fail(v, "process " + std::to_string(s.process) + " received a second, different decision for " +
                        to_string(s.cmd), {s.seq});
        }
        for (CommandId c : replay.feed(s)) {
            const DepsValue& d = replay.stable_values(s.process).at(c);
            auto [it, fresh] = first.emplace(c, std::make_pair(d, s.seq));
            if (!fresh && it->second.first != d)
                fail(v,
                     "command " + to_string(c) + " stable with " + to_string(it->second.first) +
                         " and with " + to_string(d),
                     {it->second.second, s.seq});
        }
    }
    return v;
}

std::vector<Verdict> check_smr_properties(const Trace& t) {
    return {check_validity(t), check_consistency(t), check_stability(t)};
}

namespace {

// Replays executions per process and calls back once per batch with the store as it
// was when the batch ran.
template <typename F>
void for_each_batch(const Trace& t, F&& on_batch) {
    std::vector<DepsStore> stores(t.config.n);
    std::vector<std::set<CommandId>> executed(t.config.n);
    for (const Step& s : t.steps) {
        if (s.process >= stores.size()) continue;
        if (is_decision(s)) {
            try {
                stores[s.process].apply(s.cmd, s.value);
            } catch (const ConflictingCommit&) {
            }
        } else if (s.kind == StepKind::Local && s.event == EventType::Execute) {
            on_batch(s, stores[s.process], executed[s.process]);
            for (CommandId c : s.batch) executed[s.process].insert(c);
        }
    }
}

// Commands reachable from c through deps without passing through commands executed
// by earlier batches; those have closed closures once the invariants held for them.
std::set<CommandId> open_closure(const DepsStore& store, CommandId c,
                                 const std::set<CommandId>& executed) {
    std::set<CommandId> seen{c};
    std::vector<CommandId> stack{c};
    while (!stack.empty()) {
        CommandId x = stack.back();
        stack.pop_back();
        const DepsValue& v = store.deps(x);
        if (!v.is_committed()) continue;
        for (CommandId d : v.ids) {
            if (executed.count(d)) continue;
            if (seen.insert(d).second) stack.push_back(d);
        }
    }
    return seen;
}

}  // namespace

Verdict check_invariant1(const Trace& t) {
    Verdict v = make("invariant-1");
    Keys keys{command_keys(t)};
    // (process, d) -> (c, seq of c's batch) where d was still open in deps*(c)
    std::map<std::pair<ProcessId, CommandId>, std::pair<CommandId, std::uint64_t>> owed;
    for_each_batch(t, [&](const Step& s, const DepsStore& store, const std::set<CommandId>& done) {
        for (CommandId d : s.batch) {
            auto it = owed.find({s.process, d});
            if (it == owed.end()) continue;
            fail(v,
                 "process " + std::to_string(s.process) + " executed " + to_string(it->second.first) +
                     " before " + to_string(d) + " although " + to_string(d) + " is in its deps*",
                 {it->second.second, s.seq});
        }
        std::set<CommandId> batch(s.batch.begin(), s.batch.end());
        for (CommandId c : s.batch) {
            for (CommandId d : open_closure(store, c, done)) {
                if (batch.count(d) || !keys.conflict(c, d)) continue;
                owed.emplace(std::make_pair(s.process, d), std::make_pair(c, s.seq));
            }
        }
        // a command executed twice comes after itself
        for (CommandId c : s.batch)
            if (done.count(c))
                fail(v, "process " + std::to_string(s.process) + " executed " + to_string(c) + " twice",
                     {s.seq});
    });
    return v;
}

Verdict check_invariant2(const Trace& t) {
    Verdict v = make("invariant-2");
    Keys keys{command_keys(t)};
    for_each_batch(t, [&](const Step& s, const DepsStore& store, const std::set<CommandId>& done) {
        for (std::size_t j = 0; j < s.batch.size(); ++j) {
            std::set<CommandId> reach;
            bool computed = false;
            for (std::size_t i = 0; i < j; ++i) {
                if (!keys.conflict(s.batch[i], s.batch[j])) continue;
                if (!computed) {
                    reach = open_closure(store, s.batch[j], done);
                    computed = true;
                }
                if (!reach.count(s.batch[i]))
                    fail(v,
                         "batch at process " + std::to_string(s.process) + " runs " +
                             to_string(s.batch[i]) + " before " + to_string(s.batch[j]) +
                             " but it is not in the latter's deps*",
                         {s.seq});
            }
        }
    });
    return v;
}

std::vector<Verdict> check_execution_invariants(const Trace& t) {
    return {check_invariant1(t), check_invariant2(t)};
}

namespace {

struct Outcome {
    CommandId cmd;
    DepsValue deps;
    bool flag;
    std::uint64_t seq;
};

std::vector<Outcome> outcomes(const Trace& t) {
    std::vector<Outcome> out;
    for (const Step& s : t.steps)
        if (s.kind == StepKind::Respond && s.event == EventType::Announce)
            out.push_back({s.cmd, s.value, s.flag, s.seq});
    return out;
}

}  // namespace

Verdict check_visibility(const Trace& t) {
    Verdict v = make("visibility");
    Keys keys{command_keys(t)};
    std::map<Key, std::vector<Outcome>> by_key;
    for (const Outcome& o : outcomes(t)) {
        if (!o.deps.is_committed()) continue;
        auto k = keys.keys.find(o.cmd);
        if (k == keys.keys.end()) continue;
        auto& same = by_key[k->second];
        for (const Outcome& p : same) {
            if (p.cmd == o.cmd) continue;
            if (contains(o.deps.ids, p.cmd) || contains(p.deps.ids, o.cmd)) continue;
            fail(v,
                 "announces of conflicting " + to_string(p.cmd) + " and " + to_string(o.cmd) +
                     " missed each other",
                 {p.seq, o.seq});
        }
        same.push_back(o);
    }
    return v;
}

Verdict check_weak_agreement(const Trace& t) {
    Verdict v = make("weak-agreement");
    auto all = outcomes(t);
    std::map<CommandId, std::vector<const Outcome*>> by_cmd;
    for (const Outcome& o : all) by_cmd[o.cmd].push_back(&o);
    std::map<CommandId, std::uint64_t> committed_at;
    for (const Step& s : t.steps)
        if (is_decision(s) && s.value.is_committed()) committed_at.emplace(s.cmd, s.seq);

    auto never_set = [&](CommandId d) -> std::optional<std::uint64_t> {
        auto it = by_cmd.find(d);
        if (it != by_cmd.end())
            for (const Outcome* o : it->second)
                if (!o->deps.is_aborted()) return o->seq;
        auto c = committed_at.find(d);
        if (c != committed_at.end()) return c->second;
        return std::nullopt;
    };

    for (const Outcome& fast : all) {
        if (!fast.flag) continue;
        for (const Outcome* other : by_cmd[fast.cmd]) {
            if (other == &fast) continue;
            if (!other->deps.is_committed()) {
                fail(v, "fast outcome for " + to_string(fast.cmd) + " next to an abort outcome",
                     {fast.seq, other->seq});
                continue;
            }
            for (CommandId d : symmetric_difference(fast.deps.ids, other->deps.ids)) {
                if (auto w = never_set(d))
                    fail(v,
                         "outcomes for " + to_string(fast.cmd) + " differ on " + to_string(d) +
                             ", which is not aborted",
                         {fast.seq, other->seq, *w});
            }
        }
    }
    return v;
}

std::vector<Verdict> check_dds_properties(const Trace& t) {
    return {check_visibility(t), check_weak_agreement(t)};
}

Verdict check_consensus_agreement(const Trace& t) {
    Verdict v = make("consensus-agreement");
    std::map<CommandId, std::pair<DepsValue, std::uint64_t>> decided;
    for (const Step& s : t.steps) {
        if (s.kind != StepKind::Respond || s.event != EventType::Propose) continue;
        auto [it, fresh] = decided.emplace(s.cmd, std::make_pair(s.value, s.seq));
        if (!fresh && it->second.first != s.value)
            fail(v, "two different decisions for " + to_string(s.cmd), {it->second.second, s.seq});
    }
    return v;
}

Verdict check_consensus_validity(const Trace& t) {
    Verdict v = make("consensus-validity");
    std::map<CommandId, std::vector<DepsValue>> proposed;
    for (const Step& s : t.steps) {
        if (s.event != EventType::Propose) continue;
        if (s.kind == StepKind::Invoke) {
            proposed[s.cmd].push_back(s.value);
        } else if (s.kind == StepKind::Respond) {
            auto& p = proposed[s.cmd];
            if (std::find(p.begin(), p.end(), s.value) == p.end())
                fail(v, "decision for " + to_string(s.cmd) + " was never proposed", {s.seq});
        }
    }
    return v;
}

Verdict check_reliability(const Trace& t) {
    Verdict v = make("reliability");
    auto crashed = crashed_processes(t);
    if (crashed.size() > t.config.f) {
        v.applicable = false;
        v.detail = std::to_string(crashed.size()) + " crashes exceed f=" + std::to_string(t.config.f);
        return v;
    }
    std::map<CommandId, std::uint64_t> submitted;
    std::vector<std::set<CommandId>> decided(t.config.n);
    for (const Step& s : t.steps) {
        if (is_original_submit(s)) submitted.emplace(s.cmd, s.seq);
        if (is_decision(s) && s.process < decided.size()) decided[s.process].insert(s.cmd);
    }
    for (ProcessId p = 0; p < t.config.n; ++p) {
        if (crashed.count(p)) continue;
        for (auto& [c, seq] : submitted)
            if (!decided[p].count(c))
                fail(v, "command " + to_string(c) + " never decided at correct process " + std::to_string(p),
                     {seq});
    }
    return v;
}

Verdict check_optimal_latency(const Trace& t) {
    Verdict v = make("optimal-latency");
    for (const Step& s : t.steps) {
        if (s.event == EventType::Crash || s.event == EventType::Suspect) {
            v.applicable = false;
            v.detail = "not a nice run";
            return v;
        }
    }
    auto contention = contended_all(t);
    std::map<CommandId, std::uint64_t> announced;
    for (const Step& s : t.steps)
        if (s.kind == StepKind::Invoke && s.event == EventType::Announce) announced.emplace(s.cmd, s.seq);
    for (const AnnounceInfo& a : announces(t)) {
        if (a.recovery || a.respond == kNever) continue;
        if (a.latency != 2)
            fail(v, "announce of " + to_string(a.cmd) + " took " + std::to_string(a.latency) +
                        " message delays", {a.invoke, a.respond});
        auto c = contention.find(a.cmd);
        const bool is_contended = c != contention.end() && c->second;
        if (!is_contended && !a.flag)
            fail(v, "uncontended " + to_string(a.cmd) + " missed the fast path", {a.invoke, a.respond});
        if (a.deps.is_committed()) {
            for (CommandId d : a.deps.ids) {
                auto it = announced.find(d);
                if (it == announced.end() || it->second > a.respond)
                    fail(v, "deps of " + to_string(a.cmd) + " name " + to_string(d) +
                                ", which was not announced before", {a.respond});
            }
        }
    }
    return v;
}

Verdict check_load_balancing(const Trace& t) {
    Verdict v = make("load-balancing");
    for (const AnnounceInfo& a : announces(t)) {
        if (a.recovery || a.respond == kNever) continue;
        std::set<ProcessId> q(a.quorum.begin(), a.quorum.end());
        if (q.empty())
            for (ProcessId p = 0; p < t.config.n; ++p) q.insert(p);
        for (ProcessId p : a.touched)
            if (!q.count(p))
                fail(v, "announce of " + to_string(a.cmd) + " involved process " + std::to_string(p) +
                            " outside its quorum", {a.invoke, a.respond});
        if (a.pending > 0)
            fail(v, "announce of " + to_string(a.cmd) + " answered with " + std::to_string(a.pending) +
                        " of its messages in flight", {a.respond});
    }
    return v;
}

bool PartiallyOrderedLog::contains(CommandId c) const {
    return std::find(vertices.begin(), vertices.end(), c) != vertices.end();
}

namespace {

void append(PartiallyOrderedLog& g, CommandId c, const Keys& keys) {
    for (CommandId d : g.vertices)
        if (keys.conflict(d, c)) g.edges.emplace_back(d, c);
    if (!g.contains(c)) g.vertices.push_back(c);
}

}  // namespace

bool is_prefix(const PartiallyOrderedLog& g, const PartiallyOrderedLog& h) {
    std::set<CommandId> gv(g.vertices.begin(), g.vertices.end());
    for (CommandId c : g.vertices)
        if (!h.contains(c)) return false;
    std::set<std::pair<CommandId, CommandId>> ge(g.edges.begin(), g.edges.end());
    for (auto& e : g.edges)
        if (std::find(h.edges.begin(), h.edges.end(), e) == h.edges.end()) return false;
    for (auto& e : h.edges)
        if (gv.count(e.second) && !ge.count(e)) return false;
    return true;
}

bool compatible(const PartiallyOrderedLog& a, const PartiallyOrderedLog& b) {
    PartiallyOrderedLog u = a;
    for (CommandId c : b.vertices)
        if (!u.contains(c)) u.vertices.push_back(c);
    std::set<std::pair<CommandId, CommandId>> edges(a.edges.begin(), a.edges.end());
    edges.insert(b.edges.begin(), b.edges.end());
    u.edges.assign(edges.begin(), edges.end());

    // acyclic by Kahn's algorithm
    std::map<CommandId, std::size_t> indeg;
    std::map<CommandId, std::vector<CommandId>> out;
    for (CommandId c : u.vertices) indeg[c] = 0;
    for (auto& [x, y] : u.edges) {
        ++indeg[y];
        out[x].push_back(y);
    }
    std::vector<CommandId> ready;
    for (auto& [c, d] : indeg)
        if (d == 0) ready.push_back(c);
    std::size_t seen = 0;
    while (!ready.empty()) {
        CommandId c = ready.back();
        ready.pop_back();
        ++seen;
        for (CommandId y : out[c])
            if (--indeg[y] == 0) ready.push_back(y);
    }
    if (seen != indeg.size()) return false;
    return is_prefix(a, u) && is_prefix(b, u);
}

std::vector<PartiallyOrderedLog> reduce_to_generic(const Trace& t) {
    Keys keys{command_keys(t)};
    std::vector<PartiallyOrderedLog> logs(t.config.n);
    for (const Step& s : t.steps)
        if (s.kind == StepKind::Local && s.event == EventType::Execute && s.process < logs.size())
            for (CommandId c : s.batch) append(logs[s.process], c, keys);
    return logs;
}

Verdict check_generic_stability(const Trace& t) {
    Verdict v = make("generic-stability");
    Keys keys{command_keys(t)};
    // Appending keeps every earlier edge, so the log is a prefix of its successor
    // exactly when no new edge lands on a vertex that was already there.
    std::vector<PartiallyOrderedLog> logs(t.config.n);
    std::vector<std::set<CommandId>> present(t.config.n);
    for (const Step& s : t.steps) {
        if (s.kind != StepKind::Local || s.event != EventType::Execute || s.process >= logs.size())
            continue;
        for (CommandId c : s.batch) {
            if (present[s.process].count(c)) {
                for (CommandId d : logs[s.process].vertices)
                    if (keys.conflict(d, c)) {
                        fail(v, "log of process " + std::to_string(s.process) + " re-appends " + to_string(c),
                             {s.seq});
                        break;
                    }
            }
            append(logs[s.process], c, keys);
            present[s.process].insert(c);
        }
    }
    return v;
}

Verdict check_generic_consistency(const Trace& t) {
    Verdict v = make("generic-consistency");
    Keys keys{command_keys(t)};
    // Edges only join commands sharing a key, so compatibility splits per key into
    // agreement of the execution sequences on their common part.
    std::vector<std::map<Key, std::vector<CommandId>>> seq(t.config.n);
    std::vector<std::map<CommandId, std::uint64_t>> when(t.config.n);
    for (const Step& s : t.steps) {
        if (s.kind != StepKind::Local || s.event != EventType::Execute || s.process >= seq.size())
            continue;
        for (CommandId c : s.batch) {
            auto k = keys.keys.find(c);
            if (k == keys.keys.end() || when[s.process].count(c)) continue;
            seq[s.process][k->second].push_back(c);
            when[s.process][c] = s.seq;
        }
    }
    for (ProcessId p = 0; p < t.config.n; ++p) {
        for (ProcessId q = p + 1; q < t.config.n; ++q) {
            for (auto& [key, sp] : seq[p]) {
                auto it = seq[q].find(key);
                if (it == seq[q].end()) continue;
                const auto& sq = it->second;
                // union acyclic and both logs prefixes of it: the shorter sequence
                // must be a prefix of the longer one
                const std::size_t m = std::min(sp.size(), sq.size());
                for (std::size_t i = 0; i < m; ++i) {
                    if (sp[i] == sq[i]) continue;
                    fail(v,
                         "processes " + std::to_string(p) + " and " + std::to_string(q) +
                             " disagree on the order of " + to_string(sp[i]) + " and " + to_string(sq[i]),
                         {when[p][sp[i]], when[q][sq[i]]});
                    break;
                }
            }
        }
    }
    return v;
}

std::vector<Verdict> check_generic(const Trace& t) {
    return {check_generic_stability(t), check_generic_consistency(t)};
}

Verdict check_property(const Trace& t, const std::string& name) {
    if (name == "validity") return check_validity(t);
    if (name == "consistency") return check_consistency(t);
    if (name == "stability") return check_stability(t);
    if (name == "invariant-1") return check_invariant1(t);
    if (name == "invariant-2") return check_invariant2(t);
    if (name == "visibility") return check_visibility(t);
    if (name == "weak-agreement") return check_weak_agreement(t);
    if (name == "consensus-agreement") return check_consensus_agreement(t);
    if (name == "consensus-validity") return check_consensus_validity(t);
    if (name == "reliability") return check_reliability(t);
    if (name == "optimal-latency") return check_optimal_latency(t);
    if (name == "load-balancing") return check_load_balancing(t);
    if (name == "generic-stability") return check_generic_stability(t);
    if (name == "generic-consistency") return check_generic_consistency(t);
    throw Error("unknown property '" + name + "'");
}

std::vector<std::uint64_t> minimize_counterexample(const Trace& t, const std::string& name,
                                                   std::size_t max_steps) {
    if (t.steps.size() > max_steps) return {};
    Trace cur = t;
    if (check_property(cur, name).pass) return {};
    // drop steps from the back first: later steps rarely matter for the violation
    for (std::size_t i = cur.steps.size(); i-- > 0;) {
        Trace trial = cur;
        trial.steps.erase(trial.steps.begin() + static_cast<std::ptrdiff_t>(i));
        Verdict v = check_property(trial, name);
        if (!v.pass && v.applicable) cur = std::move(trial);
    }
    std::vector<std::uint64_t> out;
    for (const Step& s : cur.steps) out.push_back(s.seq);
    return out;
}

std::vector<Verdict> check_properties(const Trace& t, const std::vector<std::string>& names,
                                      bool minimize) {
    std::vector<Verdict> out;
    for (const std::string& name : names) {
        Verdict v = check_property(t, name);
        if (!v.pass && minimize) {
            auto small = minimize_counterexample(t, name);
            if (!small.empty()) v.counterexample = std::move(small);
        }
        out.push_back(std::move(v));
    }
    return out;
}

nlohmann::json verdicts_to_json(const std::vector<Verdict>& vs) {
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const Verdict& v : vs) {
        nlohmann::json j;
        j["property"] = v.property;
        j["pass"] = v.pass;
        j["applicable"] = v.applicable;
        if (!v.detail.empty()) j["detail"] = v.detail;
        j["counterexample"] = v.counterexample;
        arr.push_back(j);
        all = all && v.pass;
    }
    return {{"pass", all}, {"verdicts", arr}};
}

bool roll_feasible(std::uint32_t n, std::uint32_t F, std::uint32_t f) {
    if (n < 2) return false;
    const std::uint32_t cap = minority(n);
    return F <= cap && f <= cap && 2 * F + f <= n + 1;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> roll_skyline(std::uint32_t n) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> feasible, out;
    const std::uint32_t cap = n >= 2 ? minority(n) : 0;
    for (std::uint32_t F = 0; F <= cap; ++F)
        for (std::uint32_t f = 0; f <= cap; ++f)
            if (roll_feasible(n, F, f)) feasible.emplace_back(F, f);
    for (auto& a : feasible) {
        bool dominated = false;
        for (auto& b : feasible)
            if (b != a && b.first >= a.first && b.second >= a.second) dominated = true;
        if (!dominated) out.push_back(a);
    }
    return out;
}

ProtocolClass classify(Protocol p, std::uint32_t n) {
    ProtocolClass c;
    c.protocol = to_string(p);
    c.f = minority(n);
    std::uint32_t F = 0;
    switch (p) {
        case Protocol::Rotating:
            c.fast_quorum = 0;
            c.optimal_latency = false;
            break;
        case Protocol::Mencius:
            c.fast_quorum = n;
            c.optimal_latency = true;
            F = 0;
            break;
        case Protocol::EPaxos:
            c.fast_quorum = (3 * n) / 4;
            c.optimal_latency = true;
            F = n - c.fast_quorum;
            break;
    }
    if (c.optimal_latency) {
        auto sky = roll_skyline(n);
        c.roll_optimal = std::find(sky.begin(), sky.end(), std::make_pair(F, c.f)) != sky.end();
    }
    return c;
}

}  // namespace lsmr
