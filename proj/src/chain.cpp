#include "lsmr/chain.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "lsmr/analysis.hpp"
#include "lsmr/engine.hpp"
#include "lsmr/verification.hpp"

namespace lsmr {

namespace {

using Set = std::set<ProcessId>;

Set as_set(const std::vector<ProcessId>& v) { return Set(v.begin(), v.end()); }

std::vector<ProcessId> as_vec(const Set& s) { return {s.begin(), s.end()}; }

bool tight(std::uint32_t n, std::uint32_t F, std::uint32_t f) {
    // f <= F leaves f-1 early members in each quorum outside the previous early set
    return F >= 2 && f >= 1 && f <= F && 2 * F + f - 1 == n && roll_feasible(n, F, f);
}

std::string show(const Set& s) {
    std::string out = "{";
    for (ProcessId p : s) out += (out.size() > 1 ? "," : "") + std::string("p") + std::to_string(p + 1);
    return out + "}";
}

}  // namespace

SystemConfig chain_config(std::uint32_t n) {
    if (n < 2) throw NotRollOptimal("n must be at least 2");
    SystemConfig cfg = default_config(Protocol::EPaxos, n);
    cfg.consensus = ConsensusMode::Oracle;
    if (tight(n, cfg.F, cfg.f)) return cfg;
    for (auto [F, f] : roll_skyline(n)) {
        if (!tight(n, F, f)) continue;
        cfg.F = F;
        cfg.f = f;
        return cfg;
    }
    throw NotRollOptimal("no configuration with 2F + f - 1 = " + std::to_string(n) +
                         " and F >= 2 exists");
}

ChainPlan build_chain_plan(const SystemConfig& cfg, std::size_t k) {
    validate(cfg);
    if (cfg.protocol != Protocol::EPaxos)
        throw NotRollOptimal("the chain construction needs the EPaxos instantiation");
    if (!tight(cfg.n, cfg.F, cfg.f))
        throw NotRollOptimal("(n=" + std::to_string(cfg.n) + ", F=" + std::to_string(cfg.F) +
                             ", f=" + std::to_string(cfg.f) + ") is not a tight ROLL configuration");
    if (k == 0) throw PlanViolation("k must be positive");

    const std::uint32_t n = cfg.n, q = cfg.n - cfg.F;
    ChainPlan plan{cfg, k, {}};
    plan.ranks.reserve(k);

    ChainRank first;
    for (ProcessId p = 0; p < q; ++p) first.quorum.push_back(p);
    first.coord = 0;
    for (ProcessId p = 1; p < cfg.f; ++p) first.early.push_back(p);
    first.next = n - 1;
    plan.ranks.push_back(first);

    while (plan.ranks.size() < k) {
        const ChainRank& prev = plan.ranks.back();
        const Set pq = as_set(prev.quorum), pe = as_set(prev.early);
        ChainRank r;
        r.coord = prev.next;
        Set early;
        for (ProcessId p : pq)
            if (!pe.count(p) && p != prev.coord && early.size() + 1 < cfg.f) early.insert(p);
        Set fresh;
        for (ProcessId p = 0; p < n; ++p)
            if (!pq.count(p) && p != prev.next) fresh.insert(p);
        Set quorum = early;
        quorum.insert(fresh.begin(), fresh.end());
        quorum.insert(r.coord);
        // Next coordinator: inside the previous quorum, outside the new one. An early
        // member of the previous rank already answered before anything else happened
        // there, so it starts the next announce without extending any pending path.
        std::vector<ProcessId> candidates;
        for (ProcessId p : pq)
            if (!early.count(p) && p != prev.coord) candidates.push_back(p);
        std::stable_partition(candidates.begin(), candidates.end(),
                              [&](ProcessId p) { return pe.count(p) > 0; });
        if (candidates.empty()) throw PlanViolation("no process left to coordinate the next rank");
        r.next = candidates.front();
        r.early = as_vec(early);
        r.fresh = as_vec(fresh);
        r.quorum = as_vec(quorum);
        plan.ranks.push_back(std::move(r));
    }
    return plan;
}

std::vector<std::string> plan_violations(const ChainPlan& plan) {
    std::vector<std::string> out;
    const auto& cfg = plan.config;
    for (std::size_t i = 0; i < plan.ranks.size(); ++i) {
        const ChainRank& r = plan.ranks[i];
        const Set Q = as_set(r.quorum), P = as_set(r.early);
        const std::string at = "rank " + std::to_string(i + 1) + ": ";
        if (Q.size() != cfg.n - cfg.F) out.push_back(at + "quorum " + show(Q) + " has the wrong size");
        if (P.size() + 1 != cfg.f) out.push_back(at + "early set " + show(P) + " is not of size f-1");
        if (!Q.count(r.coord) || P.count(r.coord)) out.push_back(at + "coordinator misplaced");
        for (ProcessId p : P)
            if (!Q.count(p)) out.push_back(at + "early set leaves the quorum");
        if (Q.count(r.next)) out.push_back(at + "next coordinator inside the quorum");
        if (i == 0) continue;
        const ChainRank& pr = plan.ranks[i - 1];
        const Set pQ = as_set(pr.quorum), pP = as_set(pr.early);
        if (r.coord != pr.next) out.push_back(at + "F1: coordinator is not the planned successor");
        Set inter;
        for (ProcessId p : Q)
            if (pQ.count(p)) inter.insert(p);
        if (inter != P) out.push_back(at + "F2: early set " + show(P) + " differs from " + show(inter));
        for (ProcessId p : P)
            if (pP.count(p)) out.push_back(at + "F3: early sets of adjacent ranks meet");
        if (Q.count(r.next) || r.next == pr.coord) out.push_back(at + "F4: next coordinator misplaced");
        Set a = P, b = pP;
        a.insert(r.coord);
        b.insert(pr.coord);
        for (ProcessId p : a)
            if (b.count(p)) out.push_back(at + "F5: " + show(a) + " meets " + show(b));
    }
    return out;
}

namespace {

SystemConfig oracle(SystemConfig cfg) {
    cfg.consensus = ConsensusMode::Oracle;
    return cfg;
}

class ChainDriver {
public:
    // consensus by quorum would add message exchanges the block structure has no room for
    explicit ChainDriver(const ChainPlan& plan) : plan_(plan), engine_(oracle(plan.config)) {}

    ChainRun go() {
        const std::size_t k = plan_.k;
        cmds_.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            submit(i);
            deliver_requests(i, early(i), "M" + label(i) + "|P");
            if (i == 0) continue;
            if (i >= 2) deliver_held(i - 2, plan_.ranks[i].coord);
            complete(i - 1);
        }
        ChainRun run;
        run.prefix_end = engine_.next_seq() - 1;
        if (k >= 2) deliver_held(k - 2, plan_.ranks[k - 1].coord);
        complete(k - 1);
        if (!engine_.in_flight().empty())
            throw PlanViolation(std::to_string(engine_.in_flight().size()) +
                                " messages left in flight after the last block");
        run.trace.config = oracle(plan_.config);
        run.trace.scheduler = "chain(" + std::to_string(k) + ")";
        run.trace.steps = engine_.take_steps();
        run.live_chain = max_live_chain(run.trace, run.prefix_end);
        run.asynchrony =
            asynchrony_degree(message_spans(run.trace, {"announce-request", "announce-reply"}));
        run.asynchrony_all = asynchrony_degree(run.trace);
        return run;
    }

private:
    static std::string label(std::size_t i) { return std::to_string(i + 1); }

    std::vector<ProcessId> early(std::size_t i) const { return plan_.ranks[i].early; }

    std::vector<ProcessId> late(std::size_t i) const {
        const ChainRank& r = plan_.ranks[i];
        std::vector<ProcessId> out;
        for (ProcessId p : r.quorum)
            if (p != r.coord && !std::count(r.early.begin(), r.early.end(), p)) out.push_back(p);
        return out;
    }

    void tick() { engine_.set_time(engine_.time() + 1); }

    std::vector<MessageId> find(MsgType type, CommandId c, std::optional<ProcessId> dst) const {
        std::vector<MessageId> out;
        for (auto& [id, m] : engine_.in_flight())
            if (m.type == type && m.cmd == c && (!dst || m.dst == *dst)) out.push_back(id);
        return out;
    }

    void deliver(MessageId id) {
        tick();
        engine_.deliver(id);
    }

    void submit(std::size_t i) {
        const ChainRank& r = plan_.ranks[i];
        engine_.set_note("S" + label(i));
        tick();
        cmds_[i] = engine_.submit(r.coord, kChainKey, {}, r.quorum);
        const auto sent = find(MsgType::AnnounceRequest, cmds_[i], std::nullopt);
        if (sent.size() + 1 != r.quorum.size())
            throw PlanViolation("command " + label(i) + " was not sent to its whole fast quorum");
    }

    void deliver_requests(std::size_t i, const std::vector<ProcessId>& to, const std::string& note) {
        engine_.set_note(note);
        for (ProcessId p : to) {
            auto ids = find(MsgType::AnnounceRequest, cmds_[i], p);
            if (ids.size() != 1) throw PlanViolation("request of command " + label(i) + " missing");
            deliver(ids.front());
        }
    }

    // Late quorum members answer, the coordinator collects every reply and decides.
    // A decision is a message the block structure does not account for: it goes out
    // at once, except to the coordinator two ranks ahead and to the late members of
    // the next command, which would carry it into their next announce message.
    void complete(std::size_t i) {
        deliver_requests(i, late(i), "M" + label(i) + "|Q");
        if (i >= 1) deliver_held(i - 1, std::nullopt);
        engine_.set_note("R" + label(i));
        const ProcessId coord = plan_.ranks[i].coord;
        for (MessageId id : find(MsgType::AnnounceReply, cmds_[i], coord)) deliver(id);
        if (!engine_.process(coord).store.is_decided(cmds_[i]))
            throw PlanViolation("command " + label(i) + " undecided after its replies");
        std::set<ProcessId> hold;
        if (i + 2 < plan_.k) hold.insert(plan_.ranks[i + 2].coord);
        if (i + 1 < plan_.k)
            for (ProcessId p : late(i + 1)) hold.insert(p);
        engine_.set_note("D" + label(i));
        for (MessageId id : find(MsgType::Decision, cmds_[i], std::nullopt))
            if (!hold.count(engine_.in_flight().at(id).dst)) deliver(id);
        engine_.set_note({});
    }

    // Held decisions of command i, to one process or to all that still miss it.
    void deliver_held(std::size_t i, std::optional<ProcessId> to) {
        engine_.set_note("D" + label(i));
        for (MessageId id : find(MsgType::Decision, cmds_[i], to)) deliver(id);
        engine_.set_note({});
    }

    static constexpr Key kChainKey = 42;

    const ChainPlan& plan_;
    Engine engine_;
    std::vector<CommandId> cmds_;
};

}  // namespace

ChainRun run_chain(const ChainPlan& plan) {
    if (plan.ranks.size() != plan.k) throw PlanViolation("plan has the wrong number of ranks");
    return ChainDriver(plan).go();
}

}  // namespace lsmr
