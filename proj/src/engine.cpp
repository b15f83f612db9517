#include "lsmr/engine.hpp"

#include <algorithm>

#include "lsmr/bytes.hpp"

namespace lsmr {

namespace {
constexpr Key kNoopBit = 1ull << 63;
}

Key noop_key(CommandId id) {
    return kNoopBit | (static_cast<Key>(id.submitter) << 32) | id.seq;
}

bool is_noop_key(Key k) { return (k & kNoopBit) != 0; }

const char* tag_of(MsgType t) {
    switch (t) {
        case MsgType::AnnounceRequest: return "announce-request";
        case MsgType::AnnounceReply: return "announce-reply";
        case MsgType::RecoveryRequest: return "recovery-request";
        case MsgType::RecoveryReply: return "recovery-reply";
        case MsgType::Decision: return "decision";
        case MsgType::Paxos: return "consensus";
    }
    return "?";
}

void serialize(const Message& m, std::string& out) {
    using bytes::put;
    put(out, (static_cast<std::uint64_t>(m.src) << 32) | m.dst);
    put(out, static_cast<std::uint64_t>(m.type));
    put(out, m.cmd);
    put(out, static_cast<std::uint64_t>(m.body.has_value()));
    if (m.body) {
        put(out, m.body->key);
        put(out, m.body->payload);
    }
    put(out, m.deps);
    put(out, m.value);
    put(out, static_cast<std::uint64_t>(m.knew) | (m.decided ? 2u : 0u));
    if (m.decided) put(out, *m.decided);
    if (m.type == MsgType::Paxos) {
        const PaxosMsg& p = m.paxos;
        put(out, static_cast<std::uint64_t>(p.type));
        put(out, (static_cast<std::uint64_t>(p.ballot.attempt) << 32) | p.ballot.proposer);
        put(out, static_cast<std::uint64_t>(p.has_accepted));
        put(out, (static_cast<std::uint64_t>(p.accepted_ballot.attempt) << 32) |
                     p.accepted_ballot.proposer);
        put(out, p.value);
    }
}

std::uint64_t digest(const Message& m) {
    std::string s;
    serialize(m, s);
    return bytes::fnv1a(s);
}

Engine::Engine(SystemConfig cfg, EngineOptions opts)
    : cfg_(cfg), opts_(std::move(opts)), procs_(cfg.n), crashed_(cfg.n, false) {
    validate(cfg_);
    for (ProcessId p = 0; p < cfg_.n; ++p) {
        procs_[p].id = p;
        procs_[p].suspected.assign(cfg_.n, false);
    }
}

Step& Engine::emit(StepKind kind, ProcessId p) {
    Step& s = steps_.emplace_back();
    s.seq = seq_++;
    s.time = now_;
    s.kind = kind;
    s.process = p;
    s.note = note_;
    return s;
}

std::vector<Step> Engine::take_steps() {
    std::vector<Step> out;
    out.swap(steps_);
    return out;
}

std::vector<MessageId> Engine::take_sent() {
    std::vector<MessageId> out;
    out.swap(sent_);
    return out;
}

std::vector<TimerRequest> Engine::take_timers() {
    std::vector<TimerRequest> out;
    out.swap(timers_);
    return out;
}

std::vector<ExecutionNote> Engine::take_executions() {
    std::vector<ExecutionNote> out;
    out.swap(executions_);
    return out;
}

void Engine::send(ProcessId from, ProcessId to, Message m) {
    m.id = next_msg_++;
    m.src = from;
    m.dst = to;
    Step& s = emit(StepKind::Send, from);
    s.message = m.id;
    s.sender = from;
    s.dest = to;
    s.tag = tag_of(m.type);
    s.has_cmd = true;
    s.cmd = m.cmd;
    s.digest = digest(m);
    // a crashed destination never takes the receive step
    if (crashed_[to]) return;
    sent_.push_back(m.id);
    buffer_.emplace(m.id, std::move(m));
}

void Engine::learn(ProcessState& P, const Command& c) {
    P.known.emplace(c.id, c);
    if (cfg_.protocol == Protocol::EPaxos && !is_noop_key(c.key))
        insert(P.seen_by_key[c.key], c.id);
}

IdSet Engine::seen_conflicts(const ProcessState& P, const Command& c) const {
    auto it = P.seen_by_key.find(c.key);
    if (it == P.seen_by_key.end()) return {};
    IdSet out = it->second;
    erase(out, c.id);
    return out;
}

CommandId Engine::submit(ProcessId p, Key key, std::string payload,
                         std::vector<ProcessId> quorum) {
    if (p >= cfg_.n || crashed_[p]) throw PreconditionViolated("submit at a crashed process");
    if (is_noop_key(key)) throw PreconditionViolated("keys with the top bit set are reserved");
    ProcessState& P = procs_[p];
    CommandId id{p, 0};
    if (cfg_.protocol == Protocol::EPaxos) {
        id.seq = P.next_seq++;
    } else {
        std::uint32_t r = P.next_seq;
        while (P.bailed_rounds.count(r)) ++r;
        id.seq = r;
        P.next_seq = r + 1;
        P.used_rounds.insert(r);
    }
    Command c{id, key, p, std::move(payload)};
    P.known[id] = c;
    Step& s = emit(StepKind::Invoke, p);
    s.event = EventType::Submit;
    s.has_cmd = true;
    s.cmd = id;
    s.body = c;
    begin_announce(p, id, c, false, std::move(quorum));
    return id;
}

void Engine::recover(ProcessId p, CommandId c) {
    if (crashed_[p]) throw PreconditionViolated("recover at a crashed process");
    if (c.submitter != p && !procs_[p].suspected[c.submitter])
        throw PreconditionViolated("recovery requires the coordinator to be suspected");
    maybe_recover(p, c);
}

void Engine::begin_announce(ProcessId p, CommandId id, const std::optional<Command>& body,
                            bool recovery, std::vector<ProcessId> quorum) {
    ProcessState& P = procs_[p];
    const bool own_slot = id.submitter == p;
    if (!recovery && cfg_.protocol == Protocol::EPaxos) {
        if (quorum.empty())
            quorum = opts_.quorum_policy ? opts_.quorum_policy(p) : default_quorum(p, cfg_);
        std::sort(quorum.begin(), quorum.end());
        if (quorum.size() < cfg_.fast_quorum_size() ||
            !std::binary_search(quorum.begin(), quorum.end(), p))
            throw PreconditionViolated("not a fast quorum for " + to_string(id));
    }
    Step& s = emit(StepKind::Invoke, p);
    s.event = EventType::Announce;
    s.has_cmd = true;
    s.cmd = id;
    s.recovery = recovery;
    s.quorum = quorum;

    switch (cfg_.protocol) {
        case Protocol::Rotating: {
            bool bailed = own_slot && P.bailed_rounds.count(id.seq);
            AnnounceOutcome out = recovery ? AnnounceOutcome{DepsValue::aborted(), false}
                                           : rotating_outcome(id, cfg_.n, bailed);
            finish_announce(p, id, out, recovery);
            return;
        }
        case Protocol::Mencius: {
            if (!recovery && own_slot && P.bailed_rounds.count(id.seq)) {
                finish_announce(p, id, {DepsValue::aborted(), false}, false);
                return;
            }
            AnnounceState st;
            st.recovery = recovery;
            st.own.knew = P.known.count(id) > 0;
            if (!recovery) {
                for (std::uint32_t r : P.bailed_rounds)
                    if (r < id.seq) st.own.deps.push_back(CommandId{p, r});
            }
            for (ProcessId q = 0; q < cfg_.n; ++q)
                if (q != p) st.asked.insert(q);
            P.announces[id] = st;
            for (ProcessId q : st.asked) {
                Message m;
                m.type = recovery ? MsgType::RecoveryRequest : MsgType::AnnounceRequest;
                m.cmd = id;
                m.body = body;
                send(p, q, std::move(m));
            }
            break;
        }
        case Protocol::EPaxos: {
            AnnounceState st;
            st.recovery = recovery;
            if (!recovery) {
                IdSet d = seen_conflicts(P, *body);
                P.recorded[id] = d;
                learn(P, *body);
                st.own = RecoveryReport{true, d, std::nullopt};
                st.quorum = quorum;
                for (ProcessId q : quorum)
                    if (q != p) st.asked.insert(q);
            } else {
                auto rec = P.recorded.find(id);
                if (rec != P.recorded.end()) {
                    st.own = RecoveryReport{true, rec->second, std::nullopt};
                } else {
                    IdSet d = seen_conflicts(P, *body);
                    P.recorded[id] = d;
                    learn(P, *body);
                    st.own = RecoveryReport{false, d, std::nullopt};
                }
                for (ProcessId q = 0; q < cfg_.n; ++q)
                    if (q != p) st.asked.insert(q);
            }
            P.announces[id] = st;
            for (ProcessId q : st.asked) {
                Message m;
                m.type = recovery ? MsgType::RecoveryRequest : MsgType::AnnounceRequest;
                m.cmd = id;
                m.body = body;
                m.deps = st.own.deps;
                send(p, q, std::move(m));
            }
            if (!recovery) {
                for (ProcessId q : st.asked)
                    if (P.suspected[q]) {
                        widen(p, id);
                        break;
                    }
            }
            break;
        }
    }
    try_complete(p, id);
}

void Engine::widen(ProcessId p, CommandId id) {
    ProcessState& P = procs_[p];
    auto it = P.announces.find(id);
    if (it == P.announces.end() || it->second.widened || it->second.recovery) return;
    it->second.widened = true;
    std::vector<ProcessId> extra;
    for (ProcessId q = 0; q < cfg_.n; ++q)
        if (q != p && !it->second.asked.count(q)) extra.push_back(q);
    for (ProcessId q : extra) it->second.asked.insert(q);
    const IdSet own = it->second.own.deps;
    for (ProcessId q : extra) {
        Message m;
        m.type = MsgType::AnnounceRequest;
        m.cmd = id;
        m.body = P.known.at(id);
        m.deps = own;
        send(p, q, std::move(m));
    }
}

void Engine::try_complete(ProcessId p, CommandId id) {
    ProcessState& P = procs_[p];
    auto it = P.announces.find(id);
    if (it == P.announces.end()) return;
    const AnnounceState& st = it->second;
    for (ProcessId q : st.asked)
        if (!st.replies.count(q) && !P.suspected[q]) return;
    const bool slow = st.recovery || st.widened || cfg_.protocol == Protocol::Mencius;
    if (slow && st.replies.size() + 1 < cfg_.majority()) return;  // stalls without a majority

    std::vector<RecoveryReport> reports{st.own};
    for (auto& [q, r] : st.replies) reports.push_back(r);
    AnnounceOutcome out;
    if (cfg_.protocol == Protocol::Mencius) {
        if (st.recovery) {
            out = mencius_recovery_outcome(id, cfg_.n, reports);
        } else {
            IdSet bailed;
            for (auto& r : reports) bailed = set_union(bailed, r.deps);
            out = mencius_outcome(id, cfg_.n, bailed, st.replies.size() + 1 == cfg_.n);
        }
    } else if (st.recovery || st.widened) {
        out = epaxos_recovery_outcome(reports, cfg_.f, opts_.recovery_rule);
    } else {
        std::vector<IdSet> sets;
        for (auto& r : reports) sets.push_back(r.deps);
        out = epaxos_outcome(sets);
    }
    const bool recovery = st.recovery;
    P.announces.erase(it);
    finish_announce(p, id, out, recovery);
}

void Engine::finish_announce(ProcessId p, CommandId id, const AnnounceOutcome& out,
                             bool recovery) {
    ProcessState& P = procs_[p];
    Step& s = emit(StepKind::Respond, p);
    s.event = EventType::Announce;
    s.has_cmd = true;
    s.cmd = id;
    s.value = out.deps;
    s.flag = out.fast;
    s.recovery = recovery;
    P.outcomes.push_back({id, out, recovery});
    if (P.store.is_decided(id)) return;
    if (out.fast && !recovery)
        decide(p, id, out.deps);
    else
        propose(p, id, out.deps, recovery);
}

void Engine::propose(ProcessId p, CommandId id, const DepsValue& v, bool recovery) {
    Step& s = emit(StepKind::Invoke, p);
    s.event = EventType::Propose;
    s.has_cmd = true;
    s.cmd = id;
    s.value = v;
    if (cfg_.consensus == ConsensusMode::Oracle) {
        DepsValue d = oracle_.propose(id, v, p);
        Step& r = emit(StepKind::Respond, p);
        r.event = EventType::Propose;
        r.has_cmd = true;
        r.cmd = id;
        r.value = d;
        decide(p, id, d);
        return;
    }
    auto [it, fresh] = procs_[p].proposers.try_emplace(id, p, cfg_.n);
    std::uint32_t attempt = it->second.ballot().attempt + 1;
    if (fresh) attempt = (!recovery && id.submitter == p) ? 0 : 1;
    route_paxos(p, id, it->second.start(v, attempt));
}

void Engine::route_paxos(ProcessId p, CommandId id, std::vector<PaxosMsg> msgs) {
    // messages a process addresses to itself are handled in place
    std::vector<PaxosMsg> queue = std::move(msgs);
    while (!queue.empty()) {
        PaxosMsg m = std::move(queue.front());
        queue.erase(queue.begin());
        if (m.to == p) {
            on_paxos(p, id, m, queue);
        } else {
            Message msg;
            msg.type = MsgType::Paxos;
            msg.cmd = id;
            msg.paxos = std::move(m);
            ProcessId to = msg.paxos.to;
            send(p, to, std::move(msg));
        }
        if (crashed_[p]) return;
    }
}

void Engine::on_paxos(ProcessId p, CommandId id, const PaxosMsg& m, std::vector<PaxosMsg>& out) {
    ProcessState& P = procs_[p];
    switch (m.type) {
        case PaxosMsg::Type::Prepare:
            out.push_back(P.acceptors[id].on_prepare(m, p));
            return;
        case PaxosMsg::Type::Accept:
            out.push_back(P.acceptors[id].on_accept(m, p));
            return;
        default: break;
    }
    auto it = P.proposers.find(id);
    if (it == P.proposers.end() || P.store.is_decided(id)) return;
    PaxosProposer& pr = it->second;
    switch (m.type) {
        case PaxosMsg::Type::Promise: {
            auto more = pr.on_promise(m);
            out.insert(out.end(), more.begin(), more.end());
            return;
        }
        case PaxosMsg::Type::Accepted: {
            pr.on_accepted(m);
            if (pr.decided()) {
                DepsValue d = *pr.decided();
                pr.stop();
                Step& r = emit(StepKind::Respond, p);
                r.event = EventType::Propose;
                r.has_cmd = true;
                r.cmd = id;
                r.value = d;
                decide(p, id, d);
            }
            return;
        }
        case PaxosMsg::Type::Nack: {
            if (auto retry = pr.on_nack(m)) timers_.push_back({p, id, *retry});
            return;
        }
        default: return;
    }
}

void Engine::fire_timer(const TimerRequest& t) {
    if (crashed_[t.process]) return;
    ProcessState& P = procs_[t.process];
    auto it = P.proposers.find(t.cmd);
    if (it == P.proposers.end() || it->second.active() || P.store.is_decided(t.cmd)) return;
    Step& s = emit(StepKind::Local, t.process);
    s.has_cmd = true;
    s.cmd = t.cmd;
    s.note = note_.empty() ? "retry" : note_;
    // the proposer keeps its own value; start() only consults it when nobody accepted
    DepsValue own = DepsValue::aborted();
    for (auto r = P.outcomes.rbegin(); r != P.outcomes.rend(); ++r)
        if (r->cmd == t.cmd) {
            own = r->outcome.deps;
            break;
        }
    route_paxos(t.process, t.cmd, it->second.start(own, t.attempt));
}

void Engine::decide(ProcessId p, CommandId id, const DepsValue& v) {
    std::optional<Command> body;
    auto kt = procs_[p].known.find(id);
    if (kt != procs_[p].known.end()) body = kt->second;
    apply_decision(p, id, v, body);
    for (ProcessId q = 0; q < cfg_.n; ++q) {
        if (q == p) continue;
        Message m;
        m.type = MsgType::Decision;
        m.cmd = id;
        m.value = v;
        m.body = body;
        send(p, q, std::move(m));
    }
}

void Engine::apply_decision(ProcessId p, CommandId id, const DepsValue& v,
                            const std::optional<Command>& body) {
    ProcessState& P = procs_[p];
    if (body && !P.known.count(id)) learn(P, *body);
    auto dt = P.decisions.find(id);
    if (dt != P.decisions.end() && dt->second == v) return;
    bool changed = false;
    try {
        changed = P.store.apply(id, v);
    } catch (const ConflictingCommit& e) {
        Step& s = emit(StepKind::Local, p);
        s.event = EventType::ConflictingCommit;
        s.has_cmd = true;
        s.cmd = id;
        s.value = v;
        return;
    }
    P.decisions.emplace(id, v);
    if (!changed) return;
    Step& s = emit(StepKind::Local, p);
    s.event = v.is_aborted() ? EventType::Abort : EventType::Commit;
    s.has_cmd = true;
    s.cmd = id;
    s.value = v;

    P.announces.erase(id);
    auto pt = P.proposers.find(id);
    if (pt != P.proposers.end()) pt->second.stop();

    if (cfg_.protocol != Protocol::EPaxos) skip_unused(p, v);
    if (v.is_committed()) {
        for (CommandId d : v.ids) maybe_recover(p, d);
    }
    run_execution(p);
}

void Engine::skip_unused(ProcessId p, const DepsValue& v) {
    if (!v.is_committed()) return;
    ProcessState& P = procs_[p];
    std::vector<CommandId> todo;
    for (CommandId d : v.ids) {
        if (d.submitter != p || P.used_rounds.count(d.seq) || P.skipped.count(d)) continue;
        todo.push_back(d);
    }
    for (CommandId d : todo) {
        if (crashed_[p]) return;
        if (P.store.is_decided(d) || P.skipped.count(d)) continue;
        P.skipped.insert(d);
        P.bailed_rounds.insert(d.seq);
        Command noop{d, noop_key(d), p, {}};
        P.known[d] = noop;
        Step& s = emit(StepKind::Invoke, p);
        s.event = EventType::Submit;
        s.has_cmd = true;
        s.cmd = d;
        s.body = noop;
        s.note = note_.empty() ? "skip" : note_;
        begin_announce(p, d, noop, false, {});
    }
}

void Engine::maybe_recover(ProcessId p, CommandId id) {
    if (crashed_[p]) return;
    ProcessState& P = procs_[p];
    if (id.submitter == p || !P.suspected[id.submitter]) return;
    if (P.store.is_decided(id) || P.recovering.count(id)) return;
    std::optional<Command> body;
    auto kt = P.known.find(id);
    if (kt != P.known.end()) body = kt->second;
    // only a process holding the command body can rebuild its conflicts
    // (an accepted value is enough: the prepare phase will adopt it)
    if (cfg_.protocol == Protocol::EPaxos && !body && !P.acceptors.count(id)) return;
    P.recovering.insert(id);
    Step& s = emit(StepKind::Invoke, p);
    s.event = EventType::Submit;
    s.has_cmd = true;
    s.cmd = id;
    s.body = body;
    s.recovery = true;
    begin_announce(p, id, body, true, {});
}

void Engine::run_execution(ProcessId p) {
    ProcessState& P = procs_[p];
    for (Batch& b : P.store.execute_ready()) {
        Step& s = emit(StepKind::Local, p);
        s.event = EventType::Execute;
        s.batch = b;
        for (CommandId c : b) executions_.push_back({p, c});
    }
}

void Engine::deliver(MessageId mid) {
    auto it = buffer_.find(mid);
    if (it == buffer_.end()) throw PreconditionViolated("message not in flight");
    Message m = std::move(it->second);
    buffer_.erase(it);
    if (crashed_[m.dst]) return;
    Step& s = emit(StepKind::Recv, m.dst);
    s.message = m.id;
    s.sender = m.src;
    s.dest = m.dst;
    s.tag = tag_of(m.type);
    s.has_cmd = true;
    s.cmd = m.cmd;
    s.digest = digest(m);
    switch (m.type) {
        case MsgType::AnnounceRequest: on_announce_request(m.dst, m); break;
        case MsgType::RecoveryRequest: on_recovery_request(m.dst, m); break;
        case MsgType::AnnounceReply:
        case MsgType::RecoveryReply: on_reply(m.dst, m); break;
        case MsgType::Decision: apply_decision(m.dst, m.cmd, m.value, m.body); break;
        case MsgType::Paxos: {
            std::vector<PaxosMsg> out;
            on_paxos(m.dst, m.cmd, m.paxos, out);
            route_paxos(m.dst, m.cmd, std::move(out));
            maybe_recover(m.dst, m.cmd);
            break;
        }
    }
}

void Engine::on_announce_request(ProcessId q, const Message& m) {
    ProcessState& Q = procs_[q];
    Message reply;
    reply.type = MsgType::AnnounceReply;
    reply.cmd = m.cmd;
    if (cfg_.protocol == Protocol::Mencius) {
        if (m.body) learn(Q, *m.body);
        const std::uint32_t limit = owner_round_limit(m.cmd, q);
        for (std::uint32_t r = 0; r < limit; ++r)
            if (!Q.used_rounds.count(r)) Q.bailed_rounds.insert(r);
        Q.next_seq = std::max(Q.next_seq, limit);
        for (std::uint32_t r : Q.bailed_rounds)
            if (r < limit) reply.deps.push_back(CommandId{q, r});
        reply.knew = true;
    } else {
        auto rec = Q.recorded.find(m.cmd);
        if (rec == Q.recorded.end()) {
            IdSet d = set_union(seen_conflicts(Q, *m.body), m.deps);
            erase(d, m.cmd);
            rec = Q.recorded.emplace(m.cmd, std::move(d)).first;
            learn(Q, *m.body);
        }
        reply.deps = rec->second;
        reply.knew = true;
    }
    send(q, m.src, std::move(reply));
    maybe_recover(q, m.cmd);
}

void Engine::on_recovery_request(ProcessId q, const Message& m) {
    ProcessState& Q = procs_[q];
    Message reply;
    reply.type = MsgType::RecoveryReply;
    reply.cmd = m.cmd;
    auto dt = Q.decisions.find(m.cmd);
    if (dt != Q.decisions.end()) {
        reply.decided = dt->second;
        reply.knew = true;
    } else if (cfg_.protocol == Protocol::EPaxos) {
        auto rec = Q.recorded.find(m.cmd);
        if (rec != Q.recorded.end()) {
            reply.knew = true;
            reply.deps = rec->second;
        } else if (m.body) {
            IdSet d = seen_conflicts(Q, *m.body);
            Q.recorded[m.cmd] = d;
            learn(Q, *m.body);
            reply.deps = d;
        }
    } else {
        if (m.cmd.submitter == q) {
            reply.knew = Q.used_rounds.count(m.cmd.seq) > 0;
            if (!reply.knew) Q.bailed_rounds.insert(m.cmd.seq);
        } else {
            reply.knew = Q.known.count(m.cmd) > 0;
        }
        if (m.body && !Q.known.count(m.cmd)) learn(Q, *m.body);
    }
    send(q, m.src, std::move(reply));
    maybe_recover(q, m.cmd);
}

void Engine::on_reply(ProcessId p, const Message& m) {
    ProcessState& P = procs_[p];
    auto it = P.announces.find(m.cmd);
    if (it == P.announces.end()) return;
    const bool recovery_reply = m.type == MsgType::RecoveryReply;
    if (recovery_reply != it->second.recovery || !it->second.asked.count(m.src)) return;
    it->second.replies[m.src] = RecoveryReport{m.knew, m.deps, m.decided};
    try_complete(p, m.cmd);
}

void Engine::crash(ProcessId p) {
    if (crashed_[p]) return;
    Step& s = emit(StepKind::Local, p);
    s.event = EventType::Crash;
    crashed_[p] = true;
    std::erase_if(buffer_, [p](const auto& kv) { return kv.second.dst == p; });
}

bool Engine::inert(MessageId mid) const {
    const Message& m = buffer_.at(mid);
    if (crashed_[m.dst]) return true;
    const ProcessState& P = procs_[m.dst];
    switch (m.type) {
        case MsgType::Decision: {
            auto dt = P.decisions.find(m.cmd);
            return dt != P.decisions.end() && dt->second == m.value &&
                   (!m.body || P.known.count(m.cmd));
        }
        case MsgType::AnnounceReply:
        case MsgType::RecoveryReply:
            // once decided no announce for the command can start again
            return !P.announces.count(m.cmd) && P.store.is_decided(m.cmd);
        default: return false;
    }
}

void Engine::suspect(ProcessId p, ProcessId q) {
    if (crashed_[p]) return;
    ProcessState& P = procs_[p];
    if (P.suspected[q]) return;
    P.suspected[q] = true;
    Step& s = emit(StepKind::FdQuery, p);
    s.event = EventType::Suspect;
    s.other = q;

    std::vector<CommandId> waiting;
    for (auto& [id, st] : P.announces) waiting.push_back(id);
    for (CommandId id : waiting) {
        auto it = P.announces.find(id);
        if (it == P.announces.end()) continue;
        const AnnounceState& st = it->second;
        if (cfg_.protocol == Protocol::EPaxos && !st.recovery && !st.widened &&
            st.asked.count(q) && !st.replies.count(q))
            widen(p, id);
        try_complete(p, id);
    }
    std::vector<CommandId> candidates = P.store.pending_ids();
    for (auto& [id, c] : P.known)
        if (!P.store.is_decided(id)) candidates.push_back(id);
    for (auto& [id, a] : P.acceptors)
        if (!P.store.is_decided(id)) candidates.push_back(id);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (CommandId id : candidates) maybe_recover(p, id);
}

void Engine::canonical(std::string& out) const {
    using bytes::put;
    for (ProcessId p = 0; p < cfg_.n; ++p) {
        const ProcessState& P = procs_[p];
        put(out, static_cast<std::uint64_t>(crashed_[p]));
        P.store.serialize(out);
        put(out, static_cast<std::uint64_t>(P.decisions.size()));
        for (auto& [id, v] : P.decisions) {
            put(out, id);
            put(out, v);
        }
        put(out, static_cast<std::uint64_t>(P.known.size()));
        for (auto& [id, c] : P.known) {
            put(out, id);
            put(out, c.key);
        }
        put(out, static_cast<std::uint64_t>(P.recorded.size()));
        for (auto& [id, d] : P.recorded) {
            put(out, id);
            put(out, d);
        }
        put(out, static_cast<std::uint64_t>(P.next_seq));
        put(out, static_cast<std::uint64_t>(P.used_rounds.size()));
        for (auto r : P.used_rounds) put(out, static_cast<std::uint64_t>(r));
        put(out, static_cast<std::uint64_t>(P.bailed_rounds.size()));
        for (auto r : P.bailed_rounds) put(out, static_cast<std::uint64_t>(r));
        put(out, IdSet(P.skipped.begin(), P.skipped.end()));
        put(out, IdSet(P.recovering.begin(), P.recovering.end()));
        std::uint64_t mask = 0;
        for (ProcessId q = 0; q < cfg_.n; ++q)
            if (P.suspected[q]) mask |= 1ull << q;
        put(out, mask);
        put(out, static_cast<std::uint64_t>(P.announces.size()));
        for (auto& [id, st] : P.announces) {
            put(out, id);
            put(out, static_cast<std::uint64_t>(st.recovery) | (st.widened ? 2u : 0u));
            for (ProcessId q : st.asked) put(out, static_cast<std::uint64_t>(q));
            put(out, static_cast<std::uint64_t>(st.replies.size()));
            for (auto& [q, r] : st.replies) {
                put(out, static_cast<std::uint64_t>(q) | (r.knew ? 1ull << 40 : 0));
                put(out, r.deps);
                if (r.decided) put(out, *r.decided);
            }
            put(out, st.own.deps);
        }
        put(out, static_cast<std::uint64_t>(P.outcomes.size()));
        for (auto& o : P.outcomes) {
            put(out, o.cmd);
            put(out, o.outcome.deps);
            put(out, static_cast<std::uint64_t>(o.outcome.fast) | (o.recovery ? 2u : 0u));
        }
    }
    std::vector<std::string> msgs;
    msgs.reserve(buffer_.size());
    for (auto& [id, m] : buffer_) {
        std::string s;
        serialize(m, s);
        msgs.push_back(std::move(s));
    }
    std::sort(msgs.begin(), msgs.end());
    put(out, static_cast<std::uint64_t>(msgs.size()));
    for (auto& s : msgs) put(out, s);
    for (auto& [id, inst] : oracle_.instances()) {
        put(out, id);
        if (inst.decided) put(out, *inst.decided);
    }
}

}  // namespace lsmr
