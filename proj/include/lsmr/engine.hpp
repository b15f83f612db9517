#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lsmr/config.hpp"
#include "lsmr/consensus.hpp"
#include "lsmr/dds.hpp"
#include "lsmr/deps_store.hpp"
#include "lsmr/trace.hpp"

namespace lsmr {

enum class MsgType : std::uint8_t {
    AnnounceRequest,
    AnnounceReply,
    RecoveryRequest,
    RecoveryReply,
    Decision,
    Paxos,
};

const char* tag_of(MsgType t);

struct Message {
    MessageId id = 0;
    ProcessId src = 0;
    ProcessId dst = 0;
    MsgType type = MsgType::Decision;
    CommandId cmd;
    std::optional<Command> body;
    IdSet deps;
    DepsValue value;
    bool knew = false;
    std::optional<DepsValue> decided;
    PaxosMsg paxos;
};

void serialize(const Message& m, std::string& out);
std::uint64_t digest(const Message& m);

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

// Ongoing announce at its initiator (coordinator or recovering process).
struct AnnounceState {
    bool recovery = false;
    bool widened = false;  // EPaxos fell back to asking everybody
    std::vector<ProcessId> quorum;
    std::set<ProcessId> asked;
    std::map<ProcessId, RecoveryReport> replies;
    RecoveryReport own;
};

struct OutcomeRecord {
    CommandId cmd;
    AnnounceOutcome outcome;
    bool recovery = false;
};

struct ProcessState {
    ProcessId id = 0;
    DepsStore store;
    std::map<CommandId, DepsValue> decisions;  // raw decided values as received
    std::map<CommandId, Command> known;
    std::map<Key, IdSet> seen_by_key;
    std::map<CommandId, IdSet> recorded;
    std::uint32_t next_seq = 0;
    std::set<std::uint32_t> used_rounds;
    std::set<std::uint32_t> bailed_rounds;
    std::set<CommandId> skipped;
    std::set<CommandId> recovering;
    std::vector<bool> suspected;
    std::map<CommandId, AnnounceState> announces;
    std::map<CommandId, PaxosProposer> proposers;
    std::map<CommandId, PaxosAcceptor> acceptors;
    std::vector<OutcomeRecord> outcomes;
};

struct TimerRequest {
    ProcessId process = 0;
    CommandId cmd;
    std::uint32_t attempt = 0;
};

struct ExecutionNote {
    ProcessId process = 0;
    CommandId cmd;
};

struct EngineOptions {
    RecoveryRule recovery_rule = RecoveryRule::Union;
    // Picks the fast quorum when a submit does not name one.
    std::function<std::vector<ProcessId>(ProcessId)> quorum_policy;
};

Key noop_key(CommandId id);
bool is_noop_key(Key k);

// The system state of a run: processes running the deciding protocol on top of
// their dependency stores, the message buffer, the consensus objects and the
// crash state. Every public mutator is one atomic step of one process.
class Engine {
public:
    Engine(SystemConfig cfg, EngineOptions opts = {});

    const SystemConfig& config() const { return cfg_; }
    void set_time(std::int64_t t) { now_ = t; }
    std::int64_t time() const { return now_; }

    CommandId submit(ProcessId p, Key key, std::string payload = {},
                     std::vector<ProcessId> quorum = {});
    // Takes over a command whose coordinator this process suspects.
    void recover(ProcessId p, CommandId c);
    void deliver(MessageId m);
    void crash(ProcessId p);
    void suspect(ProcessId p, ProcessId q);
    void fire_timer(const TimerRequest& t);

    bool crashed(ProcessId p) const { return crashed_[p]; }
    const ProcessState& process(ProcessId p) const { return procs_[p]; }
    const std::map<MessageId, Message>& in_flight() const { return buffer_; }
    // Delivering this message would change nothing but the buffer: it is dropped, or
    // repeats a decision already applied, or answers an announce that is over for good.
    bool inert(MessageId id) const;
    const OracleConsensus& oracle() const { return oracle_; }
    ProcessId coord(CommandId c) const { return c.submitter; }

    std::vector<Step>& steps() { return steps_; }
    std::vector<Step> take_steps();
    std::vector<MessageId> take_sent();
    std::vector<TimerRequest> take_timers();
    std::vector<ExecutionNote> take_executions();
    std::uint64_t next_seq() const { return seq_; }

    // Annotates every step emitted from now on.
    void set_note(std::string note) { note_ = std::move(note); }

    void canonical(std::string& out) const;

private:
    Step& emit(StepKind kind, ProcessId p);
    void send(ProcessId from, ProcessId to, Message m);

    void learn(ProcessState& P, const Command& c);
    IdSet seen_conflicts(const ProcessState& P, const Command& c) const;

    void begin_announce(ProcessId p, CommandId id, const std::optional<Command>& body,
                        bool recovery, std::vector<ProcessId> quorum);
    void widen(ProcessId p, CommandId id);
    void try_complete(ProcessId p, CommandId id);
    void finish_announce(ProcessId p, CommandId id, const AnnounceOutcome& out, bool recovery);
    void propose(ProcessId p, CommandId id, const DepsValue& v, bool recovery);
    void decide(ProcessId p, CommandId id, const DepsValue& v);
    void apply_decision(ProcessId p, CommandId id, const DepsValue& v,
                        const std::optional<Command>& body);
    void skip_unused(ProcessId p, const DepsValue& v);
    void maybe_recover(ProcessId p, CommandId id);
    void run_execution(ProcessId p);

    void on_announce_request(ProcessId q, const Message& m);
    void on_recovery_request(ProcessId q, const Message& m);
    void on_reply(ProcessId p, const Message& m);
    void route_paxos(ProcessId p, CommandId id, std::vector<PaxosMsg> msgs);
    void on_paxos(ProcessId p, CommandId id, const PaxosMsg& m, std::vector<PaxosMsg>& out);

    SystemConfig cfg_;
    EngineOptions opts_;
    std::vector<ProcessState> procs_;
    std::vector<bool> crashed_;
    std::map<MessageId, Message> buffer_;
    OracleConsensus oracle_;

    std::int64_t now_ = 0;
    std::uint64_t seq_ = 0;
    MessageId next_msg_ = 1;
    std::string note_;
    std::vector<Step> steps_;
    std::vector<MessageId> sent_;
    std::vector<TimerRequest> timers_;
    std::vector<ExecutionNote> executions_;
};

}  // namespace lsmr
