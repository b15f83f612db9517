#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "lsmr/command.hpp"

namespace lsmr {

// Simulator-level decision register: the first proposal for a command wins.
class OracleConsensus {
public:
    struct Instance {
        std::optional<DepsValue> decided;
        std::vector<std::pair<ProcessId, DepsValue>> proposals;
    };

    DepsValue propose(CommandId c, const DepsValue& v, ProcessId proposer);
    const Instance* find(CommandId c) const;
    const std::map<CommandId, Instance>& instances() const { return instances_; }

private:
    std::map<CommandId, Instance> instances_;
};

struct Ballot {
    std::uint32_t attempt = 0;
    ProcessId proposer = 0;

    auto operator<=>(const Ballot&) const = default;
};

struct PaxosMsg {
    enum class Type : std::uint8_t { Prepare, Promise, Accept, Accepted, Nack };
    Type type = Type::Prepare;
    ProcessId from = 0;
    ProcessId to = 0;
    Ballot ballot;
    bool has_accepted = false;
    Ballot accepted_ballot;
    DepsValue value;
};

class PaxosAcceptor {
public:
    PaxosMsg on_prepare(const PaxosMsg& m, ProcessId self);
    PaxosMsg on_accept(const PaxosMsg& m, ProcessId self);

    Ballot promised;
    bool has_accepted = false;
    Ballot accepted_ballot;
    DepsValue accepted;
};

// Single-decree two-phase proposer over n acceptors (self included).
class PaxosProposer {
public:
    PaxosProposer() = default;
    PaxosProposer(ProcessId self, std::uint32_t n) : self_(self), n_(n) {}

    // The lowest ballot belongs to the command's coordinator alone, so it may skip
    // the prepare phase: no acceptor can have accepted anything below it.
    std::vector<PaxosMsg> start(const DepsValue& v, std::uint32_t attempt);
    std::vector<PaxosMsg> on_promise(const PaxosMsg& m);
    std::vector<PaxosMsg> on_accepted(const PaxosMsg& m);
    // Returns the attempt to retry with, when the nack preempts the current ballot.
    std::optional<std::uint32_t> on_nack(const PaxosMsg& m);

    const std::optional<DepsValue>& decided() const { return decided_; }
    const Ballot& ballot() const { return ballot_; }
    bool active() const { return phase_ != Phase::Idle && !decided_; }
    void stop() { phase_ = Phase::Idle; }

private:
    enum class Phase : std::uint8_t { Idle, Preparing, Accepting };

    std::vector<PaxosMsg> broadcast(PaxosMsg::Type t, const DepsValue& v) const;

    ProcessId self_ = 0;
    std::uint32_t n_ = 1;
    Phase phase_ = Phase::Idle;
    Ballot ballot_;
    DepsValue own_;
    DepsValue value_;
    std::set<ProcessId> promises_;
    std::set<ProcessId> accepts_;
    bool best_set_ = false;
    Ballot best_ballot_;
    DepsValue best_value_;
    std::optional<DepsValue> decided_;
};

}  // namespace lsmr
