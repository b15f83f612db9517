#pragma once

#include <optional>
#include <vector>

#include "lsmr/command.hpp"

namespace lsmr {

struct AnnounceOutcome {
    DepsValue deps;
    bool fast = false;

    bool operator==(const AnnounceOutcome&) const = default;
};

// Slot protocols reuse the command id as the slot: seq is the round and submitter
// the owner. Slots are ranked by round, ties broken by owner index.
bool slot_less(CommandId a, CommandId b);
// Every slot strictly before `slot` in that ranking, for n owners.
IdSet prior_slots(CommandId slot, std::uint32_t n);
// Rounds of `owner` that precede `slot`: [0, limit).
std::uint32_t owner_round_limit(CommandId slot, ProcessId owner);

// Rotating coordinator: everything before the slot, never fast.
AnnounceOutcome rotating_outcome(CommandId slot, std::uint32_t n, bool bailed);

// Mencius: prior slots minus those their owners bailed out; fast iff all n answered.
AnnounceOutcome mencius_outcome(CommandId slot, std::uint32_t n, const IdSet& bailed,
                                bool heard_from_everybody);

// EPaxos: union of the members' conflict sets, fast iff they all agree.
AnnounceOutcome epaxos_outcome(const std::vector<IdSet>& member_sets);

struct RecoveryReport {
    bool knew = false;  // had recorded the command before the recovery reached it
    IdSet deps;
    std::optional<DepsValue> decided;
};

enum class RecoveryRule : std::uint8_t {
    Union,      // union over all reports, including fresh ones
    Threshold,  // first adopt a set reported identically by ceil((f+1)/2) knowers
};

AnnounceOutcome epaxos_recovery_outcome(const std::vector<RecoveryReport>& reports,
                                        std::uint32_t f, RecoveryRule rule);

AnnounceOutcome mencius_recovery_outcome(CommandId slot, std::uint32_t n,
                                         const std::vector<RecoveryReport>& reports);

}  // namespace lsmr
