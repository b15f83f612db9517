#include "lsmr/dds.hpp"

#include <map>

namespace lsmr {

bool slot_less(CommandId a, CommandId b) {
    if (a.seq != b.seq) return a.seq < b.seq;
    return a.submitter < b.submitter;
}

std::uint32_t owner_round_limit(CommandId slot, ProcessId owner) {
    return owner < slot.submitter ? slot.seq + 1 : slot.seq;
}

IdSet prior_slots(CommandId slot, std::uint32_t n) {
    IdSet out;
    for (ProcessId q = 0; q < n; ++q) {
        std::uint32_t limit = owner_round_limit(slot, q);
        for (std::uint32_t r = 0; r < limit; ++r) out.push_back(CommandId{q, r});
    }
    return out;  // already sorted: owner-major, then round
}

AnnounceOutcome rotating_outcome(CommandId slot, std::uint32_t n, bool bailed) {
    if (bailed) return {DepsValue::aborted(), false};
    return {DepsValue::committed(prior_slots(slot, n)), false};
}

AnnounceOutcome mencius_outcome(CommandId slot, std::uint32_t n, const IdSet& bailed,
                                bool heard_from_everybody) {
    return {DepsValue::committed(set_difference(prior_slots(slot, n), bailed)),
            heard_from_everybody};
}

AnnounceOutcome epaxos_outcome(const std::vector<IdSet>& member_sets) {
    IdSet all;
    bool agree = true;
    for (const IdSet& s : member_sets) {
        all = set_union(all, s);
        if (s != member_sets.front()) agree = false;
    }
    return {DepsValue::committed(std::move(all)), agree};
}

AnnounceOutcome epaxos_recovery_outcome(const std::vector<RecoveryReport>& reports,
                                        std::uint32_t f, RecoveryRule rule) {
    for (const auto& r : reports)
        if (r.decided) return {*r.decided, false};

    bool anyone_knew = false;
    for (const auto& r : reports) anyone_knew = anyone_knew || r.knew;
    if (!anyone_knew) return {DepsValue::aborted(), false};

    if (rule == RecoveryRule::Threshold) {
        const std::size_t need = (f + 2) / 2;
        std::map<IdSet, std::size_t> votes;
        for (const auto& r : reports)
            if (r.knew) ++votes[r.deps];
        for (const auto& [set, count] : votes)
            if (count >= need) return {DepsValue::committed(set), false};
        IdSet all;
        for (const auto& r : reports)
            if (r.knew) all = set_union(all, r.deps);
        return {DepsValue::committed(std::move(all)), false};
    }

    IdSet all;
    for (const auto& r : reports) all = set_union(all, r.deps);
    return {DepsValue::committed(std::move(all)), false};
}

AnnounceOutcome mencius_recovery_outcome(CommandId slot, std::uint32_t n,
                                         const std::vector<RecoveryReport>& reports) {
    for (const auto& r : reports)
        if (r.decided) return {*r.decided, false};
    for (const auto& r : reports)
        if (r.knew) return {DepsValue::committed(prior_slots(slot, n)), false};
    return {DepsValue::aborted(), false};
}

}  // namespace lsmr
