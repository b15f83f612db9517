#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lsmr/command.hpp"

namespace lsmr {

using Batch = std::vector<CommandId>;

// Per-process dependency graph: deps values, derived phases and batch execution.
class DepsStore {
public:
    // Returns false when the call was a no-op (identical re-delivery).
    bool commit(CommandId c, IdSet deps);
    bool abort(CommandId c);
    bool apply(CommandId c, const DepsValue& v);

    const DepsValue& deps(CommandId c) const;
    Phase phase(CommandId c) const;
    bool is_decided(CommandId c) const { return !deps(c).is_unset(); }

    IdSet transitive_deps(CommandId c) const;
    bool is_stable(CommandId c) const;
    bool is_executed(CommandId c) const;
    bool exec_order_less(CommandId c, CommandId d) const;

    Batch execute(CommandId c);
    // Executes every stable command not yet executed, scanning in id order.
    std::vector<Batch> execute_ready();

    const std::vector<Batch>& executed() const { return batches_; }
    std::vector<CommandId> pending_ids() const;
    std::vector<CommandId> known_ids() const;
    std::size_t size() const { return entries_.size(); }

    void serialize(std::string& out) const;

private:
    struct Entry {
        DepsValue value;
        bool executed = false;
        mutable bool stable = false;
        // committed deps not yet executed; compacted lazily
        mutable IdSet open;
    };

    Entry& touch(CommandId c);
    const Entry* find(CommandId c) const;
    void compact(const Entry& e) const;
    Batch order_batch(const std::vector<CommandId>& members) const;

    std::map<CommandId, Entry> entries_;
    std::map<CommandId, std::vector<CommandId>> dependents_;  // undecided dep -> committers
    std::set<CommandId> runnable_;
    std::vector<Batch> batches_;
};

}  // namespace lsmr
