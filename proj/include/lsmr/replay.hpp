#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lsmr/deps_store.hpp"
#include "lsmr/trace.hpp"

namespace lsmr {

// Rebuilds every process's dependency store from the commit and abort events of a
// trace, noting when each command first becomes stable at each process.
class StoreReplay {
public:
    explicit StoreReplay(std::uint32_t n);

    // Feeds one step; returns the commands that became stable at its process.
    std::vector<CommandId> feed(const Step& s);
    void feed_all(const Trace& t, std::uint64_t until_seq = UINT64_MAX);

    const DepsStore& store(ProcessId p) const { return procs_.at(p).store; }
    // The committed value a command had when it became stable at p.
    const std::map<CommandId, DepsValue>& stable_values(ProcessId p) const {
        return procs_.at(p).stable_value;
    }
    const std::map<CommandId, std::uint64_t>& stable_seq(ProcessId p) const {
        return procs_.at(p).stable_seq;
    }
    std::uint32_t n() const { return static_cast<std::uint32_t>(procs_.size()); }

private:
    struct Proc {
        DepsStore store;
        std::map<CommandId, std::vector<CommandId>> dependents;
        std::map<CommandId, std::vector<CommandId>> waiting;  // undecided -> committed dependents
        std::map<CommandId, std::size_t> undecided_deps;
        std::map<CommandId, DepsValue> stable_value;
        std::map<CommandId, std::uint64_t> stable_seq;
    };
    std::vector<Proc> procs_;
};

}  // namespace lsmr
