#include "lsmr/replay.hpp"

#include <set>

namespace lsmr {

StoreReplay::StoreReplay(std::uint32_t n) : procs_(n) {}

std::vector<CommandId> StoreReplay::feed(const Step& s) {
    if (s.kind != StepKind::Local) return {};
    if (s.event != EventType::Commit && s.event != EventType::Abort) return {};
    if (s.process >= procs_.size()) throw TraceInvalid("step at an unknown process");
    Proc& P = procs_[s.process];
    try {
        if (!P.store.apply(s.cmd, s.value)) return {};
    } catch (const ConflictingCommit&) {
        return {};  // the stability checker reports these on its own
    }
    if (s.value.is_committed()) {
        std::size_t missing = 0;
        for (CommandId d : P.store.deps(s.cmd).ids) {
            // propagation starts where a command turns stable, which a stable d never does again
            if (!P.stable_value.count(d)) P.dependents[d].push_back(s.cmd);
            if (d != s.cmd && !P.store.is_decided(d)) {
                P.waiting[d].push_back(s.cmd);
                ++missing;
            }
        }
        if (missing) P.undecided_deps[s.cmd] = missing;
    }
    if (auto w = P.waiting.find(s.cmd); w != P.waiting.end()) {
        for (CommandId y : w->second)
            if (--P.undecided_deps[y] == 0) P.undecided_deps.erase(y);
        P.waiting.erase(w);
    }

    // Only commands reaching the newly decided one can change their stability, and
    // only through a path of commands that are stable themselves.
    std::vector<CommandId> out;
    std::set<CommandId> seen{s.cmd};
    std::vector<CommandId> stack{s.cmd};
    while (!stack.empty()) {
        CommandId x = stack.back();
        stack.pop_back();
        const bool aborted = P.store.deps(x).is_aborted();
        if (!aborted) {
            // a direct dependency still undecided rules out stability without a search
            if (P.undecided_deps.count(x) || !P.store.is_stable(x)) continue;
            if (!P.stable_value.count(x)) {
                P.stable_value.emplace(x, P.store.deps(x));
                P.stable_seq.emplace(x, s.seq);
                out.push_back(x);
            }
        }
        auto it = P.dependents.find(x);
        if (it == P.dependents.end()) continue;
        for (CommandId y : it->second)
            if (seen.insert(y).second) stack.push_back(y);
    }
    return out;
}

void StoreReplay::feed_all(const Trace& t, std::uint64_t until_seq) {
    for (const Step& s : t.steps) {
        if (s.seq > until_seq) break;
        feed(s);
    }
}

}  // namespace lsmr
