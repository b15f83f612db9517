#include "lsmr/command.hpp"

#include <iterator>

namespace lsmr {

std::string to_string(CommandId id) {
    return "(" + std::to_string(id.submitter) + "," + std::to_string(id.seq) + ")";
}

bool conflicts(const Command& c, const Command& d) {
    return c.id != d.id && c.key == d.key;
}

bool insert(IdSet& s, CommandId id) {
    auto it = std::lower_bound(s.begin(), s.end(), id);
    if (it != s.end() && *it == id) return false;
    s.insert(it, id);
    return true;
}

bool erase(IdSet& s, CommandId id) {
    auto it = std::lower_bound(s.begin(), s.end(), id);
    if (it == s.end() || *it != id) return false;
    s.erase(it);
    return true;
}

IdSet set_union(const IdSet& a, const IdSet& b) {
    IdSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IdSet set_difference(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IdSet symmetric_difference(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(out));
    return out;
}

IdSet make_set(std::vector<CommandId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::string to_string(const DepsValue& v) {
    switch (v.kind) {
        case DepsValue::Kind::Unset: return "unset";
        case DepsValue::Kind::Aborted: return "abort";
        case DepsValue::Kind::Committed: break;
    }
    std::string s = "{";
    for (std::size_t i = 0; i < v.ids.size(); ++i) {
        if (i) s += ",";
        s += to_string(v.ids[i]);
    }
    return s + "}";
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Pending: return "pending";
        case Phase::Commit: return "commit";
        case Phase::Abort: return "abort";
        case Phase::Stable: return "stable";
        case Phase::Execute: return "execute";
    }
    return "?";
}

ConflictingCommit::ConflictingCommit(CommandId c, DepsValue e, DepsValue i)
    : Error("conflicting decision for " + to_string(c) + ": have " + to_string(e) +
            ", got " + to_string(i)),
      command(c),
      existing(std::move(e)),
      incoming(std::move(i)) {}

NotStable::NotStable(CommandId c) : Error("command " + to_string(c) + " is not stable") {}

}  // namespace lsmr
