#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsmr {

using ProcessId = std::uint32_t;
using Key = std::uint64_t;

inline constexpr ProcessId kNoProcess = 0xffffffffu;

// Ids order lexicographically: submitter first, then its local sequence number.
struct CommandId {
    std::uint32_t submitter = 0;
    std::uint32_t seq = 0;

    auto operator<=>(const CommandId&) const = default;
};

std::string to_string(CommandId id);

struct Command {
    CommandId id;
    Key key = 0;
    ProcessId submitter = 0;
    std::string payload;

    bool operator==(const Command&) const = default;
};

bool conflicts(const Command& c, const Command& d);

// Sorted, duplicate-free vector of ids.
using IdSet = std::vector<CommandId>;

inline bool contains(const IdSet& s, CommandId id) {
    return std::binary_search(s.begin(), s.end(), id);
}
bool insert(IdSet& s, CommandId id);
bool erase(IdSet& s, CommandId id);
IdSet set_union(const IdSet& a, const IdSet& b);
IdSet set_difference(const IdSet& a, const IdSet& b);
IdSet symmetric_difference(const IdSet& a, const IdSet& b);
IdSet make_set(std::vector<CommandId> ids);

struct DepsValue {
    enum class Kind : std::uint8_t { Unset, Committed, Aborted };
    Kind kind = Kind::Unset;
    IdSet ids;

    static DepsValue unset() { return {}; }
    static DepsValue committed(IdSet ids) { return {Kind::Committed, std::move(ids)}; }
    static DepsValue aborted() { return {Kind::Aborted, {}}; }

    bool is_unset() const { return kind == Kind::Unset; }
    bool is_committed() const { return kind == Kind::Committed; }
    bool is_aborted() const { return kind == Kind::Aborted; }

    bool operator==(const DepsValue&) const = default;
};

std::string to_string(const DepsValue& v);

enum class Phase : std::uint8_t { Pending, Commit, Abort, Stable, Execute };

const char* to_string(Phase p);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConflictingCommit : public Error {
public:
    ConflictingCommit(CommandId c, DepsValue existing, DepsValue incoming);
    CommandId command;
    DepsValue existing;
    DepsValue incoming;
};

class NotStable : public Error {
public:
    explicit NotStable(CommandId c);
};

}  // namespace lsmr
