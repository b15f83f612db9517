#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsmr/command.hpp"
#include "lsmr/config.hpp"

namespace lsmr {

using MessageId = std::uint64_t;

enum class StepKind : std::uint8_t { Send, Recv, FdQuery, Local, Invoke, Respond };

enum class EventType : std::uint8_t {
    None,
    Submit,     // Invoke: a command enters the protocol (workload, skip or recovery)
    Announce,   // Invoke/Respond of the dependency discovery service
    Propose,    // Invoke/Respond of the consensus object
    Commit,
    Abort,
    Execute,
    Crash,
    Suspect,
    ConflictingCommit,
};

const char* to_string(StepKind k);
const char* to_string(EventType e);
StepKind parse_step_kind(const std::string& s);
EventType parse_event_type(const std::string& s);

struct Step {
    std::uint64_t seq = 0;
    std::int64_t time = 0;
    StepKind kind = StepKind::Local;
    ProcessId process = 0;

    // message steps
    MessageId message = 0;
    ProcessId sender = kNoProcess;
    ProcessId dest = kNoProcess;
    std::string tag;
    std::uint64_t digest = 0;

    // event payload
    EventType event = EventType::None;
    bool has_cmd = false;
    CommandId cmd;
    DepsValue value;
    bool flag = false;
    bool recovery = false;
    std::optional<Command> body;
    std::vector<CommandId> batch;
    std::vector<ProcessId> quorum;
    ProcessId other = kNoProcess;
    std::string note;  // free-form annotation (scheduler block labels, skip markers)

    bool operator==(const Step&) const = default;
};

struct Trace {
    SystemConfig config;
    std::vector<Step> steps;
    std::string scheduler;
    std::uint64_t seed = 0;
};

class TraceInvalid : public Error {
public:
    using Error::Error;
};

// JSON lines: a header object with the configuration, then one object per step.
void write_jsonl(const Trace& t, std::ostream& out);
Trace read_jsonl(std::istream& in);
void save_trace(const Trace& t, const std::string& path);
Trace load_trace(const std::string& path);

}  // namespace lsmr
