#include "lsmr/trace.hpp"

#include <fstream>
#include <set>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace lsmr {

using nlohmann::json;

namespace {

constexpr const char* kKindNames[] = {"send", "recv", "fd", "local", "invoke", "respond"};
constexpr const char* kEventNames[] = {"none",   "submit", "announce", "propose", "commit",
                                       "abort",  "execute", "crash",   "suspect",
                                       "conflicting-commit"};

json id_json(CommandId c) { return json::array({c.submitter, c.seq}); }

CommandId id_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw TraceInvalid("command id must be [submitter, seq]");
    return CommandId{j[0].get<std::uint32_t>(), j[1].get<std::uint32_t>()};
}

json value_json(const DepsValue& v) {
    if (v.is_aborted()) return "abort";
    json arr = json::array();
    for (CommandId c : v.ids) arr.push_back(id_json(c));
    return arr;
}

DepsValue value_from(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "abort") throw TraceInvalid("bad deps value");
        return DepsValue::aborted();
    }
    IdSet ids;
    for (const auto& e : j) ids.push_back(id_from(e));
    return DepsValue::committed(make_set(std::move(ids)));
}

json step_json(const Step& s) {
    json j;
    j["seq"] = s.seq;
    j["time"] = s.time;
    j["kind"] = to_string(s.kind);
    j["process"] = s.process;
    if (s.kind == StepKind::Send || s.kind == StepKind::Recv) {
        j["message"] = s.message;
        j["sender"] = s.sender;
        j["dest"] = s.dest;
        j["tag"] = s.tag;
        j["digest"] = s.digest;
    }
    if (s.event != EventType::None) j["event"] = to_string(s.event);
    if (s.has_cmd) j["cmd"] = id_json(s.cmd);
    if (!s.value.is_unset()) j["value"] = value_json(s.value);
    if (s.flag) j["flag"] = true;
    if (s.recovery) j["recovery"] = true;
    if (s.body) j["body"] = {{"key", s.body->key}, {"payload", s.body->payload}};
    if (!s.batch.empty()) {
        json b = json::array();
        for (CommandId c : s.batch) b.push_back(id_json(c));
        j["batch"] = b;
    }
    if (!s.quorum.empty()) j["quorum"] = s.quorum;
    if (s.other != kNoProcess) j["other"] = s.other;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

Step step_from(const json& j) {
    static const std::set<std::string> allowed = {
        "seq",  "time",  "kind",     "process", "message", "sender", "dest",  "tag",  "digest",
        "event", "cmd", "value", "flag", "recovery", "body", "batch", "quorum", "other", "note"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw TraceInvalid("unknown step field '" + it.key() + "'");
    Step s;
    s.seq = j.at("seq").get<std::uint64_t>();
    s.time = j.at("time").get<std::int64_t>();
    s.kind = parse_step_kind(j.at("kind").get<std::string>());
    s.process = j.at("process").get<ProcessId>();
    if (j.contains("message")) {
        s.message = j["message"].get<MessageId>();
        s.sender = j.at("sender").get<ProcessId>();
        s.dest = j.at("dest").get<ProcessId>();
        s.tag = j.at("tag").get<std::string>();
        s.digest = j.at("digest").get<std::uint64_t>();
    }
    if (j.contains("event")) s.event = parse_event_type(j["event"].get<std::string>());
    if (j.contains("cmd")) {
        s.has_cmd = true;
        s.cmd = id_from(j["cmd"]);
    }
    if (j.contains("value")) s.value = value_from(j["value"]);
    s.flag = j.value("flag", false);
    s.recovery = j.value("recovery", false);
    if (j.contains("body")) {
        Command c;
        c.id = s.cmd;
        c.submitter = s.cmd.submitter;
        c.key = j["body"].at("key").get<Key>();
        c.payload = j["body"].value("payload", std::string{});
        s.body = c;
    }
    if (j.contains("batch"))
        for (const auto& e : j["batch"]) s.batch.push_back(id_from(e));
    if (j.contains("quorum")) s.quorum = j["quorum"].get<std::vector<ProcessId>>();
    if (j.contains("other")) s.other = j["other"].get<ProcessId>();
    s.note = j.value("note", std::string{});
    return s;
}

}  // namespace

const char* to_string(StepKind k) { return kKindNames[static_cast<int>(k)]; }
const char* to_string(EventType e) { return kEventNames[static_cast<int>(e)]; }

StepKind parse_step_kind(const std::string& s) {
    for (int i = 0; i < 6; ++i)
        if (s == kKindNames[i]) return static_cast<StepKind>(i);
    throw TraceInvalid("unknown step kind '" + s + "'");
}

EventType parse_event_type(const std::string& s) {
    for (int i = 0; i < 10; ++i)
        if (s == kEventNames[i]) return static_cast<EventType>(i);
    throw TraceInvalid("unknown event '" + s + "'");
}

void write_jsonl(const Trace& t, std::ostream& out) {
    json header;
    header["type"] = "header";
    header["config"] = {{"n", t.config.n},
                        {"F", t.config.F},
                        {"f", t.config.f},
                        {"protocol", to_string(t.config.protocol)},
                        {"consensus", to_string(t.config.consensus)}};
    header["scheduler"] = t.scheduler;
    header["seed"] = t.seed;
    out << header.dump() << '\n';
    for (const Step& s : t.steps) out << step_json(s).dump() << '\n';
}

Trace read_jsonl(std::istream& in) {
    Trace t;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw TraceInvalid("line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            if (!have_header) {
                if (j.value("type", "") != "header") throw TraceInvalid("missing header line");
                const json& c = j.at("config");
                t.config.n = c.at("n").get<std::uint32_t>();
                t.config.F = c.at("F").get<std::uint32_t>();
                t.config.f = c.at("f").get<std::uint32_t>();
                t.config.protocol = parse_protocol(c.at("protocol").get<std::string>());
                t.config.consensus = parse_consensus_mode(c.value("consensus", "oracle"));
                t.scheduler = j.value("scheduler", "");
                t.seed = j.value("seed", std::uint64_t{0});
                have_header = true;
                continue;
            }
            t.steps.push_back(step_from(j));
        } catch (const json::exception& e) {
            throw TraceInvalid("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ConfigInvalid& e) {
            throw TraceInvalid("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_header) throw TraceInvalid("empty trace");
    return t;
}

void save_trace(const Trace& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_jsonl(t, out);
}

Trace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceInvalid("cannot read " + path);
    return read_jsonl(in);
}

}  // namespace lsmr
