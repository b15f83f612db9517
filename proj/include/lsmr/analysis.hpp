#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "lsmr/trace.hpp"

namespace lsmr {

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

// One message of a trace, located by the seq of its send and receive steps.
struct MessageSpan {
    MessageId id = 0;
    ProcessId src = 0;
    ProcessId dst = 0;
    std::uint64_t send = 0;
    std::uint64_t recv = kNever;  // never received
};

std::vector<MessageSpan> message_spans(const Trace& t);
// Only messages whose tag is listed.
std::vector<MessageSpan> message_spans(const Trace& t, const std::set<std::string>& tags);

struct CausalPath {
    std::vector<MessageId> messages;
};

std::size_t latency_of(const CausalPath& p);

// Neither message is received before the other is sent.
bool overlaps(const MessageSpan& m, const MessageSpan& x);

// Largest path size overlapped by some message: the least k for which the run is
// k-asynchronous. The serial version is the reference the parallel one is tested against.
std::size_t asynchrony_degree(const Trace& t);
std::size_t asynchrony_degree(const std::vector<MessageSpan>& msgs);
std::size_t asynchrony_degree_serial(const std::vector<MessageSpan>& msgs);

// Per-announce accounting at its initiator.
struct AnnounceInfo {
    CommandId cmd;
    ProcessId process = 0;
    bool recovery = false;
    std::uint64_t invoke = 0;
    std::uint64_t respond = kNever;
    bool flag = false;
    DepsValue deps;
    std::vector<ProcessId> quorum;
    std::size_t latency = 0;       // message delays on the longest causal path
    std::set<ProcessId> touched;   // processes taking steps for this announce
    std::size_t pending = 0;       // announce messages still in flight at the response
};

std::vector<AnnounceInfo> announces(const Trace& t);

// A conflicting command submitted earlier and not yet committed at c's coordinator
// when c is submitted.
bool contended(const Trace& t, CommandId c);
std::map<CommandId, bool> contended_all(const Trace& t);

// c_1 ... c_k with c_{i+1} in deps(c_i) at some process; live when c_k is stable nowhere.
struct Chain {
    std::vector<CommandId> commands;
    std::vector<std::pair<ProcessId, std::uint64_t>> witness;  // per link: process, seq
};

// Live chains in the state right after step `at`, one longest chain per live end.
std::vector<Chain> find_live_chains(const Trace& t, std::uint64_t at);
std::size_t max_live_chain(const Trace& t, std::uint64_t at);
// Max live chain length sampled after the last step of each distinct time stamp.
std::vector<std::pair<std::int64_t, std::size_t>> live_chain_timeline(const Trace& t,
                                                                      std::size_t max_points = 400);

struct CommandStats {
    CommandId id;
    Key key = 0;
    std::int64_t submit = 0;
    std::optional<std::int64_t> commit;
    std::optional<std::int64_t> execute;
    bool aborted = false;
    std::size_t batch_size = 0;

    std::optional<std::int64_t> commit_latency() const;
    std::optional<std::int64_t> execute_latency() const;
};

struct LatencyReport {
    std::vector<CommandStats> commands;
    std::vector<std::pair<double, double>> cdf;  // execute latency, cumulative fraction
    std::optional<double> correlation;           // execute latency vs batch size
};

// Client-side view: each workload command measured at its coordinator.
LatencyReport latency_stats(const Trace& t);
double percentile(std::vector<double> xs, double q);
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

void write_cdf_csv(const LatencyReport& r, std::ostream& out);
void write_commands_csv(const LatencyReport& r, std::ostream& out);
void write_chains_csv(const std::vector<std::pair<std::int64_t, std::size_t>>& rows,
                      std::ostream& out);

}  // namespace lsmr
