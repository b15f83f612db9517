#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lsmr/trace.hpp"

namespace lsmr {

struct Verdict {
    std::string property;
    bool pass = true;
    bool applicable = true;  // false when the trace is outside the property's contract
    std::string detail;
    std::vector<std::uint64_t> counterexample;  // step seq numbers
};

// Names accepted by check_properties, in report order.
const std::vector<std::string>& safety_properties();
const std::vector<std::string>& roll_properties();
const std::vector<std::string>& all_properties();
bool is_property(const std::string& name);

Verdict check_validity(const Trace& t);
Verdict check_consistency(const Trace& t);
Verdict check_stability(const Trace& t);
std::vector<Verdict> check_smr_properties(const Trace& t);

Verdict check_invariant1(const Trace& t);
Verdict check_invariant2(const Trace& t);
std::vector<Verdict> check_execution_invariants(const Trace& t);

Verdict check_visibility(const Trace& t);
Verdict check_weak_agreement(const Trace& t);
std::vector<Verdict> check_dds_properties(const Trace& t);

Verdict check_consensus_agreement(const Trace& t);
Verdict check_consensus_validity(const Trace& t);

Verdict check_reliability(const Trace& t);
Verdict check_optimal_latency(const Trace& t);
Verdict check_load_balancing(const Trace& t);

// Partially ordered log of one process: vertices in append order, edges between
// conflicting commands pointing from the earlier to the later one.
struct PartiallyOrderedLog {
    std::vector<CommandId> vertices;
    std::vector<std::pair<CommandId, CommandId>> edges;

    bool contains(CommandId c) const;
};

// Key of every command the trace submits.
std::map<CommandId, Key> command_keys(const Trace& t);
// Final per-process logs built by appending executed commands in execution order.
std::vector<PartiallyOrderedLog> reduce_to_generic(const Trace& t);
bool is_prefix(const PartiallyOrderedLog& g, const PartiallyOrderedLog& h);
// Union of two logs when it is acyclic and both logs are prefixes of it.
bool compatible(const PartiallyOrderedLog& a, const PartiallyOrderedLog& b);
Verdict check_generic_stability(const Trace& t);
Verdict check_generic_consistency(const Trace& t);
std::vector<Verdict> check_generic(const Trace& t);

Verdict check_property(const Trace& t, const std::string& name);
// Runs the named checkers; failing verdicts get a greedily minimized counterexample
// when the trace is short enough.
std::vector<Verdict> check_properties(const Trace& t, const std::vector<std::string>& names,
                                      bool minimize = true);
std::vector<std::uint64_t> minimize_counterexample(const Trace& t, const std::string& name,
                                                   std::size_t max_steps = 2000);

nlohmann::json verdicts_to_json(const std::vector<Verdict>& vs);

// Feasibility of (F, f) at n, and its skyline of componentwise-maximal pairs.
bool roll_feasible(std::uint32_t n, std::uint32_t F, std::uint32_t f);
std::vector<std::pair<std::uint32_t, std::uint32_t>> roll_skyline(std::uint32_t n);

struct ProtocolClass {
    std::string protocol;
    std::uint32_t fast_quorum = 0;  // 0: the protocol has no fast path
    std::uint32_t f = 0;
    bool optimal_latency = false;
    bool roll_optimal = false;
};

ProtocolClass classify(Protocol p, std::uint32_t n);

}  // namespace lsmr
