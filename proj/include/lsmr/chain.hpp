#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsmr/config.hpp"
#include "lsmr/trace.hpp"

namespace lsmr {

class NotRollOptimal : public Error {
public:
    using Error::Error;
};

class PlanViolation : public Error {
public:
    using Error::Error;
};

// Roles of one command of the chain: it is announced by coord to the fast quorum
// `quorum`; `early` (f-1 members) answer before the previous command completes and
// `next` coordinates the following command.
struct ChainRank {
    ProcessId coord = 0;
    std::vector<ProcessId> quorum;
    std::vector<ProcessId> early;
    std::vector<ProcessId> fresh;  // members that were outside the previous quorum
    ProcessId next = 0;
};

struct ChainPlan {
    SystemConfig config;
    std::size_t k = 0;
    std::vector<ChainRank> ranks;
};

// EPaxos configuration the construction runs with at size n: it needs 2F + f - 1 = n
// with F >= 2. Throws NotRollOptimal when n admits none.
SystemConfig chain_config(std::uint32_t n);

ChainPlan build_chain_plan(const SystemConfig& cfg, std::size_t k);

// Empty when every rank and every adjacent pair of ranks satisfy the quorum facts
// the construction relies on; otherwise one message per broken fact.
std::vector<std::string> plan_violations(const ChainPlan& plan);

struct ChainRun {
    Trace trace;
    std::uint64_t prefix_end = 0;  // last step before the final command gets its replies
    std::size_t live_chain = 0;    // longest live chain right after prefix_end
    std::size_t asynchrony = 0;    // announce requests and replies only
    std::size_t asynchrony_all = 0;  // decision broadcasts included
};

// Drives a nice run block by block so that every command lands in the dependencies
// of its predecessor while the newest command is still pending.
ChainRun run_chain(const ChainPlan& plan);

}  // namespace lsmr
