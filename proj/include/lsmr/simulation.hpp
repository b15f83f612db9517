#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lsmr/engine.hpp"
#include "lsmr/trace.hpp"

namespace lsmr {

struct DelayModel {
    enum class Kind : std::uint8_t { Constant, Uniform, Matrix };
    Kind kind = Kind::Constant;
    std::int64_t value = 1;
    std::int64_t lo = 1;
    std::int64_t hi = 10;
    std::vector<std::vector<std::int64_t>> matrix;

    std::int64_t sample(ProcessId from, ProcessId to, std::mt19937_64& rng) const;
    std::int64_t max_delay() const;
    // Expected one-way delay, used to rank peers by distance.
    double mean(ProcessId from, ProcessId to) const;

    static DelayModel constant(std::int64_t v);
    static DelayModel uniform(std::int64_t lo, std::int64_t hi);
    static DelayModel from_matrix(std::vector<std::vector<std::int64_t>> m);
    // Five sites with one-way delays of half the measured round trip, in 0.1 ms.
    static DelayModel geo5();
};

struct WorkloadItem {
    std::int64_t time = 0;
    ProcessId process = 0;
    Key key = 0;
    std::vector<ProcessId> quorum;  // empty: use the scenario policy
};

struct ClosedLoop {
    std::uint32_t clients_per_process = 1;
    std::uint32_t commands = 0;  // total over all clients
    double conflict_rate = 0.0;
    Key hot_key = 42;
};

struct CrashSpec {
    ProcessId process = 0;
    std::int64_t time = 0;
};

enum class QuorumPolicy : std::uint8_t { Lowest, Nearest, Random };

const char* to_string(QuorumPolicy q);
QuorumPolicy parse_quorum_policy(const std::string& s);

struct Scenario {
    SystemConfig config;
    DelayModel delays;
    std::vector<WorkloadItem> items;
    std::optional<ClosedLoop> closed_loop;
    std::vector<CrashSpec> crashes;
    std::int64_t fd_timeout = 0;  // 0: ten times the largest delay
    QuorumPolicy quorum_policy = QuorumPolicy::Lowest;
    RecoveryRule recovery_rule = RecoveryRule::Union;
    std::string scheduler = "nice";
    std::uint64_t seed = 0;
    std::uint64_t max_events = 5'000'000;
};

class SchedulerDeadlock : public Error {
public:
    using Error::Error;
};

struct RunResult {
    Trace trace;
    bool deadlock = false;
    std::string deadlock_reason;
    std::uint64_t events = 0;
};

// Timed discrete-event run: every sent message gets a delivery time from the delay
// model, crashes happen at their scheduled times and are detected after fd_timeout.
RunResult run(const Scenario& s);

// Open-loop workload with submit times uniform in [0, window), where each command
// hits the hot key with probability rho and a fresh key otherwise.
std::vector<WorkloadItem> random_workload(std::uint32_t n, std::uint32_t commands, double rho,
                                          std::int64_t window, std::mt19937_64& rng);

// Scenario of the randomized safety suite for one seed: protocol, size, conflict
// rate, consensus mode, delays and up to f crashes all derive from the seed.
Scenario random_scenario(std::uint64_t seed);

std::vector<ProcessId> pick_quorum(ProcessId coord, const SystemConfig& cfg, QuorumPolicy policy,
                                   const DelayModel& delays, std::mt19937_64& rng);

// Exhaustive exploration of every interleaving of a small scenario. Submissions are
// enabled in per-process FIFO order at any point, at most max_crashes processes may
// crash, and a correct process may start suspecting a crashed one once nothing the
// crashed process sent is still in flight.
struct ExhaustiveSpec {
    SystemConfig config;
    std::vector<std::vector<Key>> submissions;  // per process, in submit order
    std::uint32_t max_crashes = 0;
    std::vector<ProcessId> crashable;  // empty: every process
    std::uint64_t max_states = 20'000'000;
    RecoveryRule recovery_rule = RecoveryRule::Union;
};

struct ExhaustiveStats {
    std::uint64_t states = 0;
    std::uint64_t maximal_runs = 0;
    std::uint64_t transitions = 0;
};

class BoundsExceeded : public Error {
public:
    using Error::Error;
};

// Calls visit on the trace of every distinct maximal run; visit returns false to stop.
ExhaustiveStats explore(const ExhaustiveSpec& spec,
                        const std::function<bool(const Trace&)>& visit);

}  // namespace lsmr
