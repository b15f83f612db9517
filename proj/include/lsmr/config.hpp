#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsmr/command.hpp"

namespace lsmr {

enum class Protocol : std::uint8_t { Rotating, Mencius, EPaxos };
enum class ConsensusMode : std::uint8_t { Oracle, Quorum };

const char* to_string(Protocol p);
const char* to_string(ConsensusMode m);
Protocol parse_protocol(const std::string& s);
ConsensusMode parse_consensus_mode(const std::string& s);

struct SystemConfig {
    std::uint32_t n = 3;
    std::uint32_t F = 0;  // fast quorums have n - F members
    std::uint32_t f = 1;  // tolerated crashes
    Protocol protocol = Protocol::EPaxos;
    ConsensusMode consensus = ConsensusMode::Oracle;

    std::uint32_t fast_quorum_size() const { return n - F; }
    std::uint32_t majority() const { return n / 2 + 1; }
    bool operator==(const SystemConfig&) const = default;
};

class ConfigInvalid : public Error {
public:
    using Error::Error;
};

inline std::uint32_t minority(std::uint32_t n) { return (n - 1) / 2; }

// The parameters each protocol runs with by default at a given n.
SystemConfig default_config(Protocol p, std::uint32_t n);
void validate(const SystemConfig& cfg);

// Every fast quorum of the minimal size n - F containing the coordinator; larger
// supersets behave identically for the protocols here and are left out.
std::vector<std::vector<ProcessId>> fast_quorums(ProcessId coord, const SystemConfig& cfg);
// Coordinator plus the lowest-numbered peers.
std::vector<ProcessId> default_quorum(ProcessId coord, const SystemConfig& cfg);

}  // namespace lsmr
