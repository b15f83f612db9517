#include "lsmr/config.hpp"

#include <algorithm>

namespace lsmr {

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::Rotating: return "rotating";
        case Protocol::Mencius: return "mencius";
        case Protocol::EPaxos: return "epaxos";
    }
    return "?";
}

const char* to_string(ConsensusMode m) {
    return m == ConsensusMode::Oracle ? "oracle" : "quorum";
}

Protocol parse_protocol(const std::string& s) {
    if (s == "rotating") return Protocol::Rotating;
    if (s == "mencius") return Protocol::Mencius;
    if (s == "epaxos") return Protocol::EPaxos;
    throw ConfigInvalid("unknown protocol '" + s + "'");
}

ConsensusMode parse_consensus_mode(const std::string& s) {
    if (s == "oracle") return ConsensusMode::Oracle;
    if (s == "quorum") return ConsensusMode::Quorum;
    throw ConfigInvalid("unknown consensus mode '" + s + "'");
}

SystemConfig default_config(Protocol p, std::uint32_t n) {
    SystemConfig cfg;
    cfg.n = n;
    cfg.protocol = p;
    cfg.f = n >= 1 ? minority(n) : 0;
    // clamped so that fast quorums still pairwise intersect at n = 2
    cfg.F = p == Protocol::EPaxos ? std::min(n - (3 * n) / 4, minority(n)) : 0;
    return cfg;
}

void validate(const SystemConfig& cfg) {
    if (cfg.n < 2) throw ConfigInvalid("n must be at least 2");
    if (cfg.n > 64) throw ConfigInvalid("n must be at most 64");
    if (cfg.F > cfg.n - 1) throw ConfigInvalid("F must be at most n-1");
    if (cfg.f > minority(cfg.n)) throw ConfigInvalid("f must be at most floor((n-1)/2)");
    if (cfg.protocol == Protocol::Mencius && cfg.F != 0)
        throw ConfigInvalid("mencius uses the full quorum (F=0)");
    // two fast quorums must intersect, otherwise concurrent announces can miss each other
    if (cfg.protocol == Protocol::EPaxos && cfg.F > minority(cfg.n))
        throw ConfigInvalid("epaxos needs F <= floor((n-1)/2)");
}

std::vector<std::vector<ProcessId>> fast_quorums(ProcessId coord, const SystemConfig& cfg) {
    std::vector<ProcessId> others;
    for (ProcessId p = 0; p < cfg.n; ++p)
        if (p != coord) others.push_back(p);
    const std::size_t pick = cfg.fast_quorum_size() - 1;
    std::vector<std::vector<ProcessId>> out;
    std::vector<std::size_t> idx(pick);
    for (std::size_t i = 0; i < pick; ++i) idx[i] = i;
    while (true) {
        std::vector<ProcessId> q{coord};
        for (std::size_t i : idx) q.push_back(others[i]);
        std::sort(q.begin(), q.end());
        out.push_back(q);
        // next combination in lexicographic order
        std::size_t i = pick;
        while (i > 0 && idx[i - 1] == others.size() - pick + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < pick; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

std::vector<ProcessId> default_quorum(ProcessId coord, const SystemConfig& cfg) {
    std::vector<ProcessId> q{coord};
    for (ProcessId p = 0; p < cfg.n && q.size() < cfg.fast_quorum_size(); ++p)
        if (p != coord) q.push_back(p);
    std::sort(q.begin(), q.end());
    return q;
}

}  // namespace lsmr
