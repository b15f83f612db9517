#include "lsmr/consensus.hpp"

namespace lsmr {

DepsValue OracleConsensus::propose(CommandId c, const DepsValue& v, ProcessId proposer) {
    Instance& inst = instances_[c];
    inst.proposals.emplace_back(proposer, v);
    if (!inst.decided) inst.decided = v;
    return *inst.decided;
}

const OracleConsensus::Instance* OracleConsensus::find(CommandId c) const {
    auto it = instances_.find(c);
    return it == instances_.end() ? nullptr : &it->second;
}

PaxosMsg PaxosAcceptor::on_prepare(const PaxosMsg& m, ProcessId self) {
    PaxosMsg r;
    r.from = self;
    r.to = m.from;
    if (m.ballot < promised) {
        r.type = PaxosMsg::Type::Nack;
        r.ballot = promised;
        return r;
    }
    promised = m.ballot;
    r.type = PaxosMsg::Type::Promise;
    r.ballot = m.ballot;
    r.has_accepted = has_accepted;
    r.accepted_ballot = accepted_ballot;
    r.value = accepted;
    return r;
}

PaxosMsg PaxosAcceptor::on_accept(const PaxosMsg& m, ProcessId self) {
    PaxosMsg r;
    r.from = self;
    r.to = m.from;
    if (m.ballot < promised) {
        r.type = PaxosMsg::Type::Nack;
        r.ballot = promised;
        return r;
    }
    promised = m.ballot;
    has_accepted = true;
    accepted_ballot = m.ballot;
    accepted = m.value;
    r.type = PaxosMsg::Type::Accepted;
    r.ballot = m.ballot;
    return r;
}

std::vector<PaxosMsg> PaxosProposer::broadcast(PaxosMsg::Type t, const DepsValue& v) const {
    std::vector<PaxosMsg> out;
    for (ProcessId p = 0; p < n_; ++p) {
        PaxosMsg m;
        m.type = t;
        m.from = self_;
        m.to = p;
        m.ballot = ballot_;
        m.value = v;
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<PaxosMsg> PaxosProposer::start(const DepsValue& v, std::uint32_t attempt) {
    if (decided_) return {};
    own_ = v;
    ballot_ = Ballot{attempt, self_};
    promises_.clear();
    accepts_.clear();
    best_set_ = false;
    if (attempt == 0) {
        phase_ = Phase::Accepting;
        value_ = v;
        return broadcast(PaxosMsg::Type::Accept, value_);
    }
    phase_ = Phase::Preparing;
    return broadcast(PaxosMsg::Type::Prepare, {});
}

std::vector<PaxosMsg> PaxosProposer::on_promise(const PaxosMsg& m) {
    if (phase_ != Phase::Preparing || m.ballot != ballot_ || decided_) return {};
    promises_.insert(m.from);
    if (m.has_accepted && (!best_set_ || best_ballot_ < m.accepted_ballot)) {
        best_set_ = true;
        best_ballot_ = m.accepted_ballot;
        best_value_ = m.value;
    }
    if (promises_.size() < n_ / 2 + 1) return {};
    phase_ = Phase::Accepting;
    value_ = best_set_ ? best_value_ : own_;
    return broadcast(PaxosMsg::Type::Accept, value_);
}

std::vector<PaxosMsg> PaxosProposer::on_accepted(const PaxosMsg& m) {
    if (phase_ != Phase::Accepting || m.ballot != ballot_ || decided_) return {};
    accepts_.insert(m.from);
    if (accepts_.size() >= n_ / 2 + 1) decided_ = value_;
    return {};
}

std::optional<std::uint32_t> PaxosProposer::on_nack(const PaxosMsg& m) {
    if (phase_ == Phase::Idle || decided_ || !(ballot_ < m.ballot)) return std::nullopt;
    phase_ = Phase::Idle;
    return m.ballot.attempt + 1;
}

}  // namespace lsmr
