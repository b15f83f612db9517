#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <filesystem>

#include "lsmr/analysis.hpp"
#include "lsmr/chain.hpp"
#include "lsmr/verification.hpp"

using namespace lsmr;

namespace {

std::string fixture(const std::string& name) { return std::string(LSMR_FIXTURES) + "/" + name; }

}  // namespace

TEST(Fixtures, PendingCycleRunPassesEverything) {
    Trace t = load_trace(fixture("pending_cycle.jsonl"));
    for (const Verdict& v : check_properties(t, all_properties(), false))
        EXPECT_TRUE(v.pass) << v.property << ": " << v.detail;
}

TEST(Fixtures, PendingCycleLogsAgree) {
    Trace t = load_trace(fixture("pending_cycle.jsonl"));
    auto logs = reduce_to_generic(t);
    ASSERT_EQ(logs.size(), 2u);
    const CommandId a{0, 0}, c{1, 0}, d{1, 1}, b{1, 2};
    for (const auto& log : logs) {
        EXPECT_EQ(log.vertices, (std::vector<CommandId>{c, d, a, b}));
        // only a and b share a key
        EXPECT_EQ(log.edges, (std::vector<std::pair<CommandId, CommandId>>{{a, b}}));
    }
    EXPECT_TRUE(is_prefix(logs[0], logs[1]));
    EXPECT_TRUE(compatible(logs[0], logs[1]));
}

TEST(Fixtures, EveryForgedTraceIsCaught) {
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(fixture("violations"))) {
        const std::string name = entry.path().stem().string();
        ASSERT_TRUE(is_property(name)) << name;
        Trace t = load_trace(entry.path().string());
        Verdict v = check_property(t, name);
        EXPECT_FALSE(v.pass) << name;
        EXPECT_FALSE(v.detail.empty()) << name;
        ++seen;
    }
    EXPECT_EQ(seen, all_properties().size());
}

TEST(Fixtures, CounterexampleStillFails) {
    Trace t = load_trace(fixture("violations/consistency.jsonl"));
    auto keep = minimize_counterexample(t, "consistency");
    ASSERT_FALSE(keep.empty());
    EXPECT_LE(keep.size(), t.steps.size());
}

TEST(Properties, UnknownNameIsRejected) {
    EXPECT_FALSE(is_property("bogus"));
    Trace t = load_trace(fixture("pending_cycle.jsonl"));
    EXPECT_THROW(check_property(t, "bogus"), Error);
}

namespace {

void subsets(std::uint32_t n, std::uint32_t size, std::uint32_t from, std::vector<std::uint32_t>& cur,
             std::vector<std::uint32_t>& out) {
    if (cur.size() == size) {
        std::uint32_t mask = 0;
        for (auto p : cur) mask |= 1u << p;
        out.push_back(mask);
        return;
    }
    for (std::uint32_t p = from; p < n; ++p) {
        cur.push_back(p);
        subsets(n, size, p + 1, cur, out);
        cur.pop_back();
    }
}

// Checks the quorum intersection directly: any two fast quorums of size n - F must
// share at least f - 1 processes, and both F and f stay within a minority.
bool feasible_by_quorums(std::uint32_t n, std::uint32_t F, std::uint32_t f) {
    if (F > (n - 1) / 2 || f > (n - 1) / 2) return false;
    std::vector<std::uint32_t> cur, qs;
    subsets(n, n - F, 0, cur, qs);
    for (auto x : qs)
        for (auto y : qs)
            if (static_cast<std::uint32_t>(std::popcount(x & y)) + 1 < f) return false;
    return true;
}

}  // namespace

TEST(Skyline, FeasibilityMatchesQuorumEnumeration) {
    for (std::uint32_t n = 2; n <= 11; ++n)
        for (std::uint32_t F = 0; F <= n; ++F)
            for (std::uint32_t f = 0; f <= n; ++f)
                EXPECT_EQ(roll_feasible(n, F, f), feasible_by_quorums(n, F, f))
                    << "n=" << n << " F=" << F << " f=" << f;
}

TEST(Skyline, KnownSizes) {
    using Sky = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
    EXPECT_EQ(roll_skyline(3), (Sky{{1, 1}}));
    EXPECT_EQ(roll_skyline(5), (Sky{{2, 2}}));
    EXPECT_EQ(roll_skyline(7), (Sky{{2, 3}, {3, 2}}));
    EXPECT_FALSE(roll_feasible(7, 3, 3));
}

TEST(Classify, ProtocolTable) {
    auto rot = classify(Protocol::Rotating, 5);
    EXPECT_EQ(rot.fast_quorum, 0u);
    EXPECT_FALSE(rot.optimal_latency);
    EXPECT_FALSE(rot.roll_optimal);

    auto men = classify(Protocol::Mencius, 5);
    EXPECT_EQ(men.fast_quorum, 5u);
    EXPECT_EQ(men.f, 2u);
    EXPECT_TRUE(men.optimal_latency);
    EXPECT_FALSE(men.roll_optimal);

    auto ep = classify(Protocol::EPaxos, 5);
    EXPECT_EQ(ep.fast_quorum, 3u);
    EXPECT_EQ(ep.f, 2u);
    EXPECT_TRUE(ep.optimal_latency);
    EXPECT_TRUE(ep.roll_optimal);
}

TEST(ChainPlan, FiveProcessesSevenLinks) {
    ChainPlan plan = build_chain_plan(chain_config(5), 7);
    EXPECT_TRUE(plan_violations(plan).empty());
    ASSERT_EQ(plan.ranks.size(), 7u);
    EXPECT_EQ(plan.ranks[0].quorum, (std::vector<ProcessId>{0, 1, 2}));
    EXPECT_EQ(plan.ranks[1].quorum, (std::vector<ProcessId>{2, 3, 4}));
    EXPECT_EQ(plan.ranks[1].coord, 4u);
    EXPECT_EQ(plan.ranks[1].early, (std::vector<ProcessId>{2}));  // the overlap of both quorums
    for (std::size_t i = 0; i + 1 < plan.ranks.size(); ++i)
        EXPECT_EQ(plan.ranks[i].next, plan.ranks[i + 1].coord);
}

TEST(ChainPlan, RejectsSizesWithoutRollOptimalConfig) {
    SystemConfig bad = default_config(Protocol::EPaxos, 5);
    bad.F = 1;
    bad.f = 2;
    EXPECT_THROW(build_chain_plan(bad, 3), NotRollOptimal);
    EXPECT_THROW(chain_config(4), NotRollOptimal);
}

TEST(ChainRun, LiveChainGrowsWithK) {
    for (std::size_t k = 1; k <= 6; ++k) {
        ChainRun r = run_chain(build_chain_plan(chain_config(5), k));
        EXPECT_EQ(r.live_chain, k);
        EXPECT_EQ(max_live_chain(r.trace, r.prefix_end), k);
        EXPECT_EQ(r.asynchrony, 2u);
        // with decision broadcasts counted a single solo command stays at 2
        EXPECT_EQ(r.asynchrony_all, k == 1 ? 2u : 3u);
        for (const Verdict& v : check_properties(r.trace, safety_properties(), false))
            EXPECT_TRUE(v.pass) << "k=" << k << " " << v.property;
    }
}
