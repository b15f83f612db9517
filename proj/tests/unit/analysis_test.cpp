#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>

#include "lsmr/analysis.hpp"
#include "lsmr/simulation.hpp"

using namespace lsmr;

namespace {

MessageSpan span(MessageId id, ProcessId src, ProcessId dst, std::uint64_t send, std::uint64_t recv) {
    return {id, src, dst, send, recv};
}

// Enumerates every causal path explicitly and checks each message against it.
std::size_t brute_degree(const std::vector<MessageSpan>& ms) {
    std::size_t best = 0;
    auto concurrent = [](const MessageSpan& m, const MessageSpan& x) {
        return !(m.recv <= x.send) && !(x.recv <= m.send);
    };
    std::vector<std::size_t> path;
    std::function<void()> grow = [&]() {
        const MessageSpan& first = ms[path.front()];
        const MessageSpan& last = ms[path.back()];
        for (const MessageSpan& m : ms)
            if (concurrent(m, first) && concurrent(m, last)) best = std::max(best, path.size());
        if (last.recv == kNever) return;
        for (std::size_t j = 0; j < ms.size(); ++j) {
            if (ms[j].src != last.dst || ms[j].send <= last.recv) continue;
            path.push_back(j);
            grow();
            path.pop_back();
        }
    };
    for (std::size_t i = 0; i < ms.size(); ++i) {
        path = {i};
        grow();
    }
    return best;
}

std::vector<MessageSpan> random_spans(std::mt19937_64& rng, std::size_t count, std::uint32_t procs) {
    std::vector<MessageSpan> out;
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < count; ++i) {
        ProcessId s = rng() % procs, d = rng() % procs;
        if (d == s) d = (d + 1) % procs;
        t += 1 + rng() % 3;
        std::uint64_t recv = rng() % 8 == 0 ? kNever : t + 1 + rng() % 12;
        out.push_back(span(i + 1, s, d, t, recv));
    }
    // seq numbers must be distinct across send and receive steps
    std::uint64_t next = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t*>> events;
    for (auto& m : out) {
        events.push_back({m.send * 2, &m.send});
        if (m.recv != kNever) events.push_back({m.recv * 2 + 1, &m.recv});
    }
    std::sort(events.begin(), events.end());
    for (auto& [k, p] : events) *p = next++;
    return out;
}

}  // namespace

TEST(Asynchrony, SpanningMessageOverTwoHopsIsTwo) {
    // red p5 -> p4 spans blue p1 -> p2 followed by green p2 -> p4
    std::vector<MessageSpan> ms = {span(1, 4, 3, 0, 5), span(2, 0, 1, 1, 2), span(3, 1, 3, 3, 4)};
    EXPECT_EQ(asynchrony_degree(ms), 2u);
    EXPECT_EQ(asynchrony_degree_serial(ms), 2u);
}

TEST(Asynchrony, LockStepRoundsAreOne) {
    std::vector<MessageSpan> ms;
    std::uint64_t seq = 0;
    MessageId id = 1;
    for (int round = 0; round < 3; ++round) {
        std::vector<std::size_t> sent;
        for (ProcessId p = 0; p < 3; ++p)
            for (ProcessId q = 0; q < 3; ++q)
                if (p != q) {
                    ms.push_back(span(id++, p, q, seq++, 0));
                    sent.push_back(ms.size() - 1);
                }
        for (auto i : sent) ms[i].recv = seq++;
    }
    EXPECT_EQ(asynchrony_degree(ms), 1u);
}

TEST(Asynchrony, EmptyIsZero) { EXPECT_EQ(asynchrony_degree(std::vector<MessageSpan>{}), 0u); }

TEST(Asynchrony, MatchesPathEnumeration) {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 300; ++round) {
        const std::size_t count = 2 + rng() % 29;
        auto ms = random_spans(rng, count, 2 + rng() % 3);
        const std::size_t want = brute_degree(ms);
        ASSERT_EQ(asynchrony_degree_serial(ms), want) << "round " << round;
        ASSERT_EQ(asynchrony_degree(ms), want) << "round " << round;
    }
}

TEST(Asynchrony, FiftyMessagesMatchPathEnumeration) {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 10; ++round) {
        auto ms = random_spans(rng, 50, 4);
        ASSERT_EQ(asynchrony_degree(ms), brute_degree(ms)) << "round " << round;
    }
}

TEST(Asynchrony, ParallelEqualsSerialOnLargeRuns) {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 5; ++round) {
        auto ms = random_spans(rng, 400, 5);
        EXPECT_EQ(asynchrony_degree(ms), asynchrony_degree_serial(ms));
    }
}

TEST(Latency, PathSizeCountsMessages) {
    EXPECT_EQ(latency_of(CausalPath{{1}}), 1u);
    EXPECT_EQ(latency_of(CausalPath{{1, 2}}), 2u);
    EXPECT_EQ(latency_of(CausalPath{}), 0u);
}

TEST(Overlap, StrictOnBothEnds) {
    EXPECT_TRUE(overlaps(span(1, 0, 1, 0, 5), span(2, 1, 2, 2, 3)));
    EXPECT_FALSE(overlaps(span(1, 0, 1, 0, 2), span(2, 1, 2, 3, 4)));
    EXPECT_TRUE(overlaps(span(1, 0, 1, 0, kNever), span(2, 1, 2, 3, 4)));
}

namespace {

Scenario solo(Protocol p, std::uint32_t n) {
    Scenario s;
    s.config = default_config(p, n);
    s.delays = DelayModel::constant(1);
    s.items = {{0, 0, 1, {}}};
    return s;
}

}  // namespace

TEST(LatencyStats, SoloEPaxosCommandTakesTwoUnits) {
    RunResult r = run(solo(Protocol::EPaxos, 3));
    auto rep = latency_stats(r.trace);
    ASSERT_EQ(rep.commands.size(), 1u);
    EXPECT_EQ(rep.commands[0].commit_latency(), 2);
    EXPECT_EQ(rep.commands[0].execute_latency(), 2);
    EXPECT_EQ(rep.commands[0].batch_size, 1u);
    ASSERT_EQ(rep.cdf.size(), 1u);
    EXPECT_DOUBLE_EQ(rep.cdf[0].second, 1.0);
}

TEST(LatencyStats, EmptyTrace) {
    Trace t;
    auto rep = latency_stats(t);
    EXPECT_TRUE(rep.commands.empty());
    EXPECT_TRUE(rep.cdf.empty());
    EXPECT_FALSE(rep.correlation.has_value());
}

TEST(LatencyStats, PercentileUsesNearestRank) {
    std::vector<double> xs{5, 1, 4, 2, 3};
    EXPECT_EQ(percentile(xs, 0.5), 3);
    EXPECT_EQ(percentile(xs, 0.99), 5);
    EXPECT_EQ(percentile(xs, 0.0), 1);
}

TEST(LatencyStats, PearsonOfLinearData) {
    EXPECT_NEAR(*pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
    EXPECT_NEAR(*pearson({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
    EXPECT_FALSE(pearson({1}, {1}).has_value());
}

TEST(LatencyStats, CsvHeaders) {
    RunResult r = run(solo(Protocol::EPaxos, 3));
    auto rep = latency_stats(r.trace);
    std::ostringstream cdf, cmds, chains;
    write_cdf_csv(rep, cdf);
    write_commands_csv(rep, cmds);
    write_chains_csv(live_chain_timeline(r.trace), chains);
    EXPECT_EQ(cdf.str().substr(0, cdf.str().find('\n')), "latency,fraction");
    EXPECT_EQ(cmds.str().substr(0, cmds.str().find('\n')), "id,submit,commit,execute,batch_size");
    EXPECT_EQ(chains.str().substr(0, chains.str().find('\n')), "time,max_live_chain_len");
}

TEST(Contention, SoloAndSerialized) {
    RunResult r = run(solo(Protocol::EPaxos, 3));
    EXPECT_FALSE(contended(r.trace, {0, 0}));

    Scenario s = solo(Protocol::EPaxos, 3);
    s.items = {{0, 0, 1, {}}, {10, 1, 1, {}}};  // second submit long after the first commits
    RunResult late = run(s);
    EXPECT_FALSE(contended(late.trace, {1, 0}));

    s.items = {{0, 0, 1, {}}, {0, 1, 1, {}}};
    RunResult both = run(s);
    auto all = contended_all(both.trace);
    EXPECT_TRUE(all.at({0, 0}) || all.at({1, 0}));
}

TEST(LiveChains, AllExecutedMeansNone) {
    RunResult r = run(solo(Protocol::EPaxos, 3));
    EXPECT_EQ(max_live_chain(r.trace, r.trace.steps.back().seq), 0u);
}

TEST(LiveChains, PrefixEndsOnlyAtUnstableCommands) {
    Trace t = load_trace(std::string(LSMR_FIXTURES) + "/pending_cycle.jsonl");
    const CommandId a{0, 0}, c{1, 0}, d{1, 1}, b{1, 2};
    auto chains = find_live_chains(t, 11);
    ASSERT_FALSE(chains.empty());
    std::size_t longest = 0;
    for (const Chain& ch : chains) {
        EXPECT_NE(ch.commands.back(), c);
        longest = std::max(longest, ch.commands.size());
        if (ch.commands.back() == d) EXPECT_EQ(ch.commands, (std::vector<CommandId>{a, b, d}));
    }
    EXPECT_EQ(longest, 3u);
    EXPECT_EQ(max_live_chain(t, 11), 3u);
    // once d commits everything becomes stable
    EXPECT_EQ(max_live_chain(t, t.steps.back().seq), 0u);
}
