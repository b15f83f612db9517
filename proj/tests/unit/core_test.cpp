#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lsmr/deps_store.hpp"

using namespace lsmr;

namespace {

// p1 submits a while p2 submits c, d and b, in that order. a and b conflict.
const CommandId a{0, 0}, c{1, 0}, d{1, 1}, b{1, 2};

DepsStore cycle_with_pending_d() {
    DepsStore s;
    s.commit(a, {b});
    s.commit(c, {});
    s.commit(b, make_set({c, d, a}));
    return s;
}

}  // namespace

TEST(Conflicts, SameKeyDistinctIds) {
    Command x{{0, 0}, 42, 0, ""}, y{{1, 0}, 42, 1, ""}, z{{1, 1}, 7, 1, ""};
    EXPECT_TRUE(conflicts(x, y));
    EXPECT_TRUE(conflicts(y, x));
    EXPECT_FALSE(conflicts(x, x));
    EXPECT_FALSE(conflicts(x, z));
}

TEST(CommandIds, OrderIsSubmitterThenSequence) {
    EXPECT_LT((CommandId{0, 9}), (CommandId{1, 0}));
    EXPECT_LT((CommandId{1, 0}), (CommandId{1, 1}));
}

TEST(DepsStore, CommitThenPhase) {
    DepsStore s;
    s.commit(a, {b});
    EXPECT_EQ(s.deps(a), DepsValue::committed({b}));
    EXPECT_EQ(s.phase(a), Phase::Commit);
    EXPECT_EQ(s.phase(b), Phase::Pending);
}

TEST(DepsStore, EmptyCommitIsStableAtOnce) {
    DepsStore s;
    s.commit(c, {});
    EXPECT_EQ(s.phase(c), Phase::Stable);
}

TEST(DepsStore, RepeatedCommitIsNoop) {
    DepsStore s;
    EXPECT_TRUE(s.commit(a, {b}));
    EXPECT_FALSE(s.commit(a, {b}));
    EXPECT_THROW(s.commit(a, {c}), ConflictingCommit);
}

TEST(DepsStore, OwnIdIsDropped) {
    DepsStore s;
    s.commit(a, make_set({a, b}));
    EXPECT_EQ(s.deps(a).ids, IdSet{b});
}

TEST(DepsStore, AbortPrunesEveryCommittedSet) {
    DepsStore s = cycle_with_pending_d();
    s.abort(d);
    EXPECT_EQ(s.deps(b).ids, make_set({c, a}));
    EXPECT_TRUE(s.deps(d).is_aborted());
    EXPECT_FALSE(s.abort(d));
}

TEST(DepsStore, AbortArrivingFirstIsPrunedAtCommit) {
    DepsStore s;
    s.abort(d);
    s.commit(b, make_set({c, d, a}));
    EXPECT_EQ(s.deps(b).ids, make_set({c, a}));
}

TEST(DepsStore, AbortOnFreshStoreTouchesNothingElse) {
    DepsStore s;
    s.abort(d);
    EXPECT_EQ(s.phase(d), Phase::Abort);
    EXPECT_EQ(s.size(), 1u);
}

TEST(DepsStore, AbortAfterCommitConflicts) {
    DepsStore s;
    s.commit(a, {});
    EXPECT_THROW(s.abort(a), ConflictingCommit);
}

TEST(DepsStore, TransitiveDepsOfCycle) {
    DepsStore s = cycle_with_pending_d();
    EXPECT_EQ(s.transitive_deps(a), make_set({a, b, c, d}));
    EXPECT_EQ(s.transitive_deps(b), make_set({a, b, c, d}));
    EXPECT_EQ(s.transitive_deps(c), IdSet{c});
    EXPECT_EQ(DepsStore{}.transitive_deps(a), IdSet{a});
}

TEST(DepsStore, OnlyCIsStableWhileDPends) {
    DepsStore s = cycle_with_pending_d();
    EXPECT_TRUE(s.is_stable(c));
    EXPECT_FALSE(s.is_stable(a));
    EXPECT_FALSE(s.is_stable(b));
    EXPECT_FALSE(s.is_stable(d));
}

TEST(DepsStore, AbortedIsNeverStable) {
    DepsStore s;
    s.abort(a);
    EXPECT_FALSE(s.is_stable(a));
}

TEST(DepsStore, ExecutionOrderOnCycle) {
    DepsStore s = cycle_with_pending_d();
    s.commit(d, {});
    EXPECT_TRUE(s.exec_order_less(c, b));
    EXPECT_FALSE(s.exec_order_less(b, c));
    EXPECT_TRUE(s.exec_order_less(a, b));  // mutually reachable, a has the smaller id
    EXPECT_FALSE(s.exec_order_less(b, a));
    EXPECT_FALSE(s.exec_order_less(c, c));
}

TEST(DepsStore, ExecuteOnlyStableC) {
    DepsStore s = cycle_with_pending_d();
    EXPECT_EQ(s.execute(c), Batch{c});
    EXPECT_EQ(s.phase(c), Phase::Execute);
    EXPECT_THROW(s.execute(a), NotStable);
}

TEST(DepsStore, CompletedCycleRunsOneBatch) {
    DepsStore s = cycle_with_pending_d();
    s.commit(d, {});
    EXPECT_EQ(s.execute(a), (Batch{c, d, a, b}));
    EXPECT_EQ(s.executed().size(), 1u);
    EXPECT_THROW(s.execute(a), NotStable);
}

TEST(DepsStore, ExecuteReadySkipsExecuted) {
    DepsStore s = cycle_with_pending_d();
    auto first = s.execute_ready();
    ASSERT_EQ(first.size(), 1u);
    EXPECT_EQ(first[0], Batch{c});
    s.commit(d, {});
    auto second = s.execute_ready();
    ASSERT_EQ(second.size(), 1u);
    EXPECT_EQ(second[0], (Batch{d, a, b}));
}

// Brute force over stores with at most six commands: deps* by repeated squaring of
// the adjacency matrix, the batch by filtering, and the order by trying every
// permutation and keeping the lexicographically smallest one that respects the order.
namespace {

struct Oracle {
    std::vector<CommandId> ids;
    std::vector<DepsValue> vals;
    std::vector<std::vector<bool>> reach;  // reach[i][j]: ids[j] in deps*(ids[i])

    int index(CommandId x) const {
        return static_cast<int>(std::find(ids.begin(), ids.end(), x) - ids.begin());
    }

    void close() {
        const std::size_t n = ids.size();
        reach.assign(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
            reach[i][i] = true;
            if (vals[i].is_committed())
                for (CommandId y : vals[i].ids) reach[i][index(y)] = true;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    }

    bool stable(std::size_t i) const {
        if (!vals[i].is_committed()) return false;
        for (std::size_t j = 0; j < ids.size(); ++j)
            if (reach[i][j] && vals[j].is_unset()) return false;
        return true;
    }

    bool before(std::size_t i, std::size_t j) const {
        if (i == j || !reach[j][i]) return false;
        return !reach[i][j] || ids[i] < ids[j];
    }

    Batch execute(std::size_t root, const std::vector<bool>& done) const {
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < ids.size(); ++j)
            if (reach[root][j] && stable(j) && !done[j]) members.push_back(j);
        std::sort(members.begin(), members.end(), [&](auto x, auto y) { return ids[x] < ids[y]; });
        std::optional<Batch> best;
        do {
            bool ok = true;
            for (std::size_t p = 0; p < members.size() && ok; ++p)
                for (std::size_t q = p + 1; q < members.size() && ok; ++q)
                    if (before(members[q], members[p])) ok = false;
            if (!ok) continue;
            Batch cand;
            for (auto m : members) cand.push_back(ids[m]);
            if (!best || cand < *best) best = cand;
        } while (std::next_permutation(members.begin(), members.end(),
                                       [&](auto x, auto y) { return ids[x] < ids[y]; }));
        return best.value_or(Batch{});
    }
};

}  // namespace

TEST(DepsStoreOracle, BatchesMatchBruteForce) {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 3000; ++round) {
        const std::size_t n = 1 + rng() % 6;
        Oracle o;
        for (std::size_t i = 0; i < n; ++i) o.ids.push_back({static_cast<std::uint32_t>(rng() % 3),
                                                             static_cast<std::uint32_t>(i)});
        std::sort(o.ids.begin(), o.ids.end());
        DepsStore s;
        for (std::size_t i = 0; i < n; ++i) {
            const auto roll = rng() % 10;
            if (roll < 1) {
                o.vals.push_back(DepsValue::unset());
                continue;
            }
            IdSet deps;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && rng() % 3 == 0) deps.push_back(o.ids[j]);
            o.vals.push_back(DepsValue::committed(deps));
        }
        for (std::size_t i = 0; i < n; ++i)
            if (o.vals[i].is_committed()) s.commit(o.ids[i], o.vals[i].ids);
        o.close();

        std::vector<bool> done(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(s.is_stable(o.ids[i]) || s.is_executed(o.ids[i]), o.stable(i)) << "round " << round;
            if (done[i] || !o.stable(i)) continue;
            Batch want = o.execute(i, done);
            Batch got = s.execute(o.ids[i]);
            ASSERT_EQ(got, want) << "round " << round;
            for (CommandId x : got) done[o.index(x)] = true;
        }
    }
}
