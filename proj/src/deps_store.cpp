#include "lsmr/deps_store.hpp"

#include <functional>
#include <queue>
#include <unordered_map>

namespace lsmr {

namespace {
const DepsValue kUnset{};

struct IdHash {
    std::size_t operator()(CommandId c) const {
        return (static_cast<std::size_t>(c.submitter) << 32) ^ c.seq;
    }
};
}  // namespace

DepsStore::Entry& DepsStore::touch(CommandId c) { return entries_[c]; }

const DepsStore::Entry* DepsStore::find(CommandId c) const {
    auto it = entries_.find(c);
    return it == entries_.end() ? nullptr : &it->second;
}

bool DepsStore::commit(CommandId c, IdSet deps) {
    erase(deps, c);
    Entry& entry = touch(c);
    if (!entry.value.is_unset()) {
        // aborted ids are pruned at commit time too, so arrival order does not matter
        IdSet kept;
        for (CommandId d : deps) {
            const Entry* e = find(d);
            if (!e || !e->value.is_aborted()) kept.push_back(d);
        }
        if (entry.value.is_committed() && entry.value.ids == kept) return false;
        throw ConflictingCommit(c, entry.value, DepsValue::committed(kept));
    }
    IdSet kept;
    kept.reserve(deps.size());
    entry.open.clear();
    for (CommandId d : deps) {
        Entry& dep = touch(d);
        if (dep.value.is_aborted()) continue;
        kept.push_back(d);
        if (!dep.executed) entry.open.push_back(d);
        // only an undecided dependency can still turn out aborted and need pruning
        if (dep.value.is_unset()) dependents_[d].push_back(c);
    }
    entry.value = DepsValue::committed(std::move(kept));
    runnable_.insert(c);
    return true;
}

bool DepsStore::abort(CommandId c) {
    Entry& entry = touch(c);
    if (entry.value.is_aborted()) return false;
    if (entry.value.is_committed()) {
        throw ConflictingCommit(c, entry.value, DepsValue::aborted());
    }
    entry.value = DepsValue::aborted();
    auto it = dependents_.find(c);
    if (it != dependents_.end()) {
        for (CommandId x : it->second) {
            Entry& e = entries_[x];
            erase(e.value.ids, c);
            erase(e.open, c);
        }
        dependents_.erase(it);
    }
    return true;
}

bool DepsStore::apply(CommandId c, const DepsValue& v) {
    if (v.is_committed()) return commit(c, v.ids);
    if (v.is_aborted()) return abort(c);
    return false;
}

const DepsValue& DepsStore::deps(CommandId c) const {
    const Entry* e = find(c);
    return e ? e->value : kUnset;
}

Phase DepsStore::phase(CommandId c) const {
    const Entry* e = find(c);
    if (!e || e->value.is_unset()) return Phase::Pending;
    if (e->value.is_aborted()) return Phase::Abort;
    if (e->executed) return Phase::Execute;
    return is_stable(c) ? Phase::Stable : Phase::Commit;
}

IdSet DepsStore::transitive_deps(CommandId c) const {
    IdSet out{c};
    std::vector<CommandId> stack{c};
    while (!stack.empty()) {
        CommandId x = stack.back();
        stack.pop_back();
        const Entry* e = find(x);
        if (!e || !e->value.is_committed()) continue;
        for (CommandId d : e->value.ids) {
            if (insert(out, d)) stack.push_back(d);
        }
    }
    return out;
}

void DepsStore::compact(const Entry& e) const {
    std::erase_if(e.open, [this](CommandId d) {
        const Entry* de = find(d);
        return de && de->executed;
    });
}

bool DepsStore::is_stable(CommandId c) const {
    const Entry* root = find(c);
    if (!root || !root->value.is_committed()) return false;
    if (root->stable || root->executed) return true;
    std::unordered_map<CommandId, const Entry*, IdHash> seen;
    std::vector<CommandId> stack{c};
    seen.emplace(c, root);
    while (!stack.empty()) {
        CommandId x = stack.back();
        stack.pop_back();
        const Entry* e = seen[x];
        if (!e || e->value.is_unset()) return false;
        if (e->value.is_aborted() || e->stable || e->executed) continue;
        compact(*e);
        for (CommandId d : e->open) {
            if (seen.count(d)) continue;
            seen.emplace(d, find(d));
            stack.push_back(d);
        }
    }
    // every committed node reached has its closure inside the visited set
    for (auto& [id, e] : seen) {
        if (e && e->value.is_committed()) e->stable = true;
    }
    return true;
}

bool DepsStore::is_executed(CommandId c) const {
    const Entry* e = find(c);
    return e && e->executed;
}

bool DepsStore::exec_order_less(CommandId c, CommandId d) const {
    if (c == d) return false;
    IdSet dc = transitive_deps(d);
    if (!contains(dc, c)) return false;
    IdSet cc = transitive_deps(c);
    return !contains(cc, d) || c < d;
}

Batch DepsStore::order_batch(const std::vector<CommandId>& members) const {
    // Tarjan over the batch, then a priority-driven topological walk: each strongly
    // connected group is drained in id order once everything it depends on is placed.
    const std::size_t m = members.size();
    std::unordered_map<CommandId, std::size_t, IdHash> index;
    for (std::size_t i = 0; i < m; ++i) index.emplace(members[i], i);
    std::vector<std::vector<std::size_t>> adj(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Entry* e = find(members[i]);
        for (CommandId d : e->open) {
            auto it = index.find(d);
            if (it != index.end()) adj[i].push_back(it->second);
        }
    }

    std::vector<int> low(m, 0), num(m, -1), comp(m, -1);
    std::vector<bool> on_stack(m, false);
    std::vector<std::size_t> stack;
    int counter = 0, ncomp = 0;
    std::function<void(std::size_t)> strong = [&](std::size_t v) {
        num[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w : adj[v]) {
            if (num[w] < 0) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], num[w]);
            }
        }
        if (low[v] == num[v]) {
            while (true) {
                std::size_t w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = ncomp;
                if (w == v) break;
            }
            ++ncomp;
        }
    };
    for (std::size_t v = 0; v < m; ++v)
        if (num[v] < 0) strong(v);

    std::vector<std::vector<CommandId>> groups(ncomp);
    std::vector<std::set<int>> waits_on(ncomp), released_by(ncomp);
    for (std::size_t v = 0; v < m; ++v) {
        groups[comp[v]].push_back(members[v]);
        for (std::size_t w : adj[v]) {
            if (comp[w] != comp[v]) {
                waits_on[comp[v]].insert(comp[w]);
                released_by[comp[w]].insert(comp[v]);
            }
        }
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());

    using Item = std::pair<CommandId, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    std::vector<std::size_t> cursor(ncomp, 0), blocked(ncomp);
    for (int g = 0; g < ncomp; ++g) {
        blocked[g] = waits_on[g].size();
        if (blocked[g] == 0) ready.emplace(groups[g][0], g);
    }
    Batch out;
    out.reserve(m);
    while (!ready.empty()) {
        auto [id, g] = ready.top();
        ready.pop();
        out.push_back(id);
        if (++cursor[g] < groups[g].size()) {
            ready.emplace(groups[g][cursor[g]], g);
            continue;
        }
        for (int h : released_by[g]) {
            if (--blocked[h] == 0) ready.emplace(groups[h][0], h);
        }
    }
    return out;
}

Batch DepsStore::execute(CommandId c) {
    if (is_executed(c) || !is_stable(c)) throw NotStable(c);
    std::vector<CommandId> members;
    std::set<CommandId> seen{c};
    std::vector<CommandId> stack{c};
    while (!stack.empty()) {
        CommandId x = stack.back();
        stack.pop_back();
        members.push_back(x);
        const Entry* e = find(x);
        compact(*e);
        for (CommandId d : e->open) {
            if (seen.insert(d).second) stack.push_back(d);
        }
    }
    std::sort(members.begin(), members.end());
    Batch batch = order_batch(members);
    for (CommandId x : batch) {
        Entry& e = entries_[x];
        e.executed = true;
        e.stable = true;
        e.open.clear();
        runnable_.erase(x);
    }
    batches_.push_back(batch);
    return batch;
}

std::vector<Batch> DepsStore::execute_ready() {
    std::vector<Batch> out;
    std::vector<CommandId> candidates(runnable_.begin(), runnable_.end());
    for (CommandId c : candidates) {
        if (is_executed(c) || !is_stable(c)) continue;
        out.push_back(execute(c));
    }
    return out;
}

std::vector<CommandId> DepsStore::pending_ids() const {
    std::vector<CommandId> out;
    for (auto& [id, e] : entries_)
        if (e.value.is_unset()) out.push_back(id);
    return out;
}

std::vector<CommandId> DepsStore::known_ids() const {
    std::vector<CommandId> out;
    out.reserve(entries_.size());
    for (auto& [id, e] : entries_) out.push_back(id);
    return out;
}

void DepsStore::serialize(std::string& out) const {
    auto put = [&out](std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
    put(static_cast<std::uint32_t>(entries_.size()));
    for (auto& [id, e] : entries_) {
        put(id.submitter);
        put(id.seq);
        put(static_cast<std::uint32_t>(e.value.kind) | (e.executed ? 16u : 0u));
        put(static_cast<std::uint32_t>(e.value.ids.size()));
        for (CommandId d : e.value.ids) {
            put(d.submitter);
            put(d.seq);
        }
    }
    put(static_cast<std::uint32_t>(batches_.size()));
    for (auto& b : batches_) {
        put(static_cast<std::uint32_t>(b.size()));
        for (CommandId d : b) {
            put(d.submitter);
            put(d.seq);
        }
    }
}

}  // namespace lsmr
