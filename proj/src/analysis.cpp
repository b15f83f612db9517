#include "lsmr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <omp.h>

#include "lsmr/engine.hpp"
#include "lsmr/replay.hpp"

namespace lsmr {

std::vector<MessageSpan> message_spans(const Trace& t) { return message_spans(t, {}); }

std::vector<MessageSpan> message_spans(const Trace& t, const std::set<std::string>& tags) {
    std::vector<MessageSpan> out;
    std::unordered_map<MessageId, std::size_t> index;
    for (const Step& s : t.steps) {
        if (!tags.empty() && (s.kind == StepKind::Send || s.kind == StepKind::Recv) &&
            !tags.count(s.tag))
            continue;
        if (s.kind == StepKind::Send) {
            index[s.message] = out.size();
            out.push_back({s.message, s.sender, s.dest, s.seq, kNever});
        } else if (s.kind == StepKind::Recv) {
            auto it = index.find(s.message);
            if (it == index.end()) throw TraceInvalid("receive of a message never sent");
            out[it->second].recv = s.seq;
        }
    }
    return out;
}

std::size_t latency_of(const CausalPath& p) { return p.messages.size(); }

bool overlaps(const MessageSpan& m, const MessageSpan& x) {
    return m.send < x.recv && x.send < m.recv;
}

std::size_t asynchrony_degree(const Trace& t) { return asynchrony_degree(message_spans(t)); }

std::size_t asynchrony_degree_serial(const std::vector<MessageSpan>& msgs) {
    const std::size_t m = msgs.size();
    std::size_t best = 0;
    std::vector<std::size_t> len(m), order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return msgs[a].send < msgs[b].send; });
    for (std::size_t first = 0; first < m; ++first) {
        // len[x]: longest path that starts with msgs[first] and ends with msgs[x]
        std::fill(len.begin(), len.end(), 0);
        len[first] = 1;
        for (std::size_t x : order) {
            if (x == first) continue;
            for (std::size_t y = 0; y < m; ++y) {
                if (len[y] == 0 || msgs[y].dst != msgs[x].src) continue;
                if (msgs[y].recv < msgs[x].send) len[x] = std::max(len[x], len[y] + 1);
            }
        }
        for (std::size_t w = 0; w < m; ++w) {
            if (!overlaps(msgs[w], msgs[first])) continue;
            for (std::size_t x = 0; x < m; ++x)
                if (len[x] > best && overlaps(msgs[w], msgs[x])) best = len[x];
        }
    }
    return best;
}

std::size_t asynchrony_degree(const std::vector<MessageSpan>& msgs) {
    const std::size_t m = msgs.size();
    if (m == 0) return 0;

    // Send and receive events in step order; the low bit tells them apart.
    std::vector<std::pair<std::uint64_t, std::size_t>> events;
    events.reserve(2 * m);
    ProcessId procs = 0;
    for (std::size_t i = 0; i < m; ++i) {
        events.emplace_back(msgs[i].send, 2 * i);
        if (msgs[i].recv != kNever) events.emplace_back(msgs[i].recv, 2 * i + 1);
        procs = std::max({procs, msgs[i].src + 1, msgs[i].dst + 1});
    }
    std::sort(events.begin(), events.end());
    std::vector<std::size_t> first_event(m);
    for (std::size_t e = 0; e < events.size(); ++e)
        if (events[e].second % 2 == 0) first_event[events[e].second / 2] = e;

    std::vector<std::size_t> by_send(m);
    for (std::size_t i = 0; i < m; ++i) by_send[i] = i;
    std::sort(by_send.begin(), by_send.end(),
              [&](std::size_t a, std::size_t b) { return msgs[a].send < msgs[b].send; });

    std::size_t best = 0;
#pragma omp parallel
    {
        std::vector<std::size_t> len(m);
        std::vector<std::size_t> at(procs);
        std::vector<std::uint64_t> sends, prefix_recv;
#pragma omp for schedule(dynamic, 8) reduction(max : best)
        for (std::size_t first = 0; first < m; ++first) {
            std::fill(len.begin(), len.end(), 0);
            std::fill(at.begin(), at.end(), 0);
            for (std::size_t e = first_event[first]; e < events.size(); ++e) {
                const std::size_t i = events[e].second / 2;
                if (events[e].second % 2 == 0) {
                    if (i == first)
                        len[i] = 1;
                    else if (at[msgs[i].src] > 0)
                        len[i] = at[msgs[i].src] + 1;
                } else if (len[i] > 0) {
                    at[msgs[i].dst] = std::max(at[msgs[i].dst], len[i]);
                }
            }
            // messages overlapping the first one, by send order, with running max receive
            sends.clear();
            prefix_recv.clear();
            for (std::size_t w : by_send) {
                if (!overlaps(msgs[w], msgs[first])) continue;
                sends.push_back(msgs[w].send);
                prefix_recv.push_back(std::max(prefix_recv.empty() ? 0 : prefix_recv.back(),
                                               msgs[w].recv));
            }
            for (std::size_t x = 0; x < m; ++x) {
                if (len[x] <= best) continue;
                // some overlapper sent before x is received and received after x is sent
                auto k = std::lower_bound(sends.begin(), sends.end(), msgs[x].recv) - sends.begin();
                if (k > 0 && prefix_recv[k - 1] > msgs[x].send) best = len[x];
            }
        }
    }
    return best;
}

std::vector<AnnounceInfo> announces(const Trace& t) {
    std::vector<AnnounceInfo> out;
    std::map<std::pair<ProcessId, CommandId>, std::size_t> latest;
    std::vector<std::map<ProcessId, std::size_t>> depth;
    struct Carried {
        std::size_t announce;
        std::size_t depth;
        bool open;
    };
    std::unordered_map<MessageId, Carried> carried;
    std::vector<std::size_t> in_flight;

    auto is_request = [](const std::string& tag) {
        return tag == "announce-request" || tag == "recovery-request";
    };
    auto is_reply = [](const std::string& tag) {
        return tag == "announce-reply" || tag == "recovery-reply";
    };

    for (const Step& s : t.steps) {
        if (s.event == EventType::Announce && s.kind == StepKind::Invoke) {
            AnnounceInfo a;
            a.cmd = s.cmd;
            a.process = s.process;
            a.recovery = s.recovery;
            a.invoke = s.seq;
            a.quorum = s.quorum;
            a.touched.insert(s.process);
            latest[{s.process, s.cmd}] = out.size();
            out.push_back(a);
            depth.push_back({{s.process, 0}});
            in_flight.push_back(0);
            continue;
        }
        if (s.event == EventType::Announce && s.kind == StepKind::Respond) {
            auto it = latest.find({s.process, s.cmd});
            if (it == latest.end()) continue;
            AnnounceInfo& a = out[it->second];
            if (a.respond != kNever) continue;
            a.respond = s.seq;
            a.flag = s.flag;
            a.deps = s.value;
            a.latency = depth[it->second][s.process];
            a.pending = in_flight[it->second];
            continue;
        }
        if (s.kind == StepKind::Send) {
            std::optional<std::size_t> idx;
            std::size_t d = 0;
            if (is_request(s.tag)) {
                auto it = latest.find({s.sender, s.cmd});
                if (it != latest.end()) idx = it->second;
            } else if (is_reply(s.tag)) {
                auto it = latest.find({s.dest, s.cmd});
                if (it != latest.end()) idx = it->second;
            }
            if (!idx) continue;
            auto dt = depth[*idx].find(s.sender);
            if (dt == depth[*idx].end()) continue;  // the sender is not part of this announce
            d = dt->second;
            const bool open = out[*idx].respond == kNever;
            carried[s.message] = {*idx, d, open};
            if (open) ++in_flight[*idx];
            continue;
        }
        if (s.kind == StepKind::Recv) {
            auto it = carried.find(s.message);
            if (it == carried.end()) continue;
            const Carried c = it->second;
            carried.erase(it);
            if (c.open && in_flight[c.announce] > 0) --in_flight[c.announce];
            AnnounceInfo& a = out[c.announce];
            if (a.respond != kNever && s.process == a.process) continue;
            auto& dm = depth[c.announce];
            auto [pos, fresh] = dm.emplace(s.process, c.depth + 1);
            if (!fresh) pos->second = std::max(pos->second, c.depth + 1);
            if (a.respond == kNever) a.touched.insert(s.process);
        }
    }
    return out;
}

std::map<CommandId, bool> contended_all(const Trace& t) {
    std::map<CommandId, bool> out;
    std::map<Key, std::vector<CommandId>> submitted_by_key;
    std::vector<std::set<CommandId>> committed(t.config.n);
    for (const Step& s : t.steps) {
        if (s.kind == StepKind::Local && s.event == EventType::Commit && s.process < t.config.n)
            committed[s.process].insert(s.cmd);
        if (s.kind != StepKind::Invoke || s.event != EventType::Submit || s.recovery || !s.body)
            continue;
        if (out.count(s.cmd)) continue;
        auto& earlier = submitted_by_key[s.body->key];
        bool c = false;
        for (CommandId d : earlier)
            if (!committed[s.process].count(d)) c = true;
        out[s.cmd] = c;
        earlier.push_back(s.cmd);
    }
    return out;
}

bool contended(const Trace& t, CommandId c) {
    auto all = contended_all(t);
    auto it = all.find(c);
    return it != all.end() && it->second;
}

namespace {

struct ChainGraph {
    std::map<CommandId, std::uint64_t> first_commit;
    // x -> (y, witness) for y in deps(x) at some process
    std::map<CommandId, std::vector<std::pair<CommandId, std::pair<ProcessId, std::uint64_t>>>> links;
    std::set<CommandId> nodes;
    std::set<CommandId> stable_somewhere;
};

std::vector<Chain> live_chains_of(const ChainGraph& g) {
    auto tc = [&](CommandId c) {
        auto it = g.first_commit.find(c);
        return it == g.first_commit.end() ? kNever : it->second;
    };
    std::vector<CommandId> order(g.nodes.begin(), g.nodes.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](CommandId a, CommandId b) { return tc(a) < tc(b); });
    // a chain has to respect commit order: each link source committed before the next
    std::map<CommandId, std::vector<std::pair<CommandId, std::pair<ProcessId, std::uint64_t>>>> incoming;
    for (auto& [x, ys] : g.links)
        for (auto& [y, w] : ys)
            if (tc(x) < tc(y)) incoming[y].push_back({x, w});
    std::map<CommandId, std::size_t> best;
    std::map<CommandId, std::pair<CommandId, std::pair<ProcessId, std::uint64_t>>> parent;
    for (CommandId y : order) {
        std::size_t b = 1;
        auto it = incoming.find(y);
        if (it != incoming.end()) {
            for (auto& [x, w] : it->second) {
                auto bx = best.find(x);
                if (bx != best.end() && bx->second + 1 > b) {
                    b = bx->second + 1;
                    parent[y] = {x, w};
                }
            }
        }
        best[y] = b;
    }
    std::vector<Chain> out;
    for (CommandId y : order) {
        if (g.stable_somewhere.count(y)) continue;
        Chain c;
        CommandId cur = y;
        c.commands.push_back(cur);
        while (parent.count(cur)) {
            c.witness.push_back(parent[cur].second);
            cur = parent[cur].first;
            c.commands.push_back(cur);
        }
        std::reverse(c.commands.begin(), c.commands.end());
        std::reverse(c.witness.begin(), c.witness.end());
        out.push_back(std::move(c));
    }
    return out;
}

class ChainTracker {
public:
    explicit ChainTracker(std::uint32_t n) : replay_(n) {}

    void feed(const Step& s) {
        if (s.kind == StepKind::Invoke && s.event == EventType::Submit && s.has_cmd &&
            !g_.stable_somewhere.count(s.cmd))
            g_.nodes.insert(s.cmd);
        const auto stable = replay_.feed(s);
        // deps(x) at p never changes after the commit, so its links are read once here
        if (s.kind == StepKind::Local && s.event == EventType::Commit && s.process < replay_.n() &&
            !g_.stable_somewhere.count(s.cmd)) {
            g_.first_commit.emplace(s.cmd, s.seq);
            g_.nodes.insert(s.cmd);
            const DepsValue& v = replay_.store(s.process).deps(s.cmd);
            if (v.is_committed()) {
                auto& out = g_.links[s.cmd];
                for (CommandId y : v.ids)
                    if (!g_.stable_somewhere.count(y)) out.push_back({y, {s.process, s.seq}});
            }
        }
        // A command stable anywhere has the whole chain below it stable there too, so
        // it can sit on no live chain and is dropped for good.
        for (CommandId c : stable) {
            if (!g_.stable_somewhere.insert(c).second) continue;
            g_.nodes.erase(c);
            g_.links.erase(c);
        }
    }

    std::vector<Chain> chains() {
        for (auto& [x, ys] : g_.links) {
            std::erase_if(ys, [&](const auto& l) { return g_.stable_somewhere.count(l.first) > 0; });
            for (auto& l : ys) g_.nodes.insert(l.first);
        }
        return live_chains_of(g_);
    }

private:
    StoreReplay replay_;
    ChainGraph g_;
};

}  // namespace

std::vector<Chain> find_live_chains(const Trace& t, std::uint64_t at) {
    ChainTracker tr(t.config.n);
    for (const Step& s : t.steps) {
        if (s.seq > at) break;
        tr.feed(s);
    }
    return tr.chains();
}

std::size_t max_live_chain(const Trace& t, std::uint64_t at) {
    std::size_t best = 0;
    for (const Chain& c : find_live_chains(t, at)) best = std::max(best, c.commands.size());
    return best;
}

std::vector<std::pair<std::int64_t, std::size_t>> live_chain_timeline(const Trace& t,
                                                                      std::size_t max_points) {
    std::vector<std::pair<std::int64_t, std::size_t>> out;
    if (t.steps.empty()) return out;
    std::vector<std::size_t> ends;  // index of the last step at each time stamp
    for (std::size_t i = 0; i < t.steps.size(); ++i)
        if (i + 1 == t.steps.size() || t.steps[i + 1].time != t.steps[i].time) ends.push_back(i);
    const std::size_t stride = std::max<std::size_t>(1, (ends.size() + max_points - 1) / max_points);
    ChainTracker tr(t.config.n);
    std::size_t next = 0;
    for (std::size_t k = 0; k < ends.size(); ++k) {
        for (; next <= ends[k]; ++next) tr.feed(t.steps[next]);
        if (k % stride != 0 && k + 1 != ends.size()) continue;
        std::size_t best = 0;
        for (const Chain& c : tr.chains()) best = std::max(best, c.commands.size());
        out.emplace_back(t.steps[ends[k]].time, best);
    }
    return out;
}

std::optional<std::int64_t> CommandStats::commit_latency() const {
    if (!commit) return std::nullopt;
    return *commit - submit;
}

std::optional<std::int64_t> CommandStats::execute_latency() const {
    if (!execute) return std::nullopt;
    return *execute - submit;
}

double percentile(std::vector<double> xs, double q) {
    if (xs.empty()) return 0;
    std::sort(xs.begin(), xs.end());
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * xs.size()));
    if (rank == 0) rank = 1;
    return xs[std::min(rank, xs.size()) - 1];
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

LatencyReport latency_stats(const Trace& t) {
    LatencyReport r;
    std::map<CommandId, std::size_t> index;
    for (const Step& s : t.steps) {
        if (s.kind == StepKind::Invoke && s.event == EventType::Submit && !s.recovery && s.body &&
            !is_noop_key(s.body->key) && !index.count(s.cmd)) {
            index[s.cmd] = r.commands.size();
            CommandStats c;
            c.id = s.cmd;
            c.key = s.body->key;
            c.submit = s.time;
            r.commands.push_back(c);
            continue;
        }
        if (s.kind != StepKind::Local) continue;
        if (s.event == EventType::Commit || s.event == EventType::Abort) {
            auto it = index.find(s.cmd);
            if (it == index.end() || s.process != s.cmd.submitter) continue;
            CommandStats& c = r.commands[it->second];
            if (!c.commit) {
                c.commit = s.time;
                c.aborted = s.event == EventType::Abort;
            }
        } else if (s.event == EventType::Execute) {
            for (CommandId x : s.batch) {
                auto it = index.find(x);
                if (it == index.end() || s.process != x.submitter) continue;
                CommandStats& c = r.commands[it->second];
                if (!c.execute) {
                    c.execute = s.time;
                    c.batch_size = s.batch.size();
                }
            }
        }
    }
    std::vector<double> lat, size;
    for (const auto& c : r.commands) {
        if (auto l = c.execute_latency()) {
            lat.push_back(static_cast<double>(*l));
            size.push_back(static_cast<double>(c.batch_size));
        }
    }
    r.correlation = pearson(lat, size);
    std::vector<double> sorted = lat;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        r.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / sorted.size());
    }
    return r;
}

void write_cdf_csv(const LatencyReport& r, std::ostream& out) {
    out << "latency,fraction\n";
    for (auto& [l, f] : r.cdf) out << l << ',' << f << '\n';
}

void write_commands_csv(const LatencyReport& r, std::ostream& out) {
    out << "id,submit,commit,execute,batch_size\n";
    for (const auto& c : r.commands) {
        out << c.id.submitter << '.' << c.id.seq << ',' << c.submit << ',';
        if (c.commit) out << *c.commit;
        out << ',';
        if (c.execute) out << *c.execute;
        out << ',' << c.batch_size << '\n';
    }
}

void write_chains_csv(const std::vector<std::pair<std::int64_t, std::size_t>>& rows,
                      std::ostream& out) {
    out << "time,max_live_chain_len\n";
    for (auto& [t, k] : rows) out << t << ',' << k << '\n';
}

}  // namespace lsmr
