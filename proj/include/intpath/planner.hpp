/**
 * @file planner.hpp
 * @brief Candidate route generation, per-route cost/constraint evaluation and
 * selection of the optimal feasible route.
 *
 * cost = sum over nodes of (incoming segment length) * HPL. The start node
 * contributes no cost term but is counted in the faulty-node ratio.
 */

#ifndef INTPATH_PLANNER_HPP
#define INTPATH_PLANNER_HPP

#include "intpath/integrity.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>

namespace intpath {

struct CandidatePath {
    std::string name;
    std::vector<std::string> nodes;
    std::vector<double> segment_lengths;  // size nodes.size() - 1

    double total_distance() const {
        double d = 0.0;
        for (double s : segment_lengths) d += s;
        return d;
    }
};

namespace detail {

/// Index-based copy of the road graph for repeated shortest-path queries.
struct IndexedGraph {
    std::vector<std::string> ids;                              // sorted
    std::vector<std::vector<std::pair<std::size_t, double>>> arcs;

    explicit IndexedGraph(const RoadGraph& g) {
        std::map<std::string, std::size_t> index;
        for (const auto& [id, _] : g.nodes) {
            index[id] = ids.size();
            ids.push_back(id);
        }
        arcs.resize(ids.size());
        for (const auto& [from, nbrs] : g.adjacency()) {
            for (const auto& [to, len] : nbrs) arcs[index.at(from)].emplace_back(index.at(to), len);
        }
    }

    std::size_t index_of(const std::string& id) const {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it == ids.end() || *it != id) throw ValidationError("unknown road node '" + id + "'");
        return static_cast<std::size_t>(it - ids.begin());
    }

    double length(std::size_t a, std::size_t b) const {
        for (const auto& [to, len] : arcs[a]) {
            if (to == b) return len;
        }
        throw ValidationError("nodes '" + ids[a] + "' and '" + ids[b] + "' are not adjacent");
    }

    double path_length(const std::vector<std::size_t>& p) const {
        double d = 0.0;
        for (std::size_t i = 1; i < p.size(); ++i) d += length(p[i - 1], p[i]);
        return d;
    }

    /// Dijkstra from s to t avoiding blocked nodes and removed arcs.
    std::optional<std::vector<std::size_t>> shortest(std::size_t s, std::size_t t,
                                                     const std::vector<bool>& blocked,
                                                     const std::set<std::pair<std::size_t, std::size_t>>& removed) const {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(ids.size(), inf);
        std::vector<std::size_t> prev(ids.size(), ids.size());
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[s] = 0.0;
        pq.emplace(0.0, s);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            if (u == t) break;
            for (const auto& [v, len] : arcs[u]) {
                if (blocked[v] || removed.contains({u, v})) continue;
                const double nd = d + len;
                // Equal distances prefer the lower predecessor index.
                if (nd < dist[v] || (nd == dist[v] && u < prev[v])) {
                    dist[v] = nd;
                    prev[v] = u;
                    pq.emplace(nd, v);
                }
            }
        }
        if (dist[t] == inf) return std::nullopt;
        std::vector<std::size_t> path{t};
        while (path.back() != s) path.push_back(prev[path.back()]);
        std::reverse(path.begin(), path.end());
        return path;
    }
};

/// Orders paths by length, then by node-id sequence.
struct PathKey {
    double length;
    std::vector<std::string> names;
    std::vector<std::size_t> nodes;

    bool operator<(const PathKey& o) const {
        if (length != o.length) return length < o.length;
        return names < o.names;
    }
};

}  // namespace detail

inline CandidatePath make_candidate(const RoadGraph& graph, std::string name, std::vector<std::string> nodes) {
    CandidatePath c;
    c.name = std::move(name);
    c.nodes = std::move(nodes);
    for (std::size_t i = 1; i < c.nodes.size(); ++i) {
        const auto len = graph.edge_length(c.nodes[i - 1], c.nodes[i]);
        if (!len) {
            throw ValidationError("candidate '" + c.name + "': nodes '" + c.nodes[i - 1] + "' and '" + c.nodes[i] +
                                  "' are not adjacent");
        }
        c.segment_lengths.push_back(*len);
    }
    return c;
}

/**
 * The K shortest loopless s-t paths (Yen), ordered by length and then by
 * node-id sequence. Throws when t is unreachable.
 */
inline std::vector<CandidatePath> k_shortest_paths(const RoadGraph& graph, const std::string& s,
                                                   const std::string& t, std::size_t K) {
    if (K < 1) throw ValidationError("k_shortest_paths: K must be >= 1");
    const detail::IndexedGraph g(graph);
    const std::size_t si = g.index_of(s);
    const std::size_t ti = g.index_of(t);
    auto key_of = [&](std::vector<std::size_t> p) {
        detail::PathKey k{g.path_length(p), {}, std::move(p)};
        for (std::size_t v : k.nodes) k.names.push_back(g.ids[v]);
        return k;
    };

    std::vector<detail::PathKey> found;
    std::set<detail::PathKey> pending;
    const std::vector<bool> none(g.ids.size(), false);
    auto first = g.shortest(si, ti, none, {});
    if (!first) throw ValidationError("no path from '" + s + "' to '" + t + "'");
    pending.insert(key_of(std::move(*first)));

    while (found.size() < K && !pending.empty()) {
        found.push_back(*pending.begin());
        pending.erase(pending.begin());
        if (found.size() == K) break;
        const auto& last = found.back().nodes;
        for (std::size_t i = 0; i + 1 < last.size(); ++i) {
            const std::vector<std::size_t> root(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(i + 1));
            std::set<std::pair<std::size_t, std::size_t>> removed;
            for (const auto& p : found) {
                if (p.nodes.size() > i + 1 && std::equal(root.begin(), root.end(), p.nodes.begin())) {
                    removed.insert({p.nodes[i], p.nodes[i + 1]});
                }
            }
            std::vector<bool> blocked(g.ids.size(), false);
            for (std::size_t j = 0; j < i; ++j) blocked[root[j]] = true;
            auto spur = g.shortest(root.back(), ti, blocked, removed);
            if (!spur) continue;
            std::vector<std::size_t> total(root.begin(), root.end() - 1);
            total.insert(total.end(), spur->begin(), spur->end());
            pending.insert(key_of(std::move(total)));
        }
    }

    std::vector<CandidatePath> out;
    for (std::size_t i = 0; i < found.size(); ++i) {
        out.push_back(make_candidate(graph, "k" + std::to_string(i + 1), found[i].names));
    }
    return out;
}

/**
 * K shortest loopless paths plus every named route that runs from s to t.
 * Named routes keep their names; duplicates of a k-shortest path replace its
 * generated name.
 */
inline std::vector<CandidatePath> enumerate_candidates(const RoadGraph& graph, const std::string& s,
                                                       const std::string& t, std::size_t K,
                                                       const std::map<std::string, std::vector<std::string>>& named = {}) {
    if (!graph.has_node(s)) throw ValidationError("unknown start node '" + s + "'");
    if (!graph.has_node(t)) throw ValidationError("unknown target node '" + t + "'");
    std::vector<CandidatePath> out = k_shortest_paths(graph, s, t, K);
    for (const auto& [name, ids] : named) {
        if (ids.empty() || ids.front() != s || ids.back() != t) continue;
        auto dup = std::find_if(out.begin(), out.end(), [&](const CandidatePath& c) { return c.nodes == ids; });
        if (dup != out.end()) {
            dup->name = name;
            continue;
        }
        out.push_back(make_candidate(graph, name, ids));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation and selection
// ---------------------------------------------------------------------------

struct PathEvaluation {
    std::string name;
    std::vector<std::string> nodes;  // road-graph node sequence
    double cost = 0.0;               // sum dist * HPL [m^2]
    double fault_ratio = 0.0;
    std::size_t n_nodes = 0;
    std::size_t n_faulty = 0;
    double max_hpl = 0.0;
    double avg_hpl = 0.0;
    double total_distance = 0.0;
    bool feasible = false;
    bool fault_ratio_ok = false;
    bool hal_ok = false;
};

/**
 * Cost and constraints of one scheduled route. results is keyed by the
 * schedule's node ids.
 */
inline PathEvaluation evaluate_path(const NodeSchedule& route, const std::map<std::string, NodeIntegrityResult>& results,
                                    const IntegrityParams& params) {
    PathEvaluation ev;
    if (route.entries.empty()) throw ValidationError("evaluate_path: empty route");
    double hpl_sum = 0.0;
    ev.hal_ok = true;
    for (const auto& e : route.entries) {
        auto it = results.find(e.node_id);
        if (it == results.end()) throw ValidationError("evaluate_path: missing result for node '" + e.node_id + "'");
        const NodeIntegrityResult& r = it->second;
        if (e.segment_length > 0.0) ev.cost += e.segment_length * r.hpl;
        ev.total_distance += e.segment_length;
        ev.max_hpl = std::max(ev.max_hpl, r.hpl);
        hpl_sum += r.hpl;
        if (r.fault) ++ev.n_faulty;
        if (!(r.hpl <= params.hal)) ev.hal_ok = false;
        ++ev.n_nodes;
    }
    ev.fault_ratio = static_cast<double>(ev.n_faulty) / static_cast<double>(ev.n_nodes);
    ev.avg_hpl = hpl_sum / static_cast<double>(ev.n_nodes);
    ev.fault_ratio_ok = ev.fault_ratio <= params.fault_max;
    ev.feasible = ev.fault_ratio_ok && ev.hal_ok;
    return ev;
}

struct PlanResult {
    std::optional<std::size_t> chosen;  // index into evaluations
    std::vector<PathEvaluation> evaluations;
};

/// True when a should be preferred over b: lower cost, then shorter, then
/// lexicographically smaller node sequence.
inline bool better_candidate(const PathEvaluation& a, const PathEvaluation& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.total_distance != b.total_distance) return a.total_distance < b.total_distance;
    return a.nodes < b.nodes;
}

inline PlanResult select_optimal(std::vector<PathEvaluation> evaluations) {
    if (evaluations.empty()) throw ValidationError("select_optimal: no candidates");
    PlanResult out;
    for (std::size_t i = 0; i < evaluations.size(); ++i) {
        if (!evaluations[i].feasible) continue;
        if (!out.chosen || better_candidate(evaluations[i], evaluations[*out.chosen])) out.chosen = i;
    }
    out.evaluations = std::move(evaluations);
    return out;
}

}  // namespace intpath

#endif  // INTPATH_PLANNER_HPP
