#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "gesmag/errors.hpp"
#include "gesmag/vertex_set.hpp"

namespace gesmag {

enum class Mark : std::uint8_t { None = 0, Tail, Arrow, Circle };

enum class GraphKind : std::uint8_t { Admg, Mag, Pag, Pmg };

inline bool is_partial(GraphKind k) { return k == GraphKind::Pag || k == GraphKind::Pmg; }

struct Edge {
    VertexId a;
    VertexId b;
    Mark at_a;
    Mark at_b;
    bool operator==(const Edge&) const = default;
};

/// Mixed graph with a mark at each end of every edge. Serves ADMGs, MAGs and PAGs.
///
/// `mark(u, v)` is the mark at the v end of the edge between u and v, so a -> b has
/// mark(a, b) == Arrow and mark(b, a) == Tail. Per-vertex bitmasks of neighbours keyed by
/// the near-end and far-end mark are kept in sync so that parent/sibling queries are O(1).
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(int n, GraphKind kind = GraphKind::Admg) : n_(n), kind_(kind) {
        if (n < 0 || n > kMaxVertices) throw DomainError("vertex count out of range: " + std::to_string(n));
        marks_.assign(static_cast<std::size_t>(n) * n, Mark::None);
        near_.assign(static_cast<std::size_t>(n), {});
        far_.assign(static_cast<std::size_t>(n), {});
        adj_.assign(static_cast<std::size_t>(n), VertexSet{});
    }

    int n() const { return n_; }
    GraphKind kind() const { return kind_; }
    void set_kind(GraphKind k) { kind_ = k; }
    VertexSet vertices() const { return VertexSet::range(n_); }

    Mark mark(VertexId u, VertexId v) const { return marks_[idx(u, v)]; }
    bool adjacent(VertexId u, VertexId v) const { return adj_[u].contains(v); }
    VertexSet adj(VertexId v) const { return adj_[v]; }

    /// Neighbours u of v whose edge carries mark m at v.
    VertexSet near(VertexId v, Mark m) const { return near_[v][slot(m)]; }
    /// Neighbours u of v whose edge carries mark m at u.
    VertexSet far(VertexId v, Mark m) const { return far_[v][slot(m)]; }

    VertexSet parents(VertexId v) const { return near(v, Mark::Arrow) & far(v, Mark::Tail); }
    VertexSet children(VertexId v) const { return near(v, Mark::Tail) & far(v, Mark::Arrow); }
    VertexSet siblings(VertexId v) const { return near(v, Mark::Arrow) & far(v, Mark::Arrow); }
    VertexSet undirected_neighbors(VertexId v) const { return near(v, Mark::Tail) & far(v, Mark::Tail); }

    /// Sets the edge {u,v} with mark `at_u` at u and `at_v` at v. Replaces any existing edge.
    void set_edge(VertexId u, VertexId v, Mark at_u, Mark at_v) {
        check_vertex(u);
        check_vertex(v);
        if (u == v) throw DomainError("self loops are not allowed");
        if (at_u == Mark::None || at_v == Mark::None) throw DomainError("edge marks must be set");
        remove_edge(u, v);
        put(u, v, at_v);
        put(v, u, at_u);
        adj_[u].insert(v);
        adj_[v].insert(u);
        ++edge_count_;
    }
    void add_directed(VertexId from, VertexId to) { set_edge(from, to, Mark::Tail, Mark::Arrow); }
    void add_bidirected(VertexId a, VertexId b) { set_edge(a, b, Mark::Arrow, Mark::Arrow); }
    void add_undirected(VertexId a, VertexId b) { set_edge(a, b, Mark::Tail, Mark::Tail); }

    /// Changes the mark at the v end of an existing edge.
    void set_mark(VertexId u, VertexId v, Mark m) {
        if (!adjacent(u, v)) throw DomainError("no edge between " + std::to_string(u) + " and " + std::to_string(v));
        if (m == Mark::None) throw DomainError("edge marks must be set");
        clear(u, v);
        put(u, v, m);
    }

    void remove_edge(VertexId u, VertexId v) {
        if (!adjacent(u, v)) return;
        clear(u, v);
        clear(v, u);
        adj_[u].erase(v);
        adj_[v].erase(u);
        --edge_count_;
    }

    int edge_count() const { return edge_count_; }

    /// Edges with a < b, in ascending (a, b) order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(static_cast<std::size_t>(edge_count_));
        for (VertexId a = 0; a < n_; ++a) {
            for (VertexId b : adj_[a]) {
                if (b > a) out.push_back({a, b, mark(b, a), mark(a, b)});
            }
        }
        return out;
    }

    bool has_circles() const {
        for (VertexId v = 0; v < n_; ++v) {
            if (!near(v, Mark::Circle).empty()) return true;
        }
        return false;
    }

    /// Same vertex count, same adjacencies and the same mark at every edge end.
    bool same_marks(const MixedGraph& o) const { return n_ == o.n_ && marks_ == o.marks_; }
    bool operator==(const MixedGraph& o) const { return same_marks(o) && kind_ == o.kind_; }

    /// Mark matrix, row-major; used as a hash/dedup key.
    const std::vector<Mark>& raw_marks() const { return marks_; }

private:
    static constexpr std::size_t slot(Mark m) { return static_cast<std::size_t>(m) - 1; }
    std::size_t idx(VertexId u, VertexId v) const { return static_cast<std::size_t>(u) * n_ + v; }
    void check_vertex(VertexId v) const {
        if (v < 0 || v >= n_) throw DomainError("vertex " + std::to_string(v) + " out of range");
    }
    void put(VertexId u, VertexId v, Mark m) {
        marks_[idx(u, v)] = m;
        near_[v][slot(m)].insert(u);
        far_[u][slot(m)].insert(v);
    }
    void clear(VertexId u, VertexId v) {
        Mark old = marks_[idx(u, v)];
        if (old == Mark::None) return;
        near_[v][slot(old)].erase(u);
        far_[u][slot(old)].erase(v);
        marks_[idx(u, v)] = Mark::None;
    }

    int n_ = 0;
    GraphKind kind_ = GraphKind::Admg;
    int edge_count_ = 0;
    std::vector<Mark> marks_;
    std::vector<std::array<VertexSet, 3>> near_;
    std::vector<std::array<VertexSet, 3>> far_;
    std::vector<VertexSet> adj_;
};

inline void require_no_circles(const MixedGraph& g) {
    if (g.has_circles()) throw InvalidGraphKind("circle mark in a graph that must be fully oriented");
}

// ---------------------------------------------------------------------------
// Relations

/// Vertices reachable from `from` by repeatedly following `step`, restricted to `within`.
template <typename Step>
VertexSet closure(VertexSet from, VertexSet within, Step&& step) {
    VertexSet seen = from & within;
    VertexSet frontier = seen;
    while (!frontier.empty()) {
        VertexSet next;
        for (VertexId v : frontier) next |= step(v);
        next &= within;
        next -= seen;
        seen |= next;
        frontier = next;
    }
    return seen;
}

inline VertexSet parents_of(const MixedGraph& g, VertexSet w) {
    VertexSet out;
    for (VertexId v : w) out |= g.parents(v);
    return out;
}

inline VertexSet siblings_of(const MixedGraph& g, VertexSet w) {
    VertexSet out;
    for (VertexId v : w) out |= g.siblings(v);
    return out;
}

inline VertexSet ancestors(const MixedGraph& g, VertexSet w, VertexSet within) {
    return closure(w, within, [&](VertexId v) { return g.parents(v); });
}
inline VertexSet ancestors(const MixedGraph& g, VertexSet w) { return ancestors(g, w, g.vertices()); }

inline VertexSet descendants(const MixedGraph& g, VertexSet w, VertexSet within) {
    return closure(w, within, [&](VertexId v) { return g.children(v); });
}
inline VertexSet descendants(const MixedGraph& g, VertexSet w) { return descendants(g, w, g.vertices()); }

/// District of `w` in the induced subgraph on `within`.
inline VertexSet district(const MixedGraph& g, VertexSet w, VertexSet within) {
    return closure(w, within, [&](VertexId v) { return g.siblings(v); });
}
inline VertexSet district(const MixedGraph& g, VertexSet w) { return district(g, w, g.vertices()); }

struct Relations {
    VertexSet parents;
    VertexSet siblings;
    VertexSet ancestors;
    VertexSet descendants;
    VertexSet district;
};

inline Relations relations(const MixedGraph& g, VertexId v) {
    require_no_circles(g);
    VertexSet s = VertexSet::single(v);
    return {g.parents(v), g.siblings(v), ancestors(g, s), descendants(g, s), district(g, s)};
}

/// Bidirected-connected components, each listed once, ordered by smallest member.
inline std::vector<VertexSet> districts(const MixedGraph& g, VertexSet within) {
    require_no_circles(g);
    std::vector<VertexSet> out;
    VertexSet left = within;
    while (!left.empty()) {
        VertexSet d = district(g, VertexSet::single(left.min()), within);
        out.push_back(d);
        left -= d;
    }
    return out;
}
inline std::vector<VertexSet> districts(const MixedGraph& g) { return districts(g, g.vertices()); }

inline MixedGraph induced_subgraph(const MixedGraph& g, VertexSet w) {
    if (!w.subset_of(g.vertices())) throw DomainError("induced subgraph: vertex set not contained in graph");
    // Vertex ids are kept; vertices outside w are simply isolated and absent from the edge set.
    // Callers that need a compacted graph use compact_subgraph.
    MixedGraph out(g.n(), g.kind());
    for (const Edge& e : g.edges()) {
        if (w.contains(e.a) && w.contains(e.b)) out.set_edge(e.a, e.b, e.at_a, e.at_b);
    }
    return out;
}

/// Induced subgraph relabelled to 0..|w|-1 in ascending order of the original ids.
inline MixedGraph compact_subgraph(const MixedGraph& g, VertexSet w) {
    if (!w.subset_of(g.vertices())) throw DomainError("induced subgraph: vertex set not contained in graph");
    std::vector<int> pos(static_cast<std::size_t>(g.n()), -1);
    int k = 0;
    for (VertexId v : w) pos[v] = k++;
    MixedGraph out(k, g.kind());
    for (const Edge& e : g.edges()) {
        if (w.contains(e.a) && w.contains(e.b)) out.set_edge(pos[e.a], pos[e.b], e.at_a, e.at_b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orders and acyclicity

/// Topological order of the directed part, lowest index first among ready vertices.
inline std::vector<VertexId> topological_order(const MixedGraph& g) {
    std::vector<int> indeg(static_cast<std::size_t>(g.n()), 0);
    for (VertexId v = 0; v < g.n(); ++v) indeg[v] = g.parents(v).size();
    std::priority_queue<VertexId, std::vector<VertexId>, std::greater<>> ready;
    for (VertexId v = 0; v < g.n(); ++v) {
        if (indeg[v] == 0) ready.push(v);
    }
    std::vector<VertexId> order;
    order.reserve(static_cast<std::size_t>(g.n()));
    while (!ready.empty()) {
        VertexId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (VertexId c : g.children(v)) {
            if (--indeg[c] == 0) ready.push(c);
        }
    }
    if (static_cast<int>(order.size()) != g.n()) throw DomainError("directed cycle: no topological order");
    return order;
}

inline bool is_acyclic(const MixedGraph& g) {
    try {
        topological_order(g);
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

/// position[v] = index of v in `order`.
inline std::vector<int> order_positions(const std::vector<VertexId>& order) {
    std::vector<int> pos(order.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    return pos;
}

// ---------------------------------------------------------------------------
// m-separation

/// Reachability over (vertex, arrived-with-arrowhead) states. A walk m-connects iff a path
/// does, because colliders are only required to lie in an(C).
inline VertexSet m_connected_from(const MixedGraph& g, VertexSet sources, VertexSet given) {
    require_no_circles(g);
    const VertexSet anc_c = ancestors(g, given);
    // visited[arrow][v]
    std::array<VertexSet, 2> visited{};
    std::vector<std::pair<VertexId, int>> stack;
    VertexSet reached;
    for (VertexId s : sources) {
        for (VertexId w : g.adj(s)) {
            int arrow = g.mark(s, w) == Mark::Arrow ? 1 : 0;
            if (!visited[arrow].contains(w)) {
                visited[arrow].insert(w);
                stack.emplace_back(w, arrow);
            }
        }
    }
    while (!stack.empty()) {
        auto [v, arrow_in] = stack.back();
        stack.pop_back();
        if (!given.contains(v)) reached.insert(v);
        for (VertexId w : g.adj(v)) {
            bool arrow_out_at_v = g.mark(w, v) == Mark::Arrow;
            bool collider = arrow_in == 1 && arrow_out_at_v;
            bool pass = collider ? anc_c.contains(v) : !given.contains(v);
            if (!pass) continue;
            int arrow = g.mark(v, w) == Mark::Arrow ? 1 : 0;
            if (!visited[arrow].contains(w)) {
                visited[arrow].insert(w);
                stack.emplace_back(w, arrow);
            }
        }
    }
    return reached;
}

inline bool m_separated(const MixedGraph& g, VertexSet a, VertexSet b, VertexSet c) {
    if (a.empty() || b.empty()) throw DomainError("m-separation needs nonempty A and B");
    if (a.intersects(b) || a.intersects(c) || b.intersects(c)) throw DomainError("m-separation sets must be disjoint");
    return !m_connected_from(g, a, c).intersects(b);
}

// ---------------------------------------------------------------------------
// Ancestral and maximal graphs

/// Acyclic, no vertex has a sibling among its ancestors, and endpoints of undirected
/// edges have neither parents nor siblings.
inline bool is_ancestral(const MixedGraph& g) {
    require_no_circles(g);
    if (!is_acyclic(g)) return false;
    for (VertexId v = 0; v < g.n(); ++v) {
        VertexSet an = ancestors(g, VertexSet::single(v));
        if (g.siblings(v).intersects(an)) return false;
        if (!g.undirected_neighbors(v).empty() && (!g.parents(v).empty() || !g.siblings(v).empty())) return false;
    }
    return true;
}

/// True iff a and b (nonadjacent) are joined by a path on which every nonendpoint is a
/// collider lying in an({a,b}).
inline bool has_inducing_path(const MixedGraph& g, VertexId a, VertexId b) {
    const VertexSet allowed = ancestors(g, VertexSet{a, b}).without(a).without(b);
    VertexSet visited;
    std::vector<VertexId> stack;
    for (VertexId w : g.adj(a)) {
        if (allowed.contains(w) && g.mark(a, w) == Mark::Arrow && !visited.contains(w)) {
            visited.insert(w);
            stack.push_back(w);
        }
    }
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (VertexId w : g.adj(v)) {
            if (g.mark(w, v) != Mark::Arrow) continue;  // v must stay a collider
            if (w == b) return true;
            if (allowed.contains(w) && g.mark(v, w) == Mark::Arrow && !visited.contains(w)) {
                visited.insert(w);
                stack.push_back(w);
            }
        }
    }
    return false;
}

inline bool is_maximal(const MixedGraph& g) {
    if (!is_ancestral(g)) throw DomainError("maximality is only defined here for ancestral graphs");
    for (VertexId a = 0; a < g.n(); ++a) {
        for (VertexId b = a + 1; b < g.n(); ++b) {
            if (!g.adjacent(a, b) && has_inducing_path(g, a, b)) return false;
        }
    }
    return true;
}

inline bool is_mag(const MixedGraph& g) {
    if (g.has_circles()) return false;
    return is_ancestral(g) && is_maximal(g);
}

/// Markov-equivalent MAG preserving ancestral relations: adjacency iff inducing path,
/// a -> b when a is an ancestor of b, a <-> b otherwise.
inline MixedGraph project_to_mag(const MixedGraph& g) {
    require_no_circles(g);
    if (!is_acyclic(g)) throw DomainError("cannot project a cyclic graph");
    for (VertexId v = 0; v < g.n(); ++v) {
        if (!g.undirected_neighbors(v).empty()) throw InvalidGraphKind("projection expects an ADMG");
    }
    std::vector<VertexSet> an(static_cast<std::size_t>(g.n()));
    for (VertexId v = 0; v < g.n(); ++v) an[v] = ancestors(g, VertexSet::single(v));
    MixedGraph out(g.n(), GraphKind::Mag);
    for (VertexId a = 0; a < g.n(); ++a) {
        for (VertexId b = a + 1; b < g.n(); ++b) {
            if (!g.adjacent(a, b) && !has_inducing_path(g, a, b)) continue;
            if (an[b].contains(a)) {
                out.add_directed(a, b);
            } else if (an[a].contains(b)) {
                out.add_directed(b, a);
            } else {
                out.add_bidirected(a, b);
            }
        }
    }
    return out;
}

/// The circle-free skeleton relation: unshielded triple (a, b, c) means a-b, b-c, a !~ c.
inline bool is_unshielded(const MixedGraph& g, VertexId a, VertexId b, VertexId c) {
    return a != c && g.adjacent(a, b) && g.adjacent(b, c) && !g.adjacent(a, c);
}

inline bool is_collider(const MixedGraph& g, VertexId a, VertexId b, VertexId c) {
    return g.mark(a, b) == Mark::Arrow && g.mark(c, b) == Mark::Arrow;
}

}  // namespace gesmag
