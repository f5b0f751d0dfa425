#pragma once

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gesmag/graph.hpp"

namespace testutil {

using gesmag::Mark;
using gesmag::MixedGraph;
using gesmag::VertexId;
using gesmag::VertexSet;

struct E {
    int a;
    const char* sym;
    int b;
};

/// Builds a graph from 1-based edges as usually drawn: "->", "<->", "--", "o->", "o-o", "o--".
inline MixedGraph from_one_based(int n, std::initializer_list<E> edges) {
    MixedGraph g(n);
    for (const E& e : edges) {
        std::string s = e.sym;
        int a = e.a - 1, b = e.b - 1;
        if (s == "->") g.add_directed(a, b);
        else if (s == "<->") g.add_bidirected(a, b);
        else if (s == "--") g.add_undirected(a, b);
        else if (s == "o->") g.set_edge(a, b, Mark::Circle, Mark::Arrow);
        else if (s == "o-o") g.set_edge(a, b, Mark::Circle, Mark::Circle);
        else if (s == "o--") g.set_edge(a, b, Mark::Circle, Mark::Tail);
        else throw std::runtime_error("bad symbol " + s);
    }
    return g;
}

inline VertexSet one_based(std::initializer_list<int> vs) {
    VertexSet s;
    for (int v : vs) s.insert(v - 1);
    return s;
}

/// Ancestors computed by plain DFS over directed edges, independent of the library's closure.
inline VertexSet oracle_ancestors(const MixedGraph& g, VertexSet w) {
    VertexSet seen = w;
    std::vector<VertexId> stack(w.begin(), w.end());
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (VertexId u = 0; u < g.n(); ++u) {
            if (g.adjacent(u, v) && g.mark(u, v) == Mark::Arrow && g.mark(v, u) == Mark::Tail && !seen.contains(u)) {
                seen.insert(u);
                stack.push_back(u);
            }
        }
    }
    return seen;
}

/// m-separation by enumerating every simple path between A and B.
inline bool oracle_m_separated(const MixedGraph& g, VertexSet a, VertexSet b, VertexSet c) {
    const VertexSet an_c = oracle_ancestors(g, c);
    std::vector<VertexId> path;
    bool connected = false;
    std::function<void(VertexId, VertexSet)> dfs = [&](VertexId v, VertexSet on_path) {
        if (connected) return;
        if (b.contains(v) && path.size() >= 2) {
            bool open = true;
            for (std::size_t i = 1; i + 1 < path.size() && open; ++i) {
                VertexId prev = path[i - 1], mid = path[i], next = path[i + 1];
                bool collider = g.mark(prev, mid) == Mark::Arrow && g.mark(next, mid) == Mark::Arrow;
                open = collider ? an_c.contains(mid) : !c.contains(mid);
            }
            if (open) connected = true;
            return;
        }
        for (VertexId w = 0; w < g.n(); ++w) {
            if (!g.adjacent(v, w) || on_path.contains(w)) continue;
            path.push_back(w);
            dfs(w, on_path.with(w));
            path.pop_back();
        }
    };
    for (VertexId s : a) {
        path = {s};
        dfs(s, VertexSet::single(s));
    }
    return !connected;
}

/// Random ADMG: random order, each pair joined with probability p_edge, directed with p_dir.
inline MixedGraph random_admg(std::mt19937_64& rng, int n, double p_edge, double p_dir) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MixedGraph g(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) >= p_edge) continue;
            if (u(rng) < p_dir) g.add_directed(order[i], order[j]);
            else g.add_bidirected(order[i], order[j]);
        }
    }
    return g;
}

inline MixedGraph random_mag(std::mt19937_64& rng, int n, double p_edge, double p_dir) {
    return gesmag::project_to_mag(random_admg(rng, n, p_edge, p_dir));
}

/// Calls f(a, b, C) for every pair a < b and every C ⊆ V \ {a, b}.
template <typename F>
void for_each_pair_and_set(int n, F&& f) {
    for (VertexId a = 0; a < n; ++a) {
        for (VertexId b = a + 1; b < n; ++b) {
            VertexSet rest = VertexSet::range(n).without(a).without(b);
            gesmag::for_each_subset(rest, [&](VertexSet c) { f(a, b, c); });
        }
    }
}

/// Same m-separation model over all singleton pairs (enough for graphs without selection).
inline bool same_separation_model(const MixedGraph& g1, const MixedGraph& g2) {
    bool same = true;
    for_each_pair_and_set(g1.n(), [&](VertexId a, VertexId b, VertexSet c) {
        if (!same) return;
        VertexSet sa = VertexSet::single(a), sb = VertexSet::single(b);
        if (gesmag::m_separated(g1, sa, sb, c) != gesmag::m_separated(g2, sa, sb, c)) same = false;
    });
    return same;
}

// W is outside the parametrizing set iff two of its members can be separated by a set
// containing the rest of W.
inline bool oracle_in_pset(const MixedGraph& g, VertexSet w) {
    if (w.size() == 1) return true;
    for (VertexId a : w) {
        for (VertexId b : w) {
            if (b <= a) continue;
            VertexSet must = w.without(a).without(b);
            VertexSet free = g.vertices() - w;
            bool sep = false;
            gesmag::for_each_subset(free, [&](VertexSet extra) {
                if (!sep && oracle_m_separated(g, {a}, {b}, must | extra)) sep = true;
            });
            if (sep) return false;
        }
    }
    return true;
}

}  // namespace testutil
