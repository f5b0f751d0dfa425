#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

#include "gesmag/graph.hpp"

namespace gesmag {

struct HeadTail {
    VertexSet head;
    VertexSet tail;
    bool operator==(const HeadTail&) const = default;
};

/// {w in W : de(w) ∩ W = {w}}
inline VertexSet barren(const MixedGraph& g, VertexSet w) {
    require_no_circles(g);
    VertexSet out;
    for (VertexId v : w) {
        VertexSet de = descendants(g, VertexSet::single(v));
        if ((de & w) == VertexSet::single(v)) out.insert(v);
    }
    return out;
}

/// Barren and bidirected-connected inside the subgraph induced by its ancestors.
inline bool is_head(const MixedGraph& g, VertexSet h) {
    if (h.empty()) return false;
    if (barren(g, h) != h) return false;
    VertexSet an = ancestors(g, h);
    return h.subset_of(district(g, VertexSet::single(h.min()), an));
}

inline VertexSet tail_of(const MixedGraph& g, VertexSet h) {
    VertexSet an = ancestors(g, h);
    VertexSet dis = district(g, h, an);
    return ((dis - h) | parents_of(g, dis)) - h;
}

/// Heads with at most `max_size` vertices (all heads when absent), ordered by size then by
/// lexicographic vertex list. Grows antichains inside each district of g.
inline std::vector<HeadTail> enumerate_heads(const MixedGraph& g, std::optional<int> max_size = std::nullopt) {
    require_no_circles(g);
    const int limit = max_size.value_or(g.n());
    std::vector<VertexSet> an(static_cast<std::size_t>(g.n())), de(static_cast<std::size_t>(g.n()));
    for (VertexId v = 0; v < g.n(); ++v) {
        an[v] = ancestors(g, VertexSet::single(v));
        de[v] = descendants(g, VertexSet::single(v));
    }
    std::vector<HeadTail> out;
    for (VertexSet dist : districts(g)) {
        std::vector<VertexId> members = dist.to_vector();
        // comparable[v] = vertices that cannot share an antichain with v
        std::vector<VertexSet> comparable(static_cast<std::size_t>(g.n()));
        for (VertexId v : members) comparable[v] = (an[v] | de[v]).without(v);
        auto consider = [&](VertexSet h) {
            if (is_head(g, h)) out.push_back({h, tail_of(g, h)});
        };
        // Depth-first over antichains, adding members in ascending order.
        std::function<void(std::size_t, VertexSet, VertexSet)> grow = [&](std::size_t from, VertexSet cur, VertexSet blocked) {
            for (std::size_t i = from; i < members.size(); ++i) {
                VertexId v = members[i];
                if (blocked.contains(v)) continue;
                VertexSet next = cur.with(v);
                consider(next);
                if (next.size() < limit) grow(i + 1, next, blocked | comparable[v]);
            }
        };
        grow(0, VertexSet{}, VertexSet{});
    }
    std::sort(out.begin(), out.end(), [](const HeadTail& x, const HeadTail& y) {
        if (x.head.size() != y.head.size()) return x.head.size() < y.head.size();
        return lex_less(x.head, y.head);
    });
    return out;
}

inline int max_head_size(const MixedGraph& g) {
    int best = 0;
    for (const HeadTail& ht : enumerate_heads(g)) best = std::max(best, ht.head.size());
    return best;
}

/// A set of vertex subsets, compared as a set.
class ParametrizingSet {
public:
    ParametrizingSet() = default;

    void insert(VertexSet s) { sets_.insert(s); }
    bool contains(VertexSet s) const { return sets_.count(s) > 0; }
    std::size_t size() const { return sets_.size(); }
    bool operator==(const ParametrizingSet& o) const { return sets_ == o.sets_; }

    /// Members sorted by size, then lexicographically.
    std::vector<VertexSet> sorted() const {
        std::vector<VertexSet> v(sets_.begin(), sets_.end());
        std::sort(v.begin(), v.end(), [](VertexSet a, VertexSet b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return lex_less(a, b);
        });
        return v;
    }

private:
    std::unordered_set<VertexSet> sets_;
};

inline ParametrizingSet parametrizing_set(const MixedGraph& g) {
    ParametrizingSet s;
    for (const HeadTail& ht : enumerate_heads(g)) {
        for_each_subset(ht.tail, [&](VertexSet a) { s.insert(ht.head | a); });
    }
    return s;
}

/// Membership without building the whole set: W = H ∪ A forces H = barren(W).
inline bool in_parametrizing_set(const MixedGraph& g, VertexSet w) {
    if (w.empty()) return false;
    VertexSet h = barren(g, w);
    if (!is_head(g, h)) return false;
    return (w - h).subset_of(tail_of(g, h));
}

inline int count_adjacencies(const MixedGraph& g, VertexSet w) {
    int c = 0;
    for (VertexId v : w) c += (g.adj(v) & w).size();
    return c / 2;
}

/// Members of size in [2, k].
inline ParametrizingSet restricted_parametrizing_set(const MixedGraph& g, int k) {
    if (k < 2) throw DomainError("restricted parametrizing set needs k >= 2");
    ParametrizingSet out;
    for (const HeadTail& ht : enumerate_heads(g, k)) {
        for_each_subset_up_to(ht.tail, k - ht.head.size(), [&](VertexSet a) {
            VertexSet s = ht.head | a;
            if (s.size() >= 2) out.insert(s);
        });
    }
    return out;
}

/// Size-2 members plus size-3 members with one or two adjacencies among their vertices.
inline ParametrizingSet tilde_s3(const MixedGraph& g) {
    ParametrizingSet out;
    for (VertexSet s : restricted_parametrizing_set(g, 3).sorted()) {
        if (s.size() == 2) {
            out.insert(s);
        } else {
            int adj = count_adjacencies(g, s);
            if (adj == 1 || adj == 2) out.insert(s);
        }
    }
    return out;
}

inline bool markov_equivalent(const MixedGraph& g1, const MixedGraph& g2) {
    if (g1.n() != g2.n()) throw DomainError("Markov equivalence needs graphs on the same vertex set");
    return parametrizing_set(g1) == parametrizing_set(g2);
}

}  // namespace gesmag
