#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gesmag/graph.hpp"
#include "gesmag/heads.hpp"

namespace gesmag {

/// <A, B | C>
struct CIStatement {
    VertexSet a;
    VertexSet b;
    VertexSet c;

    bool is_null() const { return a.empty() || b.empty(); }
    /// Swaps A and B so that min(A) <= min(B).
    CIStatement canonical() const {
        if (!a.empty() && !b.empty() && b.min() < a.min()) return {b, a, c};
        return *this;
    }
    bool operator==(const CIStatement&) const = default;
    bool operator<(const CIStatement& o) const {
        return std::tie(a, b, c) < std::tie(o.a, o.b, o.c);
    }
    std::string str() const { return a.str() + " _||_ " + b.str() + " | " + c.str(); }
};

/// A topological order together with the position of each vertex in it.
class VertexOrder {
public:
    VertexOrder() = default;
    explicit VertexOrder(std::vector<VertexId> order) : order_(std::move(order)), pos_(order_positions(order_)) {}
    static VertexOrder of(const MixedGraph& g) { return VertexOrder(topological_order(g)); }

    const std::vector<VertexId>& order() const { return order_; }
    int pos(VertexId v) const { return pos_[v]; }
    VertexId max_of(VertexSet s) const {
        VertexId best = s.min();
        for (VertexId v : s) {
            if (pos_[v] > pos_[best]) best = v;
        }
        return best;
    }
    VertexId min_of(VertexSet s) const {
        VertexId best = s.min();
        for (VertexId v : s) {
            if (pos_[v] < pos_[best]) best = v;
        }
        return best;
    }
    /// Vertices strictly before v.
    VertexSet before(VertexId v) const {
        VertexSet s;
        for (int i = 0; i < pos_[v]; ++i) s.insert(order_[i]);
        return s;
    }

    bool consistent_with(const MixedGraph& g) const {
        if (static_cast<int>(order_.size()) != g.n()) return false;
        for (VertexId v = 0; v < g.n(); ++v) {
            for (VertexId p : g.parents(v)) {
                if (pos_[p] > pos_[v]) return false;
            }
        }
        return true;
    }

private:
    std::vector<VertexId> order_;
    std::vector<int> pos_;
};

inline bool is_ancestral_set(const MixedGraph& g, VertexSet a) { return ancestors(g, a) == a; }

/// (dis_{G_A}(i) ∪ pa(dis_{G_A}(i))) \ {i}
inline VertexSet markov_blanket(const MixedGraph& g, VertexId i, VertexSet a) {
    if (!a.contains(i)) throw DomainError("Markov blanket: vertex not in the ancestral set");
    if (!is_ancestral_set(g, a)) throw DomainError("Markov blanket: set is not ancestral");
    VertexSet dis = district(g, VertexSet::single(i), a);
    return (dis | parents_of(g, dis)).without(i);
}

/// barren_{G'}(dis_{G'}(i)) with G' = G_{an(H) \ {k}} and i = max(H).
inline VertexSet marginalize_head(const MixedGraph& g, VertexSet h, VertexId k, const VertexOrder& order) {
    if (!h.contains(k)) throw DomainError("marginalization vertex not in head");
    VertexId i = order.max_of(h);
    if (k == i) throw DomainError("the maximal vertex of a head cannot be marginalized");
    if (barren(g, h) != h) throw DomainError("marginalization needs a barren set");
    VertexSet rest = ancestors(g, h).without(k);
    return barren(g, district(g, VertexSet::single(i), rest));
}

/// i ⊥ (H ∪ T) \ (H' ∪ T' ∪ {k}) | (H' ∪ T') \ {i}
inline CIStatement ci_from_marginalization(const MixedGraph& g, VertexSet h, VertexId k, const VertexOrder& order) {
    VertexSet h2 = marginalize_head(g, h, k, order);
    VertexId i = order.max_of(h);
    VertexSet t = tail_of(g, h), t2 = tail_of(g, h2);
    VertexSet lhs = (h | t) - (h2 | t2).with(k);
    return CIStatement{VertexSet::single(i), lhs, (h2 | t2).without(i)};
}

inline VertexSet ceiling(const MixedGraph& g, VertexSet w) {
    VertexSet out;
    for (VertexId v : w) {
        if ((w & ancestors(g, VertexSet::single(v))) == VertexSet::single(v)) out.insert(v);
    }
    return out;
}

inline VertexSet hamlet(const MixedGraph& g, VertexSet h) {
    VertexSet an = ancestors(g, h);
    VertexSet dis = district(g, h, an);
    return siblings_of(g, dis) - dis;
}

struct PowerDagEdge {
    int from;  // index of parent head
    VertexId k;
    int to;
};

struct PowerDagComponent {
    VertexId anchor;
    std::vector<HeadTail> nodes;  // nodes[0] is the maximal head
    std::vector<PowerDagEdge> edges;
};

/// All heads with maximal element i are reached from barren(dis_{G_[i]}(i)) by repeated
/// marginalization; the component is built by that closure.
inline std::vector<PowerDagComponent> complete_power_dag(const MixedGraph& g, const VertexOrder& order,
                                                         std::optional<int> abort_above = std::nullopt) {
    require_no_circles(g);
    std::vector<PowerDagComponent> comps;
    comps.reserve(static_cast<std::size_t>(g.n()));
    for (VertexId i : order.order()) {
        PowerDagComponent comp{i, {}, {}};
        VertexSet upto = order.before(i).with(i);
        VertexSet top = barren(g, district(g, VertexSet::single(i), upto));
        std::map<VertexSet, int> index;
        auto add_node = [&](VertexSet h) {
            auto [it, inserted] = index.emplace(h, static_cast<int>(comp.nodes.size()));
            if (inserted) comp.nodes.push_back({h, tail_of(g, h)});
            return std::pair{it->second, inserted};
        };
        add_node(top);
        for (std::size_t q = 0; q < comp.nodes.size(); ++q) {
            VertexSet h = comp.nodes[q].head;
            if (abort_above && h.size() > *abort_above) return {};
            for (VertexId k : h.without(i)) {
                VertexSet h2 = marginalize_head(g, h, k, order);
                int to = add_node(h2).first;
                comp.edges.push_back({static_cast<int>(q), k, to});
            }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

/// Largest head size, or nullopt as soon as a head larger than `cap` is met.
inline std::optional<int> max_head_size_within(const MixedGraph& g, int cap) {
    auto comps = complete_power_dag(g, VertexOrder::of(g), cap);
    if (comps.empty() && g.n() > 0) return std::nullopt;
    int best = 0;
    for (const auto& c : comps) {
        for (const auto& node : c.nodes) best = std::max(best, node.head.size());
    }
    return best;
}

struct RefinedPowerDag {
    std::vector<PowerDagComponent> components;  // edges pruned to one per non-maximal head
    int fallback_count = 0;
};

inline RefinedPowerDag refined_power_dag(const MixedGraph& g, const VertexOrder& order) {
    RefinedPowerDag out;
    auto comps = complete_power_dag(g, order);
    for (auto& comp : comps) {
        std::vector<VertexSet> an;
        an.reserve(comp.nodes.size());
        for (const auto& nd : comp.nodes) an.push_back(ancestors(g, nd.head));
        std::vector<PowerDagEdge> kept;
        for (int child = 1; child < static_cast<int>(comp.nodes.size()); ++child) {
            std::vector<PowerDagEdge> into;
            for (const auto& e : comp.edges) {
                if (e.to == child) into.push_back(e);
            }
            if (into.empty()) continue;
            VertexSet ham = hamlet(g, comp.nodes[child].head);
            VertexSet ceil = ceiling(g, ham);
            std::vector<PowerDagEdge> cand;
            if (!ceil.empty()) {
                VertexId k = order.min_of(ceil);
                for (const auto& e : into) {
                    if (e.k == k) cand.push_back(e);
                }
            }
            if (cand.empty()) {
                ++out.fallback_count;
                VertexId kmin = into.front().k;
                for (const auto& e : into) {
                    if (order.pos(e.k) < order.pos(kmin)) kmin = e.k;
                }
                for (const auto& e : into) {
                    if (e.k == kmin) cand.push_back(e);
                }
            }
            // Parents reaching the child through the same k share its conditioning set, and a larger
            // ancestor set gives a larger independent side that implies the others. Keep the
            // parents whose ancestor set is not strictly inside another's, then the lexicographically
            // smallest head.
            std::vector<PowerDagEdge> maximal;
            for (const auto& e : cand) {
                bool dominated = false;
                for (const auto& f : cand) {
                    if (an[f.from] != an[e.from] && an[e.from].subset_of(an[f.from])) dominated = true;
                }
                if (!dominated) maximal.push_back(e);
            }
            auto best = std::min_element(maximal.begin(), maximal.end(), [&](const PowerDagEdge& x, const PowerDagEdge& y) {
                return lex_less(comp.nodes[x.from].head, comp.nodes[y.from].head);
            });
            kept.push_back(*best);
        }
        comp.edges = std::move(kept);
        out.components.push_back(std::move(comp));
    }
    return out;
}

namespace detail {

inline void push_ci(std::vector<CIStatement>& list, std::set<CIStatement>& seen, CIStatement ci) {
    if (ci.is_null()) return;
    ci = ci.canonical();
    if (seen.insert(ci).second) list.push_back(ci);
}

inline CIStatement local_statement_a(const MixedGraph& g, VertexId i, const VertexOrder& order) {
    VertexSet prev = order.before(i);
    VertexSet mb = markov_blanket(g, i, prev.with(i));
    return CIStatement{VertexSet::single(i), prev - mb, mb};
}

inline CIStatement edge_statement(const PowerDagComponent& comp, const PowerDagEdge& e) {
    const HeadTail& parent = comp.nodes[e.from];
    const HeadTail& child = comp.nodes[e.to];
    VertexId i = comp.anchor;
    VertexSet lhs = (parent.head | parent.tail) - (child.head | child.tail).with(e.k);
    return CIStatement{VertexSet::single(i), lhs, (child.head | child.tail).without(i)};
}

}  // namespace detail

inline std::vector<CIStatement> refined_markov_property(const MixedGraph& g, const VertexOrder& order) {
    std::vector<CIStatement> out;
    std::set<CIStatement> seen;
    RefinedPowerDag rp = refined_power_dag(g, order);
    for (const auto& comp : rp.components) {
        detail::push_ci(out, seen, detail::local_statement_a(g, comp.anchor, order));
        for (const auto& e : comp.edges) detail::push_ci(out, seen, detail::edge_statement(comp, e));
    }
    return out;
}

inline std::vector<CIStatement> ordered_local_markov_property(const MixedGraph& g, const VertexOrder& order) {
    std::vector<CIStatement> out;
    std::set<CIStatement> seen;
    for (const auto& comp : complete_power_dag(g, order)) {
        detail::push_ci(out, seen, detail::local_statement_a(g, comp.anchor, order));
        for (const auto& e : comp.edges) detail::push_ci(out, seen, detail::edge_statement(comp, e));
    }
    return out;
}

inline std::vector<CIStatement> pairwise_markov_property(const MixedGraph& g, const VertexOrder&) {
    require_no_circles(g);
    std::vector<CIStatement> out;
    std::set<CIStatement> seen;
    for (VertexId a = 0; a < g.n(); ++a) {
        for (VertexId b = a + 1; b < g.n(); ++b) {
            if (g.adjacent(a, b)) continue;
            VertexSet c = ancestors(g, VertexSet{a, b}).without(a).without(b);
            detail::push_ci(out, seen, CIStatement{VertexSet::single(a), VertexSet::single(b), c});
        }
    }
    return out;
}

enum class PropertyKind { Refined, Local, Pairwise };

inline std::vector<CIStatement> markov_property(const MixedGraph& g, const VertexOrder& order, PropertyKind kind) {
    switch (kind) {
        case PropertyKind::Refined: return refined_markov_property(g, order);
        case PropertyKind::Local: return ordered_local_markov_property(g, order);
        case PropertyKind::Pairwise: return pairwise_markov_property(g, order);
    }
    return {};
}

}  // namespace gesmag
