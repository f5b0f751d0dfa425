#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gesmag/graph.hpp"
#include "gesmag/heads.hpp"
#include "gesmag/pag.hpp"

namespace gesmag {

/// Unshielded triple end1 - centre - end2.
struct UCTriple {
    VertexId centre;
    VertexId end1;
    VertexId end2;

    VertexSet vertices() const { return VertexSet{centre, end1, end2}; }
    bool operator==(const UCTriple&) const = default;
};

struct AddTriples {
    MixedGraph base;  // circle skeleton plus the new edge, with the colliders kept from P
    std::vector<UCTriple> definite_i, definite_j, possible_i, possible_j;
};

struct DeleteTriples {
    MixedGraph base;
    std::vector<UCTriple> possible;
};

enum class MoveKind { Add, Delete, Turn };

inline const char* move_kind_name(MoveKind k) {
    switch (k) {
        case MoveKind::Add: return "add";
        case MoveKind::Delete: return "delete";
        case MoveKind::Turn: return "turn";
    }
    return "?";
}

struct MoveProposal {
    MoveKind kind;
    VertexId i = -1;
    VertexId j = -1;
    MixedGraph pag;  // arrow complete
    MixedGraph mag;  // validated representative
    std::vector<std::pair<DiscriminatingPath, bool>> branches;  // (path, collider chosen)
};

struct MoveConfig {
    std::size_t branch_cap = 256;
    std::size_t max_paths = 10000;
};

struct MoveStats {
    std::size_t seeds = 0;
    std::size_t forks = 0;
    std::size_t truncated = 0;
    std::size_t duplicates = 0;
    std::size_t invalid = 0;
    bool path_cap_hit = false;

    MoveStats& operator+=(const MoveStats& o) {
        seeds += o.seeds;
        forks += o.forks;
        truncated += o.truncated;
        duplicates += o.duplicates;
        invalid += o.invalid;
        path_cap_hit = path_cap_hit || o.path_cap_hit;
        return *this;
    }
};

namespace detail {

/// R0 for the triples that stay unshielded after the skeleton change and are colliders in P.
inline void keep_colliders(const MixedGraph& p, MixedGraph& q) {
    for_each_unshielded_triple(q, [&](VertexId a, VertexId b, VertexId c) {
        if (p.adjacent(a, b) && p.adjacent(b, c) && !p.adjacent(a, c) && p.mark(a, b) == Mark::Arrow && p.mark(c, b) == Mark::Arrow) {
            orient_collider(q, a, b, c);
        }
    });
}

inline void orient_triples(MixedGraph& q, const std::vector<UCTriple>& ts) {
    for (const UCTriple& t : ts) orient_collider(q, t.end1, t.centre, t.end2);
}

/// Drains each seed through the rules, forking on undecided R4 calls, depth first with the
/// collider branch first. Returns deduplicated, validated proposals.
inline std::vector<MoveProposal> drain(const std::vector<MixedGraph>& seeds, const R4Oracle& oracle, MoveKind kind, VertexId i, VertexId j,
                                       const MoveConfig& cfg, MoveStats* stats) {
    MoveStats local;
    local.seeds = seeds.size();
    struct Item {
        MixedGraph g;
        std::vector<std::pair<DiscriminatingPath, bool>> trail;
    };
    std::vector<MoveProposal> out;
    std::set<std::vector<Mark>> seen;
    OrientationConfig ocfg;
    ocfg.max_paths = cfg.max_paths;
    for (const MixedGraph& seed : seeds) {
        std::vector<Item> stack{{seed, {}}};
        while (!stack.empty()) {
            Item it = std::move(stack.back());
            stack.pop_back();
            OrientationOutcome res = apply_rules(it.g, oracle, ocfg);
            local.path_cap_hit = local.path_cap_hit || res.path_cap_hit;
            if (res.pending) {
                if (local.forks >= cfg.branch_cap) {
                    ++local.truncated;
                    continue;
                }
                ++local.forks;
                Item col = it, non = std::move(it);
                resolve_r4(col.g, *res.pending, true);
                col.trail.push_back({*res.pending, true});
                resolve_r4(non.g, *res.pending, false);
                non.trail.push_back({*res.pending, false});
                stack.push_back(std::move(non));
                stack.push_back(std::move(col));
                continue;
            }
            it.g.set_kind(GraphKind::Pag);
            if (!seen.insert(it.g.raw_marks()).second) {
                ++local.duplicates;
                continue;
            }
            std::optional<MixedGraph> rep = validated_representative(it.g);
            if (!rep) {
                ++local.invalid;
                continue;
            }
            out.push_back({kind, i, j, std::move(it.g), std::move(*rep), std::move(it.trail)});
        }
    }
    if (stats) *stats += local;
    return out;
}

inline void dedup_graphs(std::vector<MixedGraph>& gs) {
    std::set<std::vector<Mark>> seen;
    std::vector<MixedGraph> kept;
    for (auto& g : gs) {
        if (seen.insert(g.raw_marks()).second) kept.push_back(std::move(g));
    }
    gs = std::move(kept);
}

inline std::vector<UCTriple> concat(std::vector<UCTriple> a, const std::vector<UCTriple>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

template <typename F>
void for_each_sublist(const std::vector<UCTriple>& ts, F&& f) {
    if (ts.size() > 20) throw DomainError("too many uncertain triples to enumerate");
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << ts.size()); ++bits) {
        std::vector<UCTriple> pick;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            if ((bits >> k) & 1U) pick.push_back(ts[k]);
        }
        f(pick);
    }
}

}  // namespace detail

inline AddTriples uc_triples_add(const MixedGraph& p, VertexId i, VertexId j) {
    if (i == j || p.adjacent(i, j)) throw DomainError("add move needs two distinct nonadjacent vertices");
    AddTriples out{circle_skeleton(p), {}, {}, {}, {}};
    out.base.set_edge(i, j, Mark::Circle, Mark::Circle);
    detail::keep_colliders(p, out.base);
    for (VertexId a : {i, j}) {
        VertexId b = a == i ? j : i;
        for (VertexId k : p.adj(a)) {
            if (k == b || p.adjacent(b, k)) continue;
            Mark m = p.mark(k, a);
            if (m == Mark::Tail) continue;
            UCTriple t{a, b, k};
            auto& definite = a == i ? out.definite_i : out.definite_j;
            auto& possible = a == i ? out.possible_i : out.possible_j;
            (m == Mark::Arrow ? definite : possible).push_back(t);
        }
    }
    return out;
}

/// The incomplete PAGs an add move starts from, in enumeration order, before deduplication.
inline std::vector<MixedGraph> add_seeds(const AddTriples& t) {
    std::vector<MixedGraph> seeds{t.base};
    auto push = [&](const std::vector<UCTriple>& extra) {
        MixedGraph q = t.base;
        detail::orient_triples(q, extra);
        seeds.push_back(std::move(q));
    };
    detail::for_each_sublist(t.possible_i, [&](const std::vector<UCTriple>& uc) { push(detail::concat(uc, t.definite_i)); });
    detail::for_each_sublist(t.possible_j, [&](const std::vector<UCTriple>& uc) { push(detail::concat(uc, t.definite_j)); });
    detail::for_each_sublist(detail::concat(t.possible_i, t.possible_j), [&](const std::vector<UCTriple>& uc) {
        push(detail::concat(detail::concat(uc, t.definite_i), t.definite_j));
    });
    return seeds;
}

/// `rep` is a representative MAG of P, used for parametrizing-set lookups.
inline std::vector<MoveProposal> add_adjacency(const MixedGraph& p, const MixedGraph& rep, VertexId i, VertexId j, const MoveConfig& cfg = {},
                                               MoveStats* stats = nullptr) {
    std::vector<MixedGraph> seeds = add_seeds(uc_triples_add(p, i, j));
    detail::dedup_graphs(seeds);
    R4Oracle oracle = [&](const MixedGraph&, const DiscriminatingPath& path) {
        VertexId b = path.b(), c = path.c();
        if (in_parametrizing_set(rep, VertexSet{path.d(), b, c})) return R4Decision::Collider;
        if (!p.adjacent(b, c)) return R4Decision::Branch;
        if (p.mark(c, b) == Mark::Arrow) return R4Decision::Collider;
        if (p.mark(c, b) == Mark::Tail) return R4Decision::NonCollider;
        return R4Decision::Branch;
    };
    return detail::drain(seeds, oracle, MoveKind::Add, i, j, cfg, stats);
}

inline DeleteTriples uc_triples_delete(const MixedGraph& p, VertexId i, VertexId j) {
    if (!p.adjacent(i, j)) throw DomainError("delete move needs an existing adjacency");
    DeleteTriples out{circle_skeleton(p), {}};
    out.base.remove_edge(i, j);
    detail::keep_colliders(p, out.base);
    for (VertexId a : p.adj(i) & p.adj(j)) {
        if (p.mark(i, a) == Mark::Arrow && p.mark(j, a) == Mark::Arrow) {
            orient_collider(out.base, i, a, j);
        } else if (p.mark(i, a) != Mark::Tail && p.mark(j, a) != Mark::Tail) {
            out.possible.push_back({a, i, j});
        }
    }
    return out;
}

inline std::vector<MoveProposal> delete_adjacency(const MixedGraph& p, const MixedGraph& rep, VertexId i, VertexId j, const MoveConfig& cfg = {},
                                                  MoveStats* stats = nullptr) {
    DeleteTriples t = uc_triples_delete(p, i, j);
    std::vector<MixedGraph> seeds{t.base};
    detail::for_each_sublist(t.possible, [&](const std::vector<UCTriple>& uc) {
        MixedGraph q = t.base;
        detail::orient_triples(q, uc);
        seeds.push_back(std::move(q));
    });
    detail::dedup_graphs(seeds);
    R4Oracle oracle = [&](const MixedGraph&, const DiscriminatingPath& path) {
        VertexId b = path.b(), c = path.c();
        // The smaller model's parametrizing set is contained in P's, so only absence is informative.
        if (!in_parametrizing_set(rep, VertexSet{path.d(), b, c})) return R4Decision::NonCollider;
        if (p.adjacent(b, c) && p.mark(c, b) == Mark::Tail) return R4Decision::NonCollider;
        return R4Decision::Branch;
    };
    return detail::drain(seeds, oracle, MoveKind::Delete, i, j, cfg, stats);
}

inline std::vector<UCTriple> unshielded_triples(const MixedGraph& p) {
    std::vector<UCTriple> out;
    for_each_unshielded_triple(p, [&](VertexId a, VertexId b, VertexId c) { out.push_back({b, a, c}); });
    return out;
}

/// Flips the collider status of at most t unshielded triples at a time; R4 always forks.
inline std::vector<MoveProposal> turning_moves(const MixedGraph& p, int t, const MoveConfig& cfg = {}, MoveStats* stats = nullptr) {
    if (t < 1) throw DomainError("turning needs t >= 1");
    std::vector<UCTriple> ut = unshielded_triples(p);
    auto seed_for = [&](const std::vector<std::size_t>& flip) {
        MixedGraph q = circle_skeleton(p);
        for (std::size_t k = 0; k < ut.size(); ++k) {
            const UCTriple& tr = ut[k];
            bool collider = p.mark(tr.end1, tr.centre) == Mark::Arrow && p.mark(tr.end2, tr.centre) == Mark::Arrow;
            if (std::find(flip.begin(), flip.end(), k) != flip.end()) collider = !collider;
            if (collider) orient_collider(q, tr.end1, tr.centre, tr.end2);
        }
        return q;
    };
    std::vector<MixedGraph> seeds{seed_for({})};
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t from) {
        for (std::size_t k = from; k < ut.size(); ++k) {
            pick.push_back(k);
            seeds.push_back(seed_for(pick));
            if (static_cast<int>(pick.size()) < t) choose(k + 1);
            pick.pop_back();
        }
    };
    choose(0);
    detail::dedup_graphs(seeds);
    R4Oracle always_branch = [](const MixedGraph&, const DiscriminatingPath&) { return R4Decision::Branch; };
    return detail::drain(seeds, always_branch, MoveKind::Turn, -1, -1, cfg, stats);
}

}  // namespace gesmag
