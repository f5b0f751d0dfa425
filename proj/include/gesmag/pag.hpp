#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gesmag/graph.hpp"
#include "gesmag/heads.hpp"

namespace gesmag {

/// Vertices <d, ..., a, b, c> of a discriminating path for b.
struct DiscriminatingPath {
    std::vector<VertexId> vertices;

    VertexId d() const { return vertices.front(); }
    VertexId a() const { return vertices[vertices.size() - 3]; }
    VertexId b() const { return vertices[vertices.size() - 2]; }
    VertexId c() const { return vertices.back(); }
    bool operator==(const DiscriminatingPath&) const = default;
};

enum class R4Decision { Collider, NonCollider, Branch };

/// Decides how a discriminating path is oriented when R4 fires on it.
using R4Oracle = std::function<R4Decision(const MixedGraph&, const DiscriminatingPath&)>;

struct RuleTraceEntry {
    std::string rule;
    VertexId u;
    VertexId v;
    Mark at_u;
    Mark at_v;
};

struct OrientationConfig {
    bool tails = false;
    std::size_t max_paths = 10000;
    std::vector<RuleTraceEntry>* trace = nullptr;
};

struct OrientationOutcome {
    std::optional<DiscriminatingPath> pending;  // set when the oracle asked for a branch
    bool path_cap_hit = false;
};

namespace detail {

inline bool is_parent(const MixedGraph& g, VertexId p, VertexId c) {
    return g.mark(p, c) == Mark::Arrow && g.mark(c, p) == Mark::Tail;
}

class RuleEngine {
public:
    RuleEngine(MixedGraph& g, const OrientationConfig& cfg) : g_(g), cfg_(cfg) {}

    bool cap_hit() const { return cap_hit_; }

    /// Sets the mark at v on the edge u-v, recording the change.
    bool put(VertexId u, VertexId v, Mark m, const char* rule) {
        if (g_.mark(u, v) == m) return false;
        g_.set_mark(u, v, m);
        if (cfg_.trace) cfg_.trace->push_back({rule, u, v, g_.mark(v, u), g_.mark(u, v)});
        return true;
    }

    bool r1() {
        bool changed = false;
        for (VertexId b = 0; b < g_.n(); ++b) {
            for (VertexId c : g_.near(b, Mark::Circle)) {
                for (VertexId a : g_.near(b, Mark::Arrow)) {
                    if (a == c || g_.adjacent(a, c) || g_.mark(c, b) != Mark::Circle) continue;
                    changed |= put(c, b, Mark::Tail, "R1");
                    changed |= put(b, c, Mark::Arrow, "R1");
                }
            }
        }
        return changed;
    }

    bool r2() {
        bool changed = false;
        for (VertexId c = 0; c < g_.n(); ++c) {
            for (VertexId a : g_.near(c, Mark::Circle)) {
                for (VertexId b : g_.adj(a) & g_.adj(c)) {
                    bool first = is_parent(g_, a, b) && g_.mark(b, c) == Mark::Arrow;
                    bool second = g_.mark(a, b) == Mark::Arrow && is_parent(g_, b, c);
                    if (first || second) {
                        changed |= put(a, c, Mark::Arrow, "R2");
                        break;
                    }
                }
            }
        }
        return changed;
    }

    bool r3() {
        bool changed = false;
        for (VertexId b = 0; b < g_.n(); ++b) {
            VertexSet into_b = g_.near(b, Mark::Arrow);
            for (VertexId d : g_.near(b, Mark::Circle)) {
                VertexSet cand = into_b & g_.near(d, Mark::Circle);
                bool fired = false;
                for (VertexId a : cand) {
                    for (VertexId c : cand) {
                        if (c <= a || g_.adjacent(a, c)) continue;
                        fired = true;
                        break;
                    }
                    if (fired) break;
                }
                if (fired) changed |= put(d, b, Mark::Arrow, "R3");
            }
        }
        return changed;
    }

    /// Calls f(path) for each discriminating path for b with endpoint c until f returns true.
    template <typename F>
    void discriminating_paths(VertexId b, VertexId c, F&& f) {
        if (!g_.adjacent(b, c)) return;
        std::vector<VertexId> rev{c, b};  // built from c backwards
        bool stop = false;
        std::function<void(VertexId, VertexSet)> extend = [&](VertexId cur, VertexSet on_path) {
            for (VertexId x : g_.near(cur, Mark::Arrow)) {
                if (stop) return;
                if (on_path.contains(x) || x == c) continue;
                if (!g_.adjacent(x, c)) {
                    if (++paths_seen_ > cfg_.max_paths) {
                        cap_hit_ = true;
                        stop = true;
                        return;
                    }
                    DiscriminatingPath p;
                    p.vertices.assign(rev.rbegin(), rev.rend());
                    p.vertices.insert(p.vertices.begin(), x);
                    if (f(p)) stop = true;
                } else if (is_parent(g_, x, c) && g_.mark(cur, x) == Mark::Arrow) {
                    rev.push_back(x);
                    extend(x, on_path.with(x));
                    rev.pop_back();
                }
            }
        };
        for (VertexId a : g_.adj(b)) {
            if (stop) break;
            if (a == c || !is_parent(g_, a, c) || g_.mark(b, a) != Mark::Arrow) continue;
            rev.push_back(a);
            extend(a, VertexSet{a, b, c});
            rev.pop_back();
        }
    }

    void reset_path_budget() { paths_seen_ = 0; }

    void apply_r4(const DiscriminatingPath& p, bool collider) {
        VertexId a = p.a(), b = p.b(), c = p.c();
        if (collider) {
            put(b, a, Mark::Arrow, "R4");
            put(a, b, Mark::Arrow, "R4");
            put(c, b, Mark::Arrow, "R4");
            put(b, c, Mark::Arrow, "R4");
        } else {
            put(c, b, Mark::Tail, "R4");
            put(b, c, Mark::Arrow, "R4");
        }
    }

    /// Fires R4 on the first eligible path. Returns the path when the oracle asks to branch.
    std::optional<DiscriminatingPath> r4(const R4Oracle& oracle, bool& changed) {
        changed = false;
        for (VertexId b = 0; b < g_.n(); ++b) {
            for (VertexId c : g_.near(b, Mark::Circle)) {
                std::optional<DiscriminatingPath> found;
                reset_path_budget();
                discriminating_paths(b, c, [&](const DiscriminatingPath& p) {
                    found = p;
                    return true;
                });
                if (!found) continue;
                R4Decision d = oracle(g_, *found);
                if (d == R4Decision::Branch) return found;
                apply_r4(*found, d == R4Decision::Collider);
                changed = true;
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    bool r5() {
        bool changed = false;
        for (VertexId a = 0; a < g_.n(); ++a) {
            for (VertexId b : circle_circle(a)) {
                if (b < a || g_.mark(a, b) != Mark::Circle || g_.mark(b, a) != Mark::Circle) continue;
                std::vector<VertexId> path{a};
                bool found = false;
                std::function<void(VertexId, VertexSet)> dfs = [&](VertexId cur, VertexSet on_path) {
                    for (VertexId x : circle_circle(cur)) {
                        if (found) return;
                        if (on_path.contains(x)) continue;
                        VertexId prev = path.size() >= 2 ? path[path.size() - 2] : -1;
                        if (prev >= 0 && g_.adjacent(prev, x)) continue;
                        if (x == b) {
                            // <a, c, ..., d, b>: a,d and b,c nonadjacent, at least two inner vertices
                            if (path.size() < 3 || g_.adjacent(a, cur) || g_.adjacent(b, path[1])) continue;
                            path.push_back(b);
                            found = true;
                            return;
                        }
                        if (path.size() == 1 && g_.adjacent(x, b)) continue;
                        path.push_back(x);
                        dfs(x, on_path.with(x));
                        if (found) return;
                        path.pop_back();
                    }
                };
                dfs(a, VertexSet::single(a));
                if (!found) continue;
                changed |= put(a, b, Mark::Tail, "R5");
                changed |= put(b, a, Mark::Tail, "R5");
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    changed |= put(path[i], path[i + 1], Mark::Tail, "R5");
                    changed |= put(path[i + 1], path[i], Mark::Tail, "R5");
                }
            }
        }
        return changed;
    }

    bool r6() {
        bool changed = false;
        for (VertexId b = 0; b < g_.n(); ++b) {
            if (g_.undirected_neighbors(b).empty()) continue;
            for (VertexId c : g_.near(b, Mark::Circle)) changed |= put(c, b, Mark::Tail, "R6");
        }
        return changed;
    }

    bool r7() {
        bool changed = false;
        for (VertexId b = 0; b < g_.n(); ++b) {
            // a -o b: tail at a, circle at b
            VertexSet tails_in = g_.near(b, Mark::Circle) & g_.far(b, Mark::Tail);
            for (VertexId c : g_.near(b, Mark::Circle)) {
                for (VertexId a : tails_in) {
                    if (a == c || g_.adjacent(a, c)) continue;
                    changed |= put(c, b, Mark::Tail, "R7");
                    break;
                }
            }
        }
        return changed;
    }

    bool r8() {
        bool changed = false;
        for (VertexId c = 0; c < g_.n(); ++c) {
            // a o-> c
            VertexSet cands = g_.near(c, Mark::Arrow) & g_.far(c, Mark::Circle);
            for (VertexId a : cands) {
                for (VertexId b : g_.adj(a) & g_.parents(c)) {
                    bool via = g_.mark(b, a) == Mark::Tail && (g_.mark(a, b) == Mark::Arrow || g_.mark(a, b) == Mark::Circle);
                    if (via) {
                        changed |= put(c, a, Mark::Tail, "R8");
                        break;
                    }
                }
            }
        }
        return changed;
    }

    bool r9() {
        bool changed = false;
        for (VertexId c = 0; c < g_.n(); ++c) {
            VertexSet cands = g_.near(c, Mark::Arrow) & g_.far(c, Mark::Circle);
            for (VertexId a : cands) {
                bool found = false;
                for (VertexId b : g_.adj(a)) {
                    if (found) break;
                    if (b == c || g_.adjacent(b, c) || !potentially_directed(a, b)) continue;
                    found = uncovered_pd_reaches(a, b, c, VertexSet{a, b});
                }
                if (found) changed |= put(c, a, Mark::Tail, "R9");
            }
        }
        return changed;
    }

    bool r10() {
        bool changed = false;
        for (VertexId c = 0; c < g_.n(); ++c) {
            VertexSet cands = g_.near(c, Mark::Arrow) & g_.far(c, Mark::Circle);
            VertexSet pa = g_.parents(c);
            if (pa.size() < 2) continue;
            for (VertexId a : cands) {
                // first[x] = parents of c reachable from a by an uncovered p.d. path starting a -> x
                std::vector<std::pair<VertexId, VertexSet>> first;
                for (VertexId x : g_.adj(a)) {
                    if (x == c || !potentially_directed(a, x)) continue;
                    VertexSet reach;
                    for (VertexId t : pa.without(a)) {
                        if (t == x || uncovered_pd_reaches(a, x, t, VertexSet{a, x, c})) reach.insert(t);
                    }
                    if (!reach.empty()) first.push_back({x, reach});
                }
                bool fired = false;
                for (std::size_t i = 0; i < first.size() && !fired; ++i) {
                    for (std::size_t j = 0; j < first.size() && !fired; ++j) {
                        auto [x, rx] = first[i];
                        auto [y, ry] = first[j];
                        if (x == y || g_.adjacent(x, y)) continue;
                        for (VertexId b : rx) {
                            if (!(ry.without(b)).empty()) {
                                fired = true;
                                break;
                            }
                        }
                    }
                }
                if (fired) changed |= put(c, a, Mark::Tail, "R10");
            }
        }
        return changed;
    }

private:
    VertexSet circle_circle(VertexId v) const { return g_.near(v, Mark::Circle) & g_.far(v, Mark::Circle); }

    /// Edge u-w can be read as directed from u to w: no arrowhead at u and no tail at w.
    bool potentially_directed(VertexId u, VertexId w) const {
        return g_.mark(w, u) != Mark::Arrow && g_.mark(u, w) != Mark::Tail;
    }

    /// Whether the uncovered p.d. path prev -> cur can be extended to `target` without revisiting.
    bool uncovered_pd_reaches(VertexId prev, VertexId cur, VertexId target, VertexSet on_path) {
        std::size_t budget = cfg_.max_paths;
        std::function<bool(VertexId, VertexId, VertexSet)> dfs = [&](VertexId p, VertexId u, VertexSet seen) {
            for (VertexId x : g_.adj(u)) {
                if (budget == 0) {
                    cap_hit_ = true;
                    return false;
                }
                if (seen.contains(x) || g_.adjacent(p, x) || !potentially_directed(u, x)) continue;
                --budget;
                if (x == target) return true;
                if (dfs(u, x, seen.with(x))) return true;
            }
            return false;
        };
        return dfs(prev, cur, on_path.without(target));
    }

    MixedGraph& g_;
    const OrientationConfig& cfg_;
    std::size_t paths_seen_ = 0;
    bool cap_hit_ = false;
};

}  // namespace detail

/// Orients the unshielded triple (a, b, c) as a collider a *-> b <-* c.
inline void orient_collider(MixedGraph& p, VertexId a, VertexId b, VertexId c) {
    p.set_mark(a, b, Mark::Arrow);
    p.set_mark(c, b, Mark::Arrow);
}

/// Runs R1-R4 to a fixpoint (then R1-R10 when tails are requested). R1-R3 are exhausted
/// before each R4 application; a Branch decision stops with the path pending.
inline OrientationOutcome apply_rules(MixedGraph& p, const R4Oracle& oracle, const OrientationConfig& cfg = {}) {
    detail::RuleEngine eng(p, cfg);
    OrientationOutcome out;
    auto arrow_phase = [&]() -> bool {
        for (;;) {
            while (eng.r1() | eng.r2() | eng.r3()) {
            }
            bool changed = false;
            out.pending = eng.r4(oracle, changed);
            if (out.pending) return false;
            if (!changed) return true;
        }
    };
    if (!arrow_phase()) {
        out.path_cap_hit = eng.cap_hit();
        return out;
    }
    if (cfg.tails) {
        for (;;) {
            bool changed = eng.r5() | eng.r6() | eng.r7() | eng.r8() | eng.r9() | eng.r10();
            if (!changed) break;
            if (!arrow_phase()) break;
        }
    }
    out.path_cap_hit = eng.cap_hit();
    return out;
}

/// Resolves a pending R4 path: a <-> b <-> c when `collider`, otherwise b -> c.
inline void resolve_r4(MixedGraph& p, const DiscriminatingPath& path, bool collider, std::vector<RuleTraceEntry>* trace = nullptr) {
    OrientationConfig cfg;
    cfg.trace = trace;
    detail::RuleEngine eng(p, cfg);
    eng.apply_r4(path, collider);
}

inline std::vector<DiscriminatingPath> find_discriminating_paths(const MixedGraph& p, VertexId b, VertexId c, std::size_t max_paths = 10000) {
    MixedGraph copy = p;
    OrientationConfig cfg;
    cfg.max_paths = max_paths;
    detail::RuleEngine eng(copy, cfg);
    std::vector<DiscriminatingPath> out;
    eng.discriminating_paths(b, c, [&](const DiscriminatingPath& path) {
        out.push_back(path);
        return false;
    });
    return out;
}

/// Number of discriminating paths over all ordered adjacent pairs (b, c), whatever the mark at b.
inline std::size_t count_discriminating_paths(const MixedGraph& p, std::size_t max_paths = 10000) {
    std::size_t total = 0;
    for (VertexId b = 0; b < p.n(); ++b) {
        for (VertexId c : p.adj(b)) total += find_discriminating_paths(p, b, c, max_paths).size();
    }
    return total;
}

/// Same skeleton as g with every mark a circle.
inline MixedGraph circle_skeleton(const MixedGraph& g) {
    MixedGraph p(g.n(), GraphKind::Pmg);
    for (const Edge& e : g.edges()) p.set_edge(e.a, e.b, Mark::Circle, Mark::Circle);
    return p;
}

/// Calls f(a, b, c) for each unshielded triple with a < c.
template <typename F>
void for_each_unshielded_triple(const MixedGraph& g, F&& f) {
    for (VertexId b = 0; b < g.n(); ++b) {
        VertexSet nb = g.adj(b);
        for (VertexId a : nb) {
            for (VertexId c : nb) {
                if (c > a && !g.adjacent(a, c)) f(a, b, c);
            }
        }
    }
}

inline MixedGraph mag_to_pag(const MixedGraph& g, bool tails, std::vector<RuleTraceEntry>* trace = nullptr) {
    if (!is_mag(g)) throw DomainError("mag_to_pag needs a maximal ancestral graph");
    MixedGraph p = circle_skeleton(g);
    for_each_unshielded_triple(g, [&](VertexId a, VertexId b, VertexId c) {
        if (is_collider(g, a, b, c)) orient_collider(p, a, b, c);
    });
    R4Oracle oracle = [&g](const MixedGraph&, const DiscriminatingPath& path) {
        return g.mark(path.c(), path.b()) == Mark::Tail ? R4Decision::NonCollider : R4Decision::Collider;
    };
    OrientationConfig cfg;
    cfg.tails = tails;
    cfg.trace = trace;
    apply_rules(p, oracle, cfg);
    p.set_kind(GraphKind::Pag);
    return p;
}

/// PAG from a parametrizing set (full or the size-3 restriction). Adjacencies are the size-2
/// members; unshielded triples in `s` become colliders and R4 consults membership of {d, b, c}.
inline MixedGraph pag_from_parametrizing_set(int n, const ParametrizingSet& s, bool tails = true, bool one_adjacency_shortcut = false,
                                             std::vector<RuleTraceEntry>* trace = nullptr) {
    MixedGraph p(n, GraphKind::Pmg);
    for (VertexSet w : s.sorted()) {
        if (w.size() == 2) p.set_edge(w.min(), w.max(), Mark::Circle, Mark::Circle);
    }
    for_each_unshielded_triple(p, [&](VertexId a, VertexId b, VertexId c) {
        if (s.contains(VertexSet{a, b, c})) orient_collider(p, a, b, c);
    });
    if (one_adjacency_shortcut) {
        for (VertexSet w : s.sorted()) {
            if (w.size() != 3 || count_adjacencies(p, w) != 1) continue;
            for (VertexId x : w) {
                for (VertexId y : w) {
                    if (x < y && p.adjacent(x, y)) p.set_edge(x, y, Mark::Arrow, Mark::Arrow);
                }
            }
        }
    }
    R4Oracle oracle = [&s](const MixedGraph&, const DiscriminatingPath& path) {
        return s.contains(VertexSet{path.d(), path.b(), path.c()}) ? R4Decision::Collider : R4Decision::NonCollider;
    };
    OrientationConfig cfg;
    cfg.tails = tails;
    cfg.trace = trace;
    apply_rules(p, oracle, cfg);
    p.set_kind(GraphKind::Pag);
    return p;
}

namespace detail {

/// Maximum cardinality search over `comp` using edges in `nbr`; ties go to the smallest index.
inline std::vector<VertexId> mcs_order(VertexSet comp, const std::vector<VertexSet>& nbr) {
    std::vector<VertexId> order;
    VertexSet done;
    while (done != comp) {
        VertexId best = -1;
        int best_w = -1;
        for (VertexId v : comp - done) {
            int w = (nbr[v] & done).size();
            if (w > best_w) {
                best = v;
                best_w = w;
            }
        }
        order.push_back(best);
        done.insert(best);
    }
    return order;
}

inline bool creates_unshielded_collider(const MixedGraph& g, const std::vector<std::pair<VertexId, VertexId>>& oriented) {
    for (const auto& [u, v] : oriented) {
        for (VertexId w : g.parents(v)) {
            if (w != u && !g.adjacent(u, w)) return true;
        }
    }
    return false;
}

}  // namespace detail

/// A representative MAG of the class described by an arrow-complete PAG. Throws InvalidMec
/// when no MAG is produced.
inline MixedGraph pag_to_mag(const MixedGraph& p) {
    MixedGraph g = p;
    std::vector<VertexSet> cc(static_cast<std::size_t>(p.n()));
    for (const Edge& e : p.edges()) {
        if (e.at_a == Mark::Circle && e.at_b == Mark::Circle) {
            cc[e.a].insert(e.b);
            cc[e.b].insert(e.a);
        } else if (e.at_a == Mark::Circle) {
            g.set_mark(e.b, e.a, Mark::Tail);
        } else if (e.at_b == Mark::Circle) {
            g.set_mark(e.a, e.b, Mark::Tail);
        }
    }
    VertexSet left;
    for (VertexId v = 0; v < p.n(); ++v) {
        if (!cc[v].empty()) left.insert(v);
    }
    while (!left.empty()) {
        VertexSet comp = closure(VertexSet::single(left.min()), left, [&](VertexId v) { return cc[v]; });
        left = left - comp;
        std::vector<VertexId> order = detail::mcs_order(comp, cc);
        std::vector<int> pos(static_cast<std::size_t>(p.n()), -1);
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
        std::vector<std::pair<VertexId, VertexId>> edges;
        for (VertexId u : comp) {
            for (VertexId v : cc[u]) {
                if (pos[u] < pos[v]) edges.push_back({u, v});
            }
        }
        for (const auto& [u, v] : edges) g.add_directed(u, v);
        if (!detail::creates_unshielded_collider(g, edges) && is_acyclic(g)) continue;
        // Backtrack over orientations of this component's edges.
        const std::size_t m = edges.size();
        if (m > 20) throw InvalidMec("circle component too large to orient");
        bool ok = false;
        for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << m) && !ok; ++bits) {
            std::vector<std::pair<VertexId, VertexId>> trial;
            for (std::size_t i = 0; i < m; ++i) {
                auto [u, v] = edges[i];
                if ((bits >> i) & 1U) std::swap(u, v);
                g.add_directed(u, v);
                trial.push_back({u, v});
            }
            ok = !detail::creates_unshielded_collider(g, trial) && is_acyclic(g);
        }
        if (!ok) throw InvalidMec("circle component admits no orientation without new unshielded colliders");
    }
    g.set_kind(GraphKind::Mag);
    if (!is_acyclic(g) || !is_ancestral(g) || !is_maximal(g)) throw InvalidMec("orientation is not a maximal ancestral graph");
    return g;
}

/// Whether an arrow-complete PAG describes a real class: its representative MAG orients back to it.
inline std::optional<MixedGraph> validated_representative(const MixedGraph& p) {
    try {
        MixedGraph g = pag_to_mag(p);
        if (!mag_to_pag(g, false).same_marks(p)) return std::nullopt;
        return g;
    } catch (const InvalidMec&) {
        return std::nullopt;
    }
}

}  // namespace gesmag
