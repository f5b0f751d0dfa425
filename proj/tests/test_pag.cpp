#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "gesmag/graph_io.hpp"
#include "gesmag/pag.hpp"
#include "test_util.hpp"

using namespace gesmag;
using testutil::from_one_based;
using testutil::one_based;

namespace {

const R4Oracle kNeverCalled = [](const MixedGraph&, const DiscriminatingPath&) -> R4Decision {
    ADD_FAILURE() << "R4 oracle consulted unexpectedly";
    return R4Decision::Collider;
};

MixedGraph pmg(int n, std::initializer_list<testutil::E> edges) {
    MixedGraph g = from_one_based(n, edges);
    g.set_kind(GraphKind::Pmg);
    return g;
}

Mark at(const MixedGraph& g, int u1, int v1) { return g.mark(u1 - 1, v1 - 1); }  // mark at v on u-v, 1-based

ParametrizingSet eight_vertex_pset() {
    ParametrizingSet s;
    for (auto w : {one_based({1, 2}), one_based({1, 3}), one_based({2, 4}), one_based({3, 4}), one_based({2, 5}), one_based({5, 6}),
                   one_based({5, 7}), one_based({6, 7}), one_based({6, 8}), one_based({7, 8}), one_based({2, 5, 6}), one_based({5, 6, 8}),
                   one_based({5, 7, 8}), one_based({2, 7, 8})}) {
        s.insert(w);
    }
    return s;
}

MixedGraph eight_vertex_mag() {
    MixedGraph g = from_one_based(8, {{1, "--", 2}, {1, "--", 3}, {3, "--", 4}, {2, "--", 4}, {2, "->", 5}, {5, "<->", 6}, {6, "->", 7},
                                      {6, "<->", 8}, {7, "<->", 8}, {5, "->", 7}});
    return g;
}

// Every discriminating path by brute force over simple paths ending in (b, c).
std::size_t oracle_count_discriminating(const MixedGraph& g) {
    std::size_t total = 0;
    auto parent = [&](VertexId p, VertexId c) { return g.mark(p, c) == Mark::Arrow && g.mark(c, p) == Mark::Tail; };
    std::vector<VertexId> path;
    std::function<void(VertexSet)> dfs = [&](VertexSet seen) {
        // path holds c, b, a, ... reversed
        if (path.size() >= 4) {
            VertexId c = path[0], d = path.back();
            bool ok = !g.adjacent(d, c);
            for (std::size_t i = 2; ok && i + 1 < path.size(); ++i) {
                VertexId v = path[i];
                ok = g.mark(path[i - 1], v) == Mark::Arrow && g.mark(path[i + 1], v) == Mark::Arrow && parent(v, c);
            }
            if (ok) ++total;
        }
        for (VertexId x : g.adj(path.back())) {
            if (seen.contains(x)) continue;
            path.push_back(x);
            dfs(seen.with(x));
            path.pop_back();
        }
    };
    for (VertexId c = 0; c < g.n(); ++c) {
        path = {c};
        dfs(VertexSet::single(c));
    }
    return total;
}

MixedGraph relabel(const MixedGraph& g, const std::vector<VertexId>& perm) {
    MixedGraph out(g.n(), g.kind());
    for (const Edge& e : g.edges()) out.set_edge(perm[e.a], perm[e.b], e.at_a, e.at_b);
    return out;
}

}  // namespace

TEST(Rules, R1) {
    MixedGraph p = pmg(3, {{1, "o->", 2}, {2, "o-o", 3}});
    apply_rules(p, kNeverCalled);
    EXPECT_EQ(at(p, 3, 2), Mark::Tail);
    EXPECT_EQ(at(p, 2, 3), Mark::Arrow);
}

TEST(Rules, R2) {
    MixedGraph p = pmg(3, {{1, "->", 2}, {2, "<->", 3}, {1, "o-o", 3}});
    apply_rules(p, kNeverCalled);
    EXPECT_EQ(at(p, 1, 3), Mark::Arrow);
    EXPECT_EQ(at(p, 3, 1), Mark::Circle);
}

TEST(Rules, R3) {
    MixedGraph p = pmg(4, {{1, "o->", 2}, {3, "o->", 2}, {1, "o-o", 4}, {4, "o-o", 3}, {4, "o-o", 2}});
    apply_rules(p, kNeverCalled);
    EXPECT_EQ(at(p, 4, 2), Mark::Arrow);
    EXPECT_EQ(at(p, 2, 4), Mark::Circle);
}

TEST(Rules, R4UsesOracleAndBranches) {
    // <1,2,3,4> discriminates 3: 2 is a collider on the path and a parent of 4.
    MixedGraph base = pmg(4, {{1, "->", 2}, {2, "<->", 3}, {2, "->", 4}, {3, "o-o", 4}});
    std::vector<DiscriminatingPath> seen;
    MixedGraph p = base;
    auto out = apply_rules(p, [&](const MixedGraph&, const DiscriminatingPath& d) {
        seen.push_back(d);
        return R4Decision::Branch;
    });
    ASSERT_TRUE(out.pending.has_value());
    EXPECT_EQ(out.pending->vertices, (std::vector<VertexId>{0, 1, 2, 3}));
    MixedGraph col = p, non = p;
    resolve_r4(col, *out.pending, true);
    resolve_r4(non, *out.pending, false);
    EXPECT_EQ(at(col, 3, 4), Mark::Arrow);
    EXPECT_EQ(at(col, 4, 3), Mark::Arrow);
    EXPECT_EQ(at(non, 4, 3), Mark::Tail);
    EXPECT_EQ(at(non, 3, 4), Mark::Arrow);
}

TEST(Rules, R5OrientsUncoveredCircleCycle) {
    MixedGraph p = pmg(4, {{1, "o-o", 2}, {2, "o-o", 4}, {4, "o-o", 3}, {3, "o-o", 1}});
    OrientationConfig cfg;
    cfg.tails = true;
    apply_rules(p, kNeverCalled, cfg);
    for (const Edge& e : p.edges()) {
        EXPECT_EQ(e.at_a, Mark::Tail);
        EXPECT_EQ(e.at_b, Mark::Tail);
    }
}

TEST(Rules, R6AndR7) {
    OrientationConfig cfg;
    cfg.tails = true;
    MixedGraph p6 = pmg(3, {{1, "--", 2}, {2, "o-o", 3}, {1, "o-o", 3}});
    apply_rules(p6, kNeverCalled, cfg);
    EXPECT_EQ(at(p6, 3, 2), Mark::Tail);
    MixedGraph p7 = pmg(3, {{1, "o--", 2}, {2, "o-o", 3}});
    // o-- puts the circle at 1; flip it so that the tail sits at 1 and the circle at 2.
    p7.set_edge(0, 1, Mark::Tail, Mark::Circle);
    apply_rules(p7, kNeverCalled, cfg);
    EXPECT_EQ(at(p7, 3, 2), Mark::Tail);
}

TEST(Rules, R8) {
    OrientationConfig cfg;
    cfg.tails = true;
    MixedGraph p = pmg(3, {{1, "->", 2}, {2, "->", 3}, {1, "o->", 3}});
    apply_rules(p, kNeverCalled, cfg);
    EXPECT_EQ(at(p, 3, 1), Mark::Tail);
}

TEST(Rules, R9) {
    OrientationConfig cfg;
    cfg.tails = true;
    MixedGraph p = pmg(4, {{1, "o->", 4}, {1, "o-o", 2}, {2, "o-o", 3}, {3, "o->", 4}});
    apply_rules(p, kNeverCalled, cfg);
    EXPECT_EQ(at(p, 4, 1), Mark::Tail);
    EXPECT_EQ(at(p, 4, 3), Mark::Tail);
    EXPECT_EQ(at(p, 1, 2), Mark::Circle);
}

TEST(Rules, R10) {
    OrientationConfig cfg;
    cfg.tails = true;
    MixedGraph p = pmg(4, {{1, "o->", 4}, {2, "->", 4}, {3, "->", 4}, {1, "o-o", 2}, {1, "o-o", 3}});
    apply_rules(p, kNeverCalled, cfg);
    EXPECT_EQ(at(p, 4, 1), Mark::Tail);
    MixedGraph q = pmg(4, {{1, "o->", 4}, {2, "->", 4}, {3, "->", 4}, {1, "o-o", 2}, {1, "o-o", 3}, {2, "<->", 3}});
    apply_rules(q, kNeverCalled, cfg);
    EXPECT_EQ(at(q, 4, 1), Mark::Circle);  // 2 and 3 adjacent: R10 does not apply
}

TEST(MagToPag, SmallExamples) {
    MixedGraph chain = from_one_based(3, {{1, "->", 2}, {2, "->", 3}});
    MixedGraph p = mag_to_pag(chain, true);
    EXPECT_EQ(p.kind(), GraphKind::Pag);
    for (const Edge& e : p.edges()) EXPECT_EQ(std::pair(e.at_a, e.at_b), std::pair(Mark::Circle, Mark::Circle));
    MixedGraph col = from_one_based(3, {{1, "->", 2}, {3, "->", 2}});
    MixedGraph q = mag_to_pag(col, true);
    EXPECT_EQ(to_text(q), to_text(pmg(3, {{1, "o->", 2}, {3, "o->", 2}})));
    MixedGraph not_mag = from_one_based(3, {{1, "->", 2}, {2, "->", 3}, {1, "<->", 3}});
    EXPECT_THROW(mag_to_pag(not_mag, false), DomainError);
}

TEST(MagToPag, EightVertexMagIsItsOwnPag) {
    MixedGraph g = eight_vertex_mag();
    ASSERT_TRUE(is_mag(g));
    std::vector<RuleTraceEntry> trace;
    MixedGraph p = mag_to_pag(g, true, &trace);
    EXPECT_TRUE(p.same_marks(g)) << to_text(p);
    EXPECT_FALSE(trace.empty());
}

TEST(PagFromParametrizingSet, RestrictedSetGivesEightVertexPag) {
    for (bool shortcut : {false, true}) {
        MixedGraph p = pag_from_parametrizing_set(8, eight_vertex_pset(), true, shortcut);
        EXPECT_TRUE(p.same_marks(eight_vertex_mag())) << to_text(p);
        EXPECT_FALSE(p.has_circles());
        MixedGraph m = pag_to_mag(p);
        EXPECT_TRUE(m.same_marks(eight_vertex_mag()));
    }
}

TEST(PagFromParametrizingSet, RestrictedSetArrowPhase) {
    MixedGraph p = pag_from_parametrizing_set(8, eight_vertex_pset(), false);
    MixedGraph expected = pmg(8, {{1, "o-o", 2}, {1, "o-o", 3}, {3, "o-o", 4}, {2, "o-o", 4}, {2, "o->", 5}, {5, "<->", 6}, {6, "->", 7},
                                  {6, "<->", 8}, {7, "<->", 8}, {5, "->", 7}});
    EXPECT_TRUE(p.same_marks(expected)) << to_text(p);
    // The chordless circle cycle admits no MAG without undirected edges.
    EXPECT_THROW(pag_to_mag(p), InvalidMec);
}

TEST(PagFromParametrizingSet, EdgelessAndTraced) {
    ParametrizingSet s;
    for (int v = 0; v < 4; ++v) s.insert({v});
    EXPECT_EQ(pag_from_parametrizing_set(4, s).edge_count(), 0);
}

TEST(PagFromParametrizingSet, MatchesMagToPagOnRandomMags) {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 300; ++rep) {
        int n = 3 + rep % 5;
        MixedGraph g = testutil::random_mag(rng, n, 0.45, 0.5);
        MixedGraph expected = mag_to_pag(g, true);
        ASSERT_TRUE(pag_from_parametrizing_set(n, tilde_s3(g), true).same_marks(expected)) << to_text(g);
        ASSERT_TRUE(pag_from_parametrizing_set(n, parametrizing_set(g), true).same_marks(expected)) << to_text(g);
        ASSERT_TRUE(pag_from_parametrizing_set(n, tilde_s3(g), true, true).same_marks(expected)) << to_text(g);
    }
}

TEST(DiscriminatingPaths, EightVertexMag) {
    MixedGraph g = eight_vertex_mag();
    EXPECT_EQ(count_discriminating_paths(g), 2u);
    auto p67 = find_discriminating_paths(g, 5, 6);
    ASSERT_EQ(p67.size(), 1u);
    EXPECT_EQ(p67[0].vertices, (std::vector<VertexId>{1, 4, 5, 6}));
    auto p87 = find_discriminating_paths(g, 7, 6);
    ASSERT_EQ(p87.size(), 1u);
    EXPECT_EQ(p87[0].vertices, (std::vector<VertexId>{1, 4, 5, 7, 6}));
    EXPECT_EQ(count_discriminating_paths(MixedGraph(5)), 0u);
}

TEST(DiscriminatingPaths, MatchBruteForce) {
    std::mt19937_64 rng(32);
    std::size_t nonzero = 0;
    for (int rep = 0; rep < 300; ++rep) {
        MixedGraph g = testutil::random_mag(rng, 4 + rep % 5, 0.5, 0.5);
        std::size_t want = oracle_count_discriminating(g);
        ASSERT_EQ(count_discriminating_paths(g), want) << to_text(g);
        nonzero += want > 0;
    }
    EXPECT_GT(nonzero, 20u);
}

TEST(PagToMag, Examples) {
    MixedGraph chain = pmg(3, {{1, "o-o", 2}, {2, "o-o", 3}});
    MixedGraph m = pag_to_mag(chain);
    EXPECT_EQ(to_text(m), to_text(from_one_based(3, {{1, "->", 2}, {2, "->", 3}})));
    MixedGraph oriented = from_one_based(3, {{1, "->", 2}, {3, "<->", 2}});
    EXPECT_TRUE(pag_to_mag(oriented).same_marks(oriented));
}

TEST(PagToMag, RoundTripOnRandomMags) {
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 500; ++rep) {
        int n = 2 + rep % 7;
        MixedGraph g = testutil::random_mag(rng, n, 0.5, 0.5);
        MixedGraph arrow = mag_to_pag(g, false);
        MixedGraph full = mag_to_pag(g, true);
        MixedGraph m1 = pag_to_mag(arrow);
        ASSERT_TRUE(markov_equivalent(m1, g)) << to_text(g);
        ASSERT_TRUE(pag_to_mag(full).same_marks(m1)) << to_text(g);
        ASSERT_TRUE(mag_to_pag(m1, false).same_marks(arrow));
        ASSERT_TRUE(validated_representative(arrow).has_value());
    }
}

TEST(MagToPag, EquivalentMagsShareAPag) {
    std::mt19937_64 rng(34);
    int pairs = 0;
    for (int batch = 0; batch < 30; ++batch) {
        std::vector<MixedGraph> gs;
        for (int k = 0; k < 20; ++k) gs.push_back(testutil::random_mag(rng, 4, 0.6, 0.5));
        for (std::size_t i = 0; i < gs.size(); ++i) {
            for (std::size_t j = i + 1; j < gs.size(); ++j) {
                bool eq = markov_equivalent(gs[i], gs[j]);
                EXPECT_EQ(mag_to_pag(gs[i], false).same_marks(mag_to_pag(gs[j], false)), eq);
                EXPECT_EQ(mag_to_pag(gs[i], true).same_marks(mag_to_pag(gs[j], true)), eq);
                pairs += eq;
            }
        }
    }
    EXPECT_GT(pairs, 30);
}

// Relabelling vertices changes the order in which rules meet their triples.
TEST(MagToPag, FixpointIndependentOfVertexOrder) {
    std::mt19937_64 rng(35);
    for (int rep = 0; rep < 200; ++rep) {
        int n = 4 + rep % 4;
        MixedGraph g = testutil::random_mag(rng, n, 0.5, 0.5);
        std::vector<VertexId> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (bool tails : {false, true}) {
            MixedGraph direct = relabel(mag_to_pag(g, tails), perm);
            MixedGraph via = mag_to_pag(relabel(g, perm), tails);
            ASSERT_TRUE(direct.same_marks(via)) << to_text(g);
        }
    }
}
