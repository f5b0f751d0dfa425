#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gesmag/graph_io.hpp"
#include "gesmag/moves.hpp"
#include "test_util.hpp"

using namespace gesmag;
using testutil::from_one_based;
using testutil::one_based;

namespace {

MixedGraph six_vertex_pag() {
    MixedGraph p = from_one_based(6, {{1, "o->", 2}, {2, "<->", 3}, {3, "<->", 4}, {4, "<->", 5}, {6, "o->", 5}});
    p.set_kind(GraphKind::Pag);
    return p;
}

std::set<VertexSet> triple_sets(const std::vector<UCTriple>& ts) {
    std::set<VertexSet> out;
    for (const auto& t : ts) out.insert(t.vertices());
    return out;
}

std::set<VertexSet> colliders_of(const MixedGraph& p) {
    std::set<VertexSet> out;
    for_each_unshielded_triple(p, [&](VertexId a, VertexId b, VertexId c) {
        if (p.mark(a, b) == Mark::Arrow && p.mark(c, b) == Mark::Arrow) out.insert(VertexSet{a, b, c});
    });
    return out;
}

bool same_skeleton_plus(const MixedGraph& base, const MixedGraph& q, VertexId i, VertexId j, bool added) {
    for (VertexId u = 0; u < base.n(); ++u) {
        for (VertexId v = u + 1; v < base.n(); ++v) {
            bool want = base.adjacent(u, v);
            if ((u == i && v == j) || (u == j && v == i)) want = added;
            if (q.adjacent(u, v) != want) return false;
        }
    }
    return true;
}

/// All MEC PAGs among MAGs with the skeleton of g, by trying every orientation.
std::set<std::vector<Mark>> all_mecs_with_skeleton(const MixedGraph& g) {
    auto edges = g.edges();
    std::set<std::vector<Mark>> out;
    std::size_t total = 1;
    for (std::size_t k = 0; k < edges.size(); ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        MixedGraph h(g.n());
        std::size_t c = code;
        for (const Edge& e : edges) {
            switch (c % 3) {
                case 0: h.add_directed(e.a, e.b); break;
                case 1: h.add_directed(e.b, e.a); break;
                default: h.add_bidirected(e.a, e.b);
            }
            c /= 3;
        }
        if (is_acyclic(h) && is_mag(h)) out.insert(mag_to_pag(h, false).raw_marks());
    }
    return out;
}

}  // namespace

TEST(AddMove, SixVertexTripleClassification) {
    MixedGraph p = six_vertex_pag();
    AddTriples t = uc_triples_add(p, 1, 4);
    EXPECT_EQ(triple_sets(t.definite_i), (std::set<VertexSet>{one_based({1, 2, 5}), one_based({2, 3, 5})}));
    EXPECT_EQ(triple_sets(t.definite_j), (std::set<VertexSet>{one_based({2, 5, 6}), one_based({2, 4, 5})}));
    EXPECT_TRUE(t.possible_i.empty());
    EXPECT_TRUE(t.possible_j.empty());
    // The base keeps P's four colliders, which stay unshielded after adding {2,5}.
    EXPECT_EQ(colliders_of(t.base), (std::set<VertexSet>{one_based({1, 2, 3}), one_based({2, 3, 4}), one_based({3, 4, 5}), one_based({4, 5, 6})}));
}

TEST(AddMove, SixVertexFourCases) {
    MixedGraph p = six_vertex_pag();
    std::vector<MixedGraph> seeds = add_seeds(uc_triples_add(p, 1, 4));
    ASSERT_EQ(seeds.size(), 4u);
    std::set<VertexSet> d2{one_based({1, 2, 5}), one_based({2, 3, 5})};
    std::set<VertexSet> d5{one_based({2, 5, 6}), one_based({2, 4, 5})};
    std::set<VertexSet> both = d2;
    both.insert(d5.begin(), d5.end());
    auto added = [&](const MixedGraph& s) {
        std::set<VertexSet> out;
        for (VertexSet c : colliders_of(s)) {
            if (c.contains(1) && c.contains(4)) out.insert(c);
        }
        return out;
    };
    EXPECT_EQ(added(seeds[0]), std::set<VertexSet>{});
    EXPECT_EQ(added(seeds[1]), d2);
    EXPECT_EQ(added(seeds[2]), d5);
    EXPECT_EQ(added(seeds[3]), both);
    MoveStats stats;
    auto out = add_adjacency(p, pag_to_mag(p), 1, 4, {}, &stats);
    EXPECT_GE(out.size(), 1u);
    EXPECT_LE(out.size(), 4u);
    for (const auto& pr : out) {
        EXPECT_TRUE(pr.pag.adjacent(1, 4));
        EXPECT_TRUE(same_skeleton_plus(p, pr.pag, 1, 4, true));
    }
}

TEST(AddMove, IsolatedPairGivesOneClass) {
    MixedGraph p(2, GraphKind::Pag);
    auto out = add_adjacency(p, MixedGraph(2), 0, 1);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].pag.mark(0, 1), Mark::Circle);
    EXPECT_EQ(out[0].pag.mark(1, 0), Mark::Circle);
    EXPECT_THROW(add_adjacency(out[0].pag, out[0].mag, 0, 1), DomainError);
}

TEST(AddMove, PossibleTripleFromCircleMark) {
    MixedGraph p = mag_to_pag(from_one_based(4, {{1, "->", 2}, {2, "->", 3}}), false);
    AddTriples t = uc_triples_add(p, 2, 3);
    EXPECT_EQ(triple_sets(t.possible_i), (std::set<VertexSet>{one_based({2, 3, 4})}));
    EXPECT_TRUE(t.definite_i.empty());
    auto out = add_adjacency(p, pag_to_mag(p), 2, 3);
    std::set<std::set<VertexSet>> patterns;
    for (const auto& pr : out) patterns.insert(colliders_of(pr.pag));
    EXPECT_EQ(patterns, (std::set<std::set<VertexSet>>{{}, {one_based({2, 3, 4})}}));
}

TEST(AddMove, ProposesEverySingleEdgeSupermodel) {
    std::mt19937_64 rng(41);
    int cases = 0;
    for (int rep = 0; rep < 150; ++rep) {
        int n = 3 + rep % 4;
        MixedGraph g = testutil::random_mag(rng, n, 0.4, 0.5);
        MixedGraph p = mag_to_pag(g, false);
        MixedGraph rep_g = pag_to_mag(p);
        for (VertexId a = 0; a < n; ++a) {
            for (VertexId b = a + 1; b < n; ++b) {
                if (g.adjacent(a, b)) continue;
                MoveStats stats;
                auto props = add_adjacency(p, rep_g, a, b, {}, &stats);
                std::set<std::vector<Mark>> keys;
                for (const auto& pr : props) {
                    ASSERT_TRUE(same_skeleton_plus(p, pr.pag, a, b, true));
                    ASSERT_TRUE(keys.insert(pr.pag.raw_marks()).second);
                    ASSERT_TRUE(mag_to_pag(pr.mag, false).same_marks(pr.pag));
                }
                for (int kind = 0; kind < 3; ++kind) {
                    MixedGraph h = g;
                    if (kind == 0) h.add_directed(a, b);
                    else if (kind == 1) h.add_directed(b, a);
                    else h.add_bidirected(a, b);
                    if (!is_acyclic(h) || !is_mag(h)) continue;
                    ++cases;
                    ASSERT_TRUE(keys.count(mag_to_pag(h, false).raw_marks())) << to_text(g) << "+" << a << "," << b;
                }
            }
        }
    }
    EXPECT_GT(cases, 500);
}

TEST(DeleteMove, Classification) {
    // A triangle carries only circles, so the exposed triple is uncertain.
    MixedGraph tri = from_one_based(3, {{1, "->", 2}, {1, "->", 3}, {2, "<->", 3}});
    EXPECT_EQ(triple_sets(uc_triples_delete(mag_to_pag(tri, false), 1, 2).possible), (std::set<VertexSet>{one_based({1, 2, 3})}));
    // PAG 1 o-> 3 <-o 2, 3 -> 4, 1 o-> 4: the tail at 3 on 3 -> 4 rules the triple out.
    MixedGraph g = from_one_based(4, {{1, "->", 3}, {2, "->", 3}, {3, "->", 4}, {1, "->", 4}});
    MixedGraph p = mag_to_pag(g, false);
    ASSERT_EQ(p.mark(3, 2), Mark::Tail);
    DeleteTriples t = uc_triples_delete(p, 0, 3);
    EXPECT_TRUE(t.possible.empty());
    EXPECT_TRUE(colliders_of(t.base).count(one_based({1, 2, 3})));
    // Four-vertex MAG: deleting {2,3} exposes the triple 2 - 4 - 3, a collider in the PAG.
    MixedGraph f = from_one_based(4, {{2, "<->", 4}, {3, "<->", 4}, {2, "->", 3}, {1, "->", 4}, {1, "<->", 2}});
    MixedGraph pf = mag_to_pag(f, false);
    DeleteTriples tf = uc_triples_delete(pf, 1, 2);
    EXPECT_TRUE(colliders_of(tf.base).count(one_based({2, 3, 4})));
    EXPECT_THROW(uc_triples_delete(pf, 0, 2), DomainError);
}

TEST(DeleteMove, PendantAndOnlyEdge) {
    MixedGraph g = from_one_based(2, {{1, "->", 2}});
    auto out = delete_adjacency(mag_to_pag(g, false), g, 0, 1);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].pag.edge_count(), 0);
    MixedGraph chain = from_one_based(3, {{1, "->", 2}, {2, "->", 3}});
    DeleteTriples t = uc_triples_delete(mag_to_pag(chain, false), 1, 2);
    EXPECT_TRUE(t.possible.empty());
}

TEST(DeleteMove, SixVertexInverseRecoversOriginal) {
    MixedGraph p = six_vertex_pag();
    for (const auto& added : add_adjacency(p, pag_to_mag(p), 1, 4)) {
        auto back = delete_adjacency(added.pag, added.mag, 1, 4);
        bool found = false;
        for (const auto& pr : back) found |= pr.pag.same_marks(p);
        EXPECT_TRUE(found) << to_text(added.pag);
    }
}

TEST(DeleteMove, ProposesEverySingleEdgeSubmodelAndOnlyValidClasses) {
    std::mt19937_64 rng(42);
    int cases = 0;
    for (int rep = 0; rep < 150; ++rep) {
        int n = 3 + rep % 3;
        MixedGraph g = testutil::random_mag(rng, n, 0.6, 0.5);
        MixedGraph p = mag_to_pag(g, false);
        MixedGraph rep_g = pag_to_mag(p);
        for (const Edge& e : g.edges()) {
            auto props = delete_adjacency(p, rep_g, e.a, e.b);
            MixedGraph h = g;
            h.remove_edge(e.a, e.b);
            std::set<std::vector<Mark>> keys;
            for (const auto& pr : props) {
                ASSERT_TRUE(same_skeleton_plus(p, pr.pag, e.a, e.b, false));
                keys.insert(pr.pag.raw_marks());
            }
            auto universe = all_mecs_with_skeleton(h);
            for (const auto& k : keys) ASSERT_TRUE(universe.count(k));
            if (is_mag(h)) {
                ++cases;
                ASSERT_TRUE(keys.count(mag_to_pag(h, false).raw_marks())) << to_text(g) << "-" << e.a << "," << e.b;
            }
        }
    }
    EXPECT_GT(cases, 200);
}

TEST(TurningMove, ColliderToNoncollider) {
    MixedGraph p = mag_to_pag(from_one_based(3, {{1, "->", 2}, {3, "->", 2}}), false);
    auto out = turning_moves(p, 1);
    std::set<std::vector<Mark>> keys;
    for (const auto& pr : out) keys.insert(pr.pag.raw_marks());
    MixedGraph circles = mag_to_pag(from_one_based(3, {{1, "->", 2}, {2, "->", 3}}), false);
    EXPECT_TRUE(keys.count(circles.raw_marks()));
    EXPECT_TRUE(keys.count(p.raw_marks()));
    EXPECT_EQ(out.size(), 2u);
    EXPECT_THROW(turning_moves(p, 0), DomainError);
}

TEST(TurningMove, NoTriplesGivesInputOnly) {
    MixedGraph p = mag_to_pag(from_one_based(3, {{1, "->", 2}, {1, "->", 3}, {2, "->", 3}}), false);
    auto out = turning_moves(p, 1);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_TRUE(out[0].pag.same_marks(p));
}

TEST(TurningMove, OutputsKeepSkeletonAndAreValid) {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 80; ++rep) {
        MixedGraph g = testutil::random_mag(rng, 5, 0.5, 0.5);
        MixedGraph p = mag_to_pag(g, false);
        auto universe = all_mecs_with_skeleton(g);
        for (int t : {1, 2}) {
            for (const auto& pr : turning_moves(p, t)) {
                ASSERT_TRUE(same_skeleton_plus(p, pr.pag, 0, 0, false));
                ASSERT_TRUE(universe.count(pr.pag.raw_marks()));
            }
        }
    }
}

TEST(Moves, BranchCapTruncates) {
    MixedGraph g = from_one_based(4, {{1, "->", 2}, {2, "<->", 3}, {2, "->", 4}, {3, "->", 4}});
    MixedGraph p = mag_to_pag(g, false);
    MoveConfig cfg;
    cfg.branch_cap = 0;
    MoveStats stats;
    auto out = turning_moves(p, 1, cfg, &stats);
    EXPECT_GT(stats.truncated, 0u);
    MoveStats full;
    auto all = turning_moves(p, 1, {}, &full);
    EXPECT_EQ(full.truncated, 0u);
    EXPECT_GT(all.size(), out.size());
}
