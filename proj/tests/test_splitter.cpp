#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ambidr/splitter.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ambidr;
using namespace fixture;

namespace {

std::vector<VertexId> neighbor_ids(const WeightedGraph& g, VertexId v) {
    std::vector<VertexId> out;
    for (const auto& nb : g.neighbors(v)) out.push_back(nb.vertex);
    return out;
}

DisambiguatedGraph run(const WeightedGraph& g, double tau_w = 0.05, int radius = 2) {
    SplitConfig cfg;
    cfg.tau_w = tau_w;
    cfg.radius = radius;
    return disambiguate(g, detect(g), cfg);
}

struct Snapshot {
    std::vector<std::tuple<VertexId, VertexId, double>> edges;
    std::vector<VertexId> origin;
    std::vector<std::uint32_t> copy_index;
    std::map<VertexId, std::vector<VertexId>> groups;
    bool operator==(const Snapshot&) const = default;
};

Snapshot snapshot(const DisambiguatedGraph& dg) {
    return {canonical_edges(dg.graph), dg.origin, dg.copy_index, dg.split_groups};
}

} // namespace

TEST(Strength, SingleNonLapNeighbor) {
    WeightedGraph g(3, {{0, 1, 0.4}, {1, 2, 1.0}});
    VertexMask lap(3, false);
    std::vector<VertexId> comp{1, 2};
    EXPECT_DOUBLE_EQ(component_strength(g, 0, comp, lap), 0.4);
}

TEST(Strength, AllLapComponentIsZero) {
    WeightedGraph g(3, {{0, 1, 0.4}, {0, 2, 0.7}, {1, 2, 1.0}});
    VertexMask lap{true, true, true};
    std::vector<VertexId> comp{1, 2};
    EXPECT_DOUBLE_EQ(component_strength(g, 0, comp, lap), 0.0);
}

TEST(Strength, RandomStarMatchesDirectSum) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> w(0.1, 2.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<Edge> edges;
        for (VertexId u = 1; u <= 12; ++u) edges.push_back({0, u, w(rng)});
        WeightedGraph g(13, edges);
        VertexMask lap(13, false);
        std::vector<VertexId> comp;
        for (VertexId u = 1; u <= 12; ++u) {
            lap[u] = rng() % 4 == 0;
            if (rng() % 2) comp.push_back(u);
        }
        double want = 0.0;
        for (const auto& e : edges)
            if (!lap[e.v] && std::count(comp.begin(), comp.end(), e.v)) want += e.weight;
        EXPECT_NEAR(component_strength(g, 0, comp, lap), want, 1e-12);
    }
}

TEST(SplitSet, TwoNeighborhoodsGiveTwoCopies) {
    auto g = split_two_neighborhoods();
    auto laps = detect(g);
    ASSERT_EQ(laps.vertices(2), std::vector<VertexId>{0});
    auto dg = run(g);
    ASSERT_EQ(dg.graph.vertex_count(), 10u);
    EXPECT_EQ(dg.split_groups.at(0), (std::vector<VertexId>{0, 9}));
    EXPECT_EQ(neighbor_ids(dg.graph, 0), (std::vector<VertexId>{1, 2}));
    EXPECT_EQ(neighbor_ids(dg.graph, 9), (std::vector<VertexId>{5, 6}));
    EXPECT_EQ(dg.origin[9], 0u);
    EXPECT_EQ(dg.copy_index[9], 1u);
    EXPECT_EQ(dg.graph.edge_count(), g.edge_count());
}

TEST(SplitSet, LapBridgeIsDroppedWithoutSplitting) {
    auto g = split_lap_bridge();
    auto laps = detect(g);
    ASSERT_EQ(laps.vertices(2), (std::vector<VertexId>{0, 5}));
    auto dg = run(g);
    EXPECT_EQ(dg.graph.vertex_count(), 10u);
    EXPECT_TRUE(dg.split_groups.empty());
    EXPECT_FALSE(dg.graph.edge_weight(0, 5).has_value());
    EXPECT_EQ(dg.dropped_lap_lap, 1u);
    EXPECT_EQ(dg.graph.edge_count(), g.edge_count() - 1);
}

TEST(SplitSet, WeakComponentIsExcluded) {
    auto g = split_weak_component(0.01);
    auto dg = run(g, 0.05);
    ASSERT_EQ(dg.graph.vertex_count(), 14u);
    const auto& set = dg.split_sets.front();
    EXPECT_EQ(set.copies.size(), 2u);
    EXPECT_EQ(set.components[2].fate, ComponentFate::weak);
    EXPECT_FALSE(dg.graph.edge_weight(0, 9).has_value());
    EXPECT_EQ(dg.dropped_excluded, 2u);

    // Lower threshold keeps all three.
    EXPECT_EQ(run(g, 0.001).graph.vertex_count(), 15u);
}

TEST(SplitSet, PathMiddleIsUnsplit) {
    auto g = path(3);
    auto laps = detect(g);
    ASSERT_EQ(laps.vertices(1), std::vector<VertexId>{1});
    auto dg = run(g, 0.05, 1);
    EXPECT_EQ(dg.graph.vertex_count(), 3u);
    EXPECT_EQ(dg.split_sets[0].components[0].fate, ComponentFate::single_edge);
    EXPECT_EQ(dg.split_sets[0].components[1].fate, ComponentFate::single_edge);
    EXPECT_EQ(canonical_edges(dg.graph), canonical_edges(g));
}

TEST(SplitSet, ZeroTauOnlyDropsUnsupported) {
    auto g = split_weak_component(1e-9);
    EXPECT_EQ(run(g, 0.0).graph.vertex_count(), 15u);
}

TEST(SplitSet, OutsideLapIsContractViolation) {
    auto g = split_two_neighborhoods();
    VertexMask lap(9, false);
    EXPECT_THROW(split_set(g, 0, SplitConfig{}, lap, {}), InvariantError);
}

TEST(SplitSet, BadConfig) {
    SplitConfig cfg;
    cfg.tau_w = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.tau_w = 0.1;
    cfg.radius = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Disambiguate, EmptyLapSetIsIdentity) {
    auto g = complete(6);
    auto dg = run(g);
    EXPECT_EQ(canonical_edges(dg.graph), canonical_edges(g));
    for (VertexId v = 0; v < 6; ++v) EXPECT_EQ(dg.origin[v], v);
}

TEST(Disambiguate, OverlappingCopiesAreRejected) {
    auto g = split_two_neighborhoods();
    auto laps = detect(g);
    const auto& m = laps.at(2)[0];
    auto lap_r = laps.vertices(2);
    auto set = split_set(g, 0, SplitConfig{}, make_mask(lap_r, 9), m.components);
    set.copies[1].edges.push_back(set.copies[0].edges.front());
    EXPECT_THROW(build_disambiguated(g, lap_r, {set}), InvariantError);
    EXPECT_THROW(build_disambiguated(g, lap_r, {}), InvariantError);
}

class RandomSplits : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomSplits, StructuralInvariants) {
    const auto seed = GetParam();
    auto g = random_knn_graph(120, 3 + seed % 3, seed);
    auto laps = detect(g);
    for (int r : {1, 2}) {
        SplitConfig cfg;
        cfg.radius = r;
        cfg.tau_w = 0.05 * static_cast<double>(seed % 3);
        auto dg = disambiguate(g, laps, cfg);
        const auto lap_r = laps.vertices(r);
        const auto in_lap = make_mask(lap_r, g.vertex_count());

        // |V'| = N + sum of extra copies.
        std::size_t extra = 0;
        for (const auto& s : dg.split_sets) extra += s.copies.size() - 1;
        EXPECT_EQ(dg.graph.vertex_count(), g.vertex_count() + extra);

        // Edge ledger, recomputed independently.
        double kept_weight = 0.0, dropped = 0.0;
        std::size_t lap_lap = 0;
        for (const auto& e : g.edges()) {
            if (in_lap[e.u] && in_lap[e.v]) {
                ++lap_lap;
                dropped += e.weight;
                continue;
            }
            bool excluded = false;
            for (VertexId l : {e.u, e.v}) {
                if (!in_lap[l]) continue;
                const VertexId other = l == e.u ? e.v : e.u;
                auto it = std::find_if(dg.split_sets.begin(), dg.split_sets.end(),
                                       [&](const SplitSet& s) { return s.origin == l; });
                if (!it->is_split()) continue;
                excluded = std::none_of(it->copies.begin(), it->copies.end(), [&](const SplitCopy& c) {
                    return std::any_of(c.edges.begin(), c.edges.end(), [&](const Neighbor& nb) { return nb.vertex == other; });
                });
            }
            (excluded ? dropped : kept_weight) += e.weight;
        }
        EXPECT_EQ(dg.dropped_lap_lap, lap_lap);
        EXPECT_NEAR(dg.dropped_weight, dropped, 1e-9);
        EXPECT_NEAR(dg.graph.total_weight(), kept_weight, 1e-9);
        EXPECT_NEAR(dg.graph.total_weight(), g.total_weight() - dg.dropped_weight, 1e-9);

        for (const auto& e : dg.graph.edges()) {
            // Weights are inherited and no edge joins two LAP origins.
            EXPECT_DOUBLE_EQ(e.weight, *g.edge_weight(dg.origin[e.u], dg.origin[e.v]));
            EXPECT_FALSE(in_lap[dg.origin[e.u]] && in_lap[dg.origin[e.v]]);
        }
        for (const auto& [origin, group] : dg.split_groups) {
            std::vector<VertexId> seen;
            for (auto c : group) {
                EXPECT_GE(dg.graph.degree(c), 2u);
                for (auto u : neighbor_ids(dg.graph, c)) seen.push_back(u);
            }
            std::sort(seen.begin(), seen.end());
            EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end()) << "copies share a neighbor";
        }
        // Non-LAP vertices with only non-LAP neighbors keep their edges.
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            if (in_lap[v]) continue;
            auto nb = neighbor_ids(g, v);
            if (std::any_of(nb.begin(), nb.end(), [&](VertexId u) { return in_lap[u]; })) continue;
            EXPECT_EQ(neighbor_ids(dg.graph, v), nb);
        }
    }
}

TEST_P(RandomSplits, OrderIndependent) {
    const auto seed = GetParam();
    auto g = random_knn_graph(100, 4, seed + 1000);
    auto laps = detect(g);
    SplitConfig cfg;
    const auto members = laps.at(cfg.radius);
    const auto lap_r = laps.vertices(cfg.radius);
    const auto mask = make_mask(lap_r, g.vertex_count());
    const auto reference = snapshot(disambiguate(g, laps, cfg));

    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 5; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<SplitSet> sets;
        for (auto i : order) sets.push_back(split_set(g, members[i].vertex, cfg, mask, members[i].components));
        EXPECT_EQ(snapshot(build_disambiguated(g, lap_r, std::move(sets))), reference);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomSplits, ::testing::Range<std::uint64_t>(0, 12));
