#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "ambidr/graph.hpp"

namespace fixture {

using ambidr::Edge;
using ambidr::VertexId;
using ambidr::WeightedGraph;

// Vertices of the eight-vertex LAP example.
enum EightVertex : VertexId { a, b, c, d, e, f, g, h };

inline WeightedGraph eight_vertex() {
    return WeightedGraph(8, {{a, b, 1}, {a, c, 1}, {a, e, 1}, {a, g, 1}, {b, c, 1},
                             {e, g, 1}, {b, d, 1}, {e, f, 1}, {d, h, 1}, {f, h, 1}});
}

inline void add_clique(std::vector<Edge>& edges, const std::vector<VertexId>& vs, double w = 1.0) {
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j) edges.push_back({vs[i], vs[j], w});
}

// Splitting scenarios. Vertex 0 is the vertex under test.

/// 0 joins two 4-cliques, two edges into each.
inline WeightedGraph split_two_neighborhoods() {
    std::vector<Edge> edges;
    add_clique(edges, {1, 2, 3, 4});
    add_clique(edges, {5, 6, 7, 8});
    for (VertexId u : {1u, 2u, 5u, 6u}) edges.push_back({0, u, 1.0});
    return WeightedGraph(9, std::move(edges));
}

/// 0 sits in a 5-clique {0..4}, 5 in a 5-clique {5..9}, joined by the edge 0-5.
/// Both endpoints of the bridge are LAPs.
inline WeightedGraph split_lap_bridge() {
    std::vector<Edge> edges;
    add_clique(edges, {0, 1, 2, 3, 4});
    add_clique(edges, {5, 6, 7, 8, 9});
    edges.push_back({0, 5, 1.0});
    return WeightedGraph(10, std::move(edges));
}

/// 0 joins three 4-cliques with two edges each; the third pair of edges has
/// weight `weak` (strength 2 * weak against 2).
inline WeightedGraph split_weak_component(double weak = 0.01) {
    std::vector<Edge> edges;
    add_clique(edges, {1, 2, 3, 4});
    add_clique(edges, {5, 6, 7, 8});
    add_clique(edges, {9, 10, 11, 12});
    for (VertexId u : {1u, 2u, 5u, 6u}) edges.push_back({0, u, 1.0});
    for (VertexId u : {9u, 10u}) edges.push_back({0, u, weak});
    return WeightedGraph(13, std::move(edges));
}

inline WeightedGraph path(std::size_t n, double w = 1.0) {
    std::vector<Edge> edges;
    for (VertexId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w});
    return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph cycle(std::size_t n, double w = 1.0) {
    std::vector<Edge> edges;
    for (VertexId i = 0; i < n; ++i) edges.push_back({i, static_cast<VertexId>((i + 1) % n), w});
    return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph complete(std::size_t n, double w = 1.0) {
    std::vector<Edge> edges;
    for (VertexId i = 0; i < n; ++i)
        for (VertexId j = i + 1; j < n; ++j) edges.push_back({i, j, w});
    return WeightedGraph(n, std::move(edges));
}

/// G(n, p) with weights uniform in [0.1, 1].
inline WeightedGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0), w(0.1, 1.0);
    std::vector<Edge> edges;
    for (VertexId i = 0; i < n; ++i)
        for (VertexId j = i + 1; j < n; ++j)
            if (u(rng) < p) edges.push_back({i, j, w(rng)});
    return WeightedGraph(n, std::move(edges));
}

/// Connected random graph: a random spanning tree plus G(n, p) edges.
inline WeightedGraph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0), w(0.1, 1.0);
    std::vector<Edge> edges;
    for (VertexId i = 1; i < n; ++i) {
        std::uniform_int_distribution<VertexId> pick(0, i - 1);
        edges.push_back({pick(rng), i, w(rng)});
    }
    for (VertexId i = 0; i < n; ++i)
        for (VertexId j = i + 1; j < n; ++j)
            if (u(rng) < p) edges.push_back({i, j, w(rng)});
    return WeightedGraph(n, std::move(edges));
}

/// Random geometric-style graph: each vertex links to its k nearest points in
/// the unit square, giving the local clustering LAP detection is built for.
inline WeightedGraph random_knn_graph(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng)};
    std::vector<Edge> edges;
    for (VertexId i = 0; i < n; ++i) {
        std::vector<std::pair<double, VertexId>> d;
        for (VertexId j = 0; j < n; ++j)
            if (j != i) {
                const double dx = pts[i].first - pts[j].first, dy = pts[i].second - pts[j].second;
                d.emplace_back(dx * dx + dy * dy, j);
            }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(std::min(k, d.size())), d.end());
        for (std::size_t t = 0; t < std::min(k, d.size()); ++t)
            edges.push_back({std::min(i, d[t].second), std::max(i, d[t].second), 1.0 / (1.0 + d[t].first)});
    }
    return WeightedGraph(n, std::move(edges));
}

/// Canonical text of a graph for equality checks.
inline std::vector<std::tuple<VertexId, VertexId, double>> canonical_edges(const WeightedGraph& g) {
    std::vector<std::tuple<VertexId, VertexId, double>> out;
    for (const auto& e : g.edges()) out.emplace_back(e.u, e.v, e.weight);
    return out;
}

} // namespace fixture
