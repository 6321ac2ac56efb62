#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ambidr {

using VertexId = std::uint32_t;

/// Undirected edge, stored with u < v.
struct Edge {
    VertexId u;
    VertexId v;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    VertexId vertex;
    double weight;
};

/// Immutable undirected graph with strictly positive, finite weights.
///
/// Construction normalizes the edge list: endpoints are ordered, parallel
/// edges are merged by summing their weights, and the adjacency (CSR, each
/// list sorted by neighbor id) is built eagerly. Self-loops, out-of-range
/// endpoints and non-positive or non-finite weights are rejected.
class WeightedGraph {
public:
    WeightedGraph() = default;

    WeightedGraph(std::size_t vertex_count, std::vector<Edge> edges) : n_(vertex_count) {
        if (vertex_count > std::numeric_limits<VertexId>::max())
            throw InputError("graph too large for 32-bit vertex ids");
        for (auto& e : edges) {
            if (e.u >= n_ || e.v >= n_)
                throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                 ") references a vertex outside [0, " + std::to_string(n_) + ")");
            if (e.u == e.v) throw InputError("self-loop at vertex " + std::to_string(e.u));
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                 ") has non-positive or non-finite weight");
            if (e.u > e.v) std::swap(e.u, e.v);
        }
        // Sorting by weight too makes the merged sums independent of input order.
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            if (a.u != b.u) return a.u < b.u;
            if (a.v != b.v) return a.v < b.v;
            return a.weight < b.weight;
        });
        for (const auto& e : edges) {
            if (!edges_.empty() && edges_.back().u == e.u && edges_.back().v == e.v)
                edges_.back().weight += e.weight;
            else
                edges_.push_back(e);
        }

        offsets_.assign(n_ + 1, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
        adjacency_.resize(offsets_[n_]);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        // edges_ is sorted by (u, v): filling lower neighbors first, then upper
        // ones, leaves every list sorted by neighbor id.
        for (const auto& e : edges_) adjacency_[fill[e.v]++] = {e.u, e.weight};
        for (const auto& e : edges_) adjacency_[fill[e.u]++] = {e.v, e.weight};
    }

    std::size_t vertex_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }

    std::span<const Neighbor> neighbors(VertexId v) const {
        check_vertex(v);
        return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    std::size_t degree(VertexId v) const { return neighbors(v).size(); }

    double weighted_degree(VertexId v) const {
        double s = 0.0;
        for (const auto& nb : neighbors(v)) s += nb.weight;
        return s;
    }

    std::optional<double> edge_weight(VertexId u, VertexId v) const {
        auto nbrs = neighbors(u);
        check_vertex(v);
        auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                                   [](const Neighbor& a, VertexId x) { return a.vertex < x; });
        if (it == nbrs.end() || it->vertex != v) return std::nullopt;
        return it->weight;
    }

    double total_weight() const noexcept {
        double s = 0.0;
        for (const auto& e : edges_) s += e.weight;
        return s;
    }

    void check_vertex(VertexId v) const {
        if (v >= n_)
            throw InputError("vertex " + std::to_string(v) + " out of range [0, " + std::to_string(n_) + ")");
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Neighbor> adjacency_;
};

namespace detail {

// Per-thread O(1)-reset vertex map used by the traversal routines.
struct VertexScratch {
    std::vector<std::uint32_t> stamp;
    std::vector<std::uint32_t> value;
    std::uint32_t epoch = 0;

    void begin(std::size_t n) {
        if (stamp.size() < n) {
            stamp.resize(n, 0);
            value.resize(n, 0);
        }
        if (++epoch == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
    }
    bool has(VertexId v) const { return stamp[v] == epoch; }
    void set(VertexId v, std::uint32_t x) {
        stamp[v] = epoch;
        value[v] = x;
    }
    std::uint32_t get(VertexId v) const { return value[v]; }
};

inline VertexScratch& scratch(int slot) {
    thread_local VertexScratch slots[2];
    return slots[slot];
}

} // namespace detail

/// Vertex subset of a parent graph; its edges are all parent edges with both
/// endpoints in the subset. Never copies edges. The parent must outlive it.
class SubgraphView {
public:
    explicit SubgraphView(const WeightedGraph& parent) : parent_(&parent) {
        vertices_.resize(parent.vertex_count());
        for (std::size_t i = 0; i < vertices_.size(); ++i) vertices_[i] = static_cast<VertexId>(i);
    }

    SubgraphView(const WeightedGraph& parent, std::vector<VertexId> vertices)
        : parent_(&parent), vertices_(std::move(vertices)) {
        std::sort(vertices_.begin(), vertices_.end());
        vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
        if (!vertices_.empty()) parent.check_vertex(vertices_.back());
    }

    const WeightedGraph& parent() const noexcept { return *parent_; }
    std::span<const VertexId> vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    bool empty() const noexcept { return vertices_.empty(); }

    bool contains(VertexId v) const { return std::binary_search(vertices_.begin(), vertices_.end(), v); }

    /// Position of v in vertices(), if present.
    std::optional<std::size_t> local_index(VertexId v) const {
        auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
        if (it == vertices_.end() || *it != v) return std::nullopt;
        return static_cast<std::size_t>(it - vertices_.begin());
    }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (VertexId v : vertices_)
            for (const auto& nb : parent_->neighbors(v))
                if (contains(nb.vertex)) ++twice;
        return twice / 2;
    }

private:
    const WeightedGraph* parent_;
    std::vector<VertexId> vertices_;
};

/// labels[i] is the component of the i-th vertex of the labelled vertex set
/// (vertex i for a whole graph, vertices()[i] for a view). Components are
/// numbered in order of their smallest vertex.
struct ComponentLabeling {
    std::vector<std::uint32_t> labels;
    std::size_t count = 0;
};

namespace detail {

template <class Vertices>
ComponentLabeling label_components(const WeightedGraph& g, const Vertices& vertices) {
    auto& local = scratch(1);
    local.begin(g.vertex_count());
    for (std::size_t i = 0; i < vertices.size(); ++i) local.set(vertices[i], static_cast<std::uint32_t>(i));

    constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
    ComponentLabeling out;
    out.labels.assign(vertices.size(), unset);
    std::vector<VertexId> stack;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (out.labels[i] != unset) continue;
        const auto label = static_cast<std::uint32_t>(out.count++);
        out.labels[i] = label;
        stack.push_back(vertices[i]);
        while (!stack.empty()) {
            VertexId x = stack.back();
            stack.pop_back();
            for (const auto& nb : g.neighbors(x)) {
                if (!local.has(nb.vertex)) continue;
                auto j = local.get(nb.vertex);
                if (out.labels[j] != unset) continue;
                out.labels[j] = label;
                stack.push_back(nb.vertex);
            }
        }
    }
    return out;
}

} // namespace detail

inline ComponentLabeling connected_components(const SubgraphView& view) {
    return detail::label_components(view.parent(), view.vertices());
}

inline ComponentLabeling connected_components(const WeightedGraph& g) {
    return connected_components(SubgraphView(g));
}

/// Groups the view's vertices by component label; each group is sorted and
/// groups are ordered by label.
inline std::vector<std::vector<VertexId>> component_groups(const SubgraphView& view,
                                                           const ComponentLabeling& labels) {
    std::vector<std::vector<VertexId>> groups(labels.count);
    auto vs = view.vertices();
    for (std::size_t i = 0; i < vs.size(); ++i) groups[labels.labels[i]].push_back(vs[i]);
    return groups;
}

/// Vertices within `radius` hops of `center`, by breadth-first expansion.
inline SubgraphView induced_ball(const WeightedGraph& g, VertexId center, int radius) {
    g.check_vertex(center);
    if (radius < 0) throw ConfigError("ball radius must be non-negative");
    auto& seen = detail::scratch(0);
    seen.begin(g.vertex_count());
    std::vector<VertexId> ball{center};
    seen.set(center, 0);
    std::size_t level_begin = 0;
    for (int depth = 0; depth < radius; ++depth) {
        const std::size_t level_end = ball.size();
        if (level_begin == level_end) break;
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (const auto& nb : g.neighbors(ball[i])) {
                if (seen.has(nb.vertex)) continue;
                seen.set(nb.vertex, static_cast<std::uint32_t>(depth + 1));
                ball.push_back(nb.vertex);
            }
        }
        level_begin = level_end;
    }
    return SubgraphView(g, std::move(ball));
}

inline SubgraphView remove_vertex(const SubgraphView& view, VertexId v) {
    if (!view.contains(v)) throw InputError("vertex " + std::to_string(v) + " is not in the view");
    std::vector<VertexId> rest;
    rest.reserve(view.size() - 1);
    for (VertexId x : view.vertices())
        if (x != v) rest.push_back(x);
    return SubgraphView(view.parent(), std::move(rest));
}

/// Hop distance from `source` to every vertex; -1 marks unreachable vertices.
inline std::vector<int> hop_distances(const WeightedGraph& g, VertexId source) {
    g.check_vertex(source);
    std::vector<int> dist(g.vertex_count(), -1);
    std::vector<VertexId> queue{source};
    dist[source] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        VertexId x = queue[head];
        for (const auto& nb : g.neighbors(x)) {
            if (dist[nb.vertex] >= 0) continue;
            dist[nb.vertex] = dist[x] + 1;
            queue.push_back(nb.vertex);
        }
    }
    return dist;
}

/// Largest hop distance from v to any vertex reachable from it.
inline int eccentricity(const WeightedGraph& g, VertexId v) {
    auto d = hop_distances(g, v);
    return *std::max_element(d.begin(), d.end());
}

} // namespace ambidr
