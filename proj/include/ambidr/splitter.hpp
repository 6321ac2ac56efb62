#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "detector.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "parallel.hpp"

namespace ambidr {

struct SplitConfig {
    double tau_w = 0.05;
    int radius = 2;

    void validate() const {
        if (!(tau_w >= 0.0 && tau_w <= 1.0)) throw ConfigError("tau_w must lie in [0, 1]");
        if (radius < 1) throw ConfigError("radius must be at least 1");
    }
};

/// Membership mask over vertex ids.
using VertexMask = std::vector<bool>;

inline VertexMask make_mask(std::span<const VertexId> vertices, std::size_t n) {
    VertexMask mask(n, false);
    for (VertexId v : vertices) mask.at(v) = true;
    return mask;
}

/// Why a component of a punctured ball did or did not earn a copy.
enum class ComponentFate {
    kept,
    unsupported, ///< no edge from the origin to a non-LAP vertex of the component
    weak,        ///< strength below tau_w times the strongest component
    single_edge, ///< joined to the origin by exactly one edge
};

inline const char* to_string(ComponentFate f) {
    switch (f) {
    case ComponentFate::kept: return "kept";
    case ComponentFate::unsupported: return "unsupported";
    case ComponentFate::weak: return "weak";
    case ComponentFate::single_edge: return "single_edge";
    }
    return "?";
}

struct ComponentAssessment {
    std::vector<VertexId> members;
    std::vector<Neighbor> links; ///< origin's edges to non-LAP members
    std::size_t lap_links = 0;   ///< origin's edges to LAP members (dropped later)
    double strength = 0.0;
    ComponentFate fate = ComponentFate::kept;
};

struct SplitCopy {
    VertexId id = std::numeric_limits<VertexId>::max(); ///< assigned by build_disambiguated
    std::size_t component = npos;                      ///< index into SplitSet::components
    std::vector<Neighbor> edges;                        ///< inherited edges

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

/// The split decision for one LAP vertex. `copies` holds one entry per kept
/// component when at least two survive; otherwise it holds a single entry
/// (component == npos) for the unsplit vertex carrying all of its edges to
/// non-LAP neighbors.
struct SplitSet {
    VertexId origin = 0;
    std::vector<ComponentAssessment> components;
    std::vector<SplitCopy> copies;

    bool is_split() const noexcept { return copies.size() >= 2; }
};

/// Sum of the weights from v to its non-LAP neighbors inside `component`.
inline double component_strength(const WeightedGraph& gbar, VertexId v, std::span<const VertexId> component,
                                 const VertexMask& in_lap) {
    double s = 0.0;
    for (const auto& nb : gbar.neighbors(v))
        if (!in_lap[nb.vertex] && std::binary_search(component.begin(), component.end(), nb.vertex)) s += nb.weight;
    return s;
}

/// Applies the split decision rules to v in LAP_r. Components are excluded if
/// they have no non-LAP neighbor of v, if v reaches them through a single
/// edge, or if their strength is below tau_w times the strongest one. Edge
/// counts and strengths only consider non-LAP neighbors, since edges between
/// two LAP vertices never reach the disambiguated graph.
inline SplitSet split_set(const WeightedGraph& gbar, VertexId v, const SplitConfig& cfg, const VertexMask& in_lap,
                          const Decomposition& decomposition) {
    cfg.validate();
    if (v >= in_lap.size() || !in_lap[v])
        throw InvariantError("split_set called for vertex " + std::to_string(v) + " outside LAP_r");
    SplitSet out;
    out.origin = v;
    out.components.resize(decomposition.size());
    for (std::size_t c = 0; c < decomposition.size(); ++c) out.components[c].members = decomposition[c];

    // Assign each incident edge to the component containing the neighbor.
    for (const auto& nb : gbar.neighbors(v)) {
        for (auto& comp : out.components) {
            if (!std::binary_search(comp.members.begin(), comp.members.end(), nb.vertex)) continue;
            if (in_lap[nb.vertex]) {
                ++comp.lap_links;
            } else {
                comp.links.push_back(nb);
                comp.strength += nb.weight;
            }
            break;
        }
    }

    double s_max = 0.0;
    for (const auto& comp : out.components) s_max = std::max(s_max, comp.strength);
    std::size_t kept = 0;
    for (auto& comp : out.components) {
        if (comp.links.empty())
            comp.fate = ComponentFate::unsupported;
        else if (comp.strength < cfg.tau_w * s_max)
            comp.fate = ComponentFate::weak;
        else if (comp.links.size() == 1)
            comp.fate = ComponentFate::single_edge;
        else
            ++kept;
    }

    if (kept >= 2) {
        for (std::size_t c = 0; c < out.components.size(); ++c) {
            if (out.components[c].fate != ComponentFate::kept) continue;
            out.copies.push_back({std::numeric_limits<VertexId>::max(), c, out.components[c].links});
        }
    } else {
        SplitCopy whole;
        for (const auto& nb : gbar.neighbors(v))
            if (!in_lap[nb.vertex]) whole.edges.push_back(nb);
        out.copies.push_back(std::move(whole));
    }
    return out;
}

/// The rewired graph G'_r. Vertex ids below N are the original vertices (for
/// a split vertex, its first copy); further copies get ids N, N+1, ... in
/// order of origin id.
struct DisambiguatedGraph {
    WeightedGraph graph;
    std::vector<VertexId> origin;          ///< per vertex of `graph`
    std::vector<std::uint32_t> copy_index; ///< 0 for unsplit vertices
    std::map<VertexId, std::vector<VertexId>> split_groups;
    std::vector<SplitSet> split_sets; ///< sorted by origin, copy ids filled in
    std::size_t dropped_lap_lap = 0;
    std::size_t dropped_excluded = 0;
    double dropped_weight = 0.0;

    bool is_split_copy(VertexId v) const { return split_groups.count(origin.at(v)) > 0; }
};

/// Assembles G'_r from Gbar and the split sets of every LAP_r vertex (in any
/// order). Edges between two LAP vertices are dropped; edges between two
/// non-LAP vertices are copied; an edge from a LAP vertex to a non-LAP vertex
/// attaches to the copy whose component holds the non-LAP end, or is dropped
/// when that component earned no copy.
inline DisambiguatedGraph build_disambiguated(const WeightedGraph& gbar, std::span<const VertexId> lap_r,
                                              std::vector<SplitSet> sets) {
    const std::size_t n = gbar.vertex_count();
    const VertexMask in_lap = make_mask(lap_r, n);
    std::sort(sets.begin(), sets.end(), [](const SplitSet& a, const SplitSet& b) { return a.origin < b.origin; });
    std::size_t lap_count = 0;
    for (std::size_t v = 0; v < n; ++v) lap_count += in_lap[v];
    if (sets.size() != lap_count) throw InvariantError("expected one split set per LAP vertex");
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (!in_lap.at(sets[i].origin) || (i > 0 && sets[i - 1].origin == sets[i].origin))
            throw InvariantError("split sets do not match LAP_r");
        if (sets[i].copies.empty()) throw InvariantError("split set without copies");
    }

    DisambiguatedGraph out;
    out.origin.resize(n);
    out.copy_index.assign(n, 0);
    for (VertexId v = 0; v < n; ++v) out.origin[v] = v;

    // copy_of[v] maps a non-LAP neighbor of a split vertex to its copy id.
    std::vector<std::map<VertexId, VertexId>> copy_of(sets.size());
    for (std::size_t s = 0; s < sets.size(); ++s) {
        auto& set = sets[s];
        if (!set.is_split()) {
            set.copies.front().id = set.origin;
            continue;
        }
        std::vector<VertexId> group;
        for (std::size_t k = 0; k < set.copies.size(); ++k) {
            auto& copy = set.copies[k];
            if (k == 0) {
                copy.id = set.origin;
            } else {
                copy.id = static_cast<VertexId>(out.origin.size());
                out.origin.push_back(set.origin);
                out.copy_index.push_back(static_cast<std::uint32_t>(k));
            }
            group.push_back(copy.id);
            for (const auto& nb : copy.edges) {
                if (!copy_of[s].emplace(nb.vertex, copy.id).second)
                    throw InvariantError("two copies of vertex " + std::to_string(set.origin) + " share a neighbor");
            }
        }
        out.split_groups.emplace(set.origin, std::move(group));
    }

    auto set_index = [&](VertexId v) {
        auto it = std::lower_bound(sets.begin(), sets.end(), v,
                                   [](const SplitSet& a, VertexId x) { return a.origin < x; });
        return static_cast<std::size_t>(it - sets.begin());
    };

    std::vector<Edge> edges;
    edges.reserve(gbar.edge_count());
    for (const auto& e : gbar.edges()) {
        const bool lu = in_lap[e.u], lv = in_lap[e.v];
        if (!lu && !lv) {
            edges.push_back(e);
            continue;
        }
        if (lu && lv) {
            ++out.dropped_lap_lap;
            out.dropped_weight += e.weight;
            continue;
        }
        const VertexId lap = lu ? e.u : e.v, other = lu ? e.v : e.u;
        const std::size_t s = set_index(lap);
        if (!sets[s].is_split()) {
            edges.push_back(e);
            continue;
        }
        auto it = copy_of[s].find(other);
        if (it == copy_of[s].end()) {
            ++out.dropped_excluded;
            out.dropped_weight += e.weight;
            continue;
        }
        edges.push_back({it->second, other, e.weight});
    }
    out.graph = WeightedGraph(out.origin.size(), std::move(edges));
    out.split_sets = std::move(sets);
    return out;
}

/// Split sets for every member of LAP_r, then G'_r.
inline DisambiguatedGraph disambiguate(const WeightedGraph& gbar, const LapSets& laps, const SplitConfig& cfg) {
    cfg.validate();
    const auto members = laps.at(cfg.radius);
    std::vector<VertexId> lap_r;
    lap_r.reserve(members.size());
    for (const auto& m : members) lap_r.push_back(m.vertex);
    const VertexMask in_lap = make_mask(lap_r, gbar.vertex_count());
    std::vector<SplitSet> sets(members.size());
    parallel_for(members.size(), [&](std::size_t i) {
        sets[i] = split_set(gbar, members[i].vertex, cfg, in_lap, members[i].components);
    }, 16);
    return build_disambiguated(gbar, lap_r, std::move(sets));
}

} // namespace ambidr
