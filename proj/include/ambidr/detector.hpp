#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "parallel.hpp"

namespace ambidr {

/// Connected components of a punctured ball, each sorted, ordered by their
/// smallest vertex.
using Decomposition = std::vector<std::vector<VertexId>>;

struct LapTest {
    bool is_lap = false;
    Decomposition components; ///< components of ball(v, r) \ v
    std::size_t ball_size = 0;
};

/// r-step local articulation point test. The ball around v is connected by
/// construction (it contains a BFS tree rooted at v), so v is a LAP iff the
/// punctured ball has two or more components.
inline LapTest is_lap(const WeightedGraph& g, VertexId v, int r) {
    if (r < 1) throw ConfigError("LAP radius must be at least 1");
    auto ball = induced_ball(g, v, r);
    auto punctured = remove_vertex(ball, v);
    auto labels = connected_components(punctured);
    LapTest out;
    out.ball_size = ball.size();
    out.is_lap = labels.count > 1;
    out.components = component_groups(punctured, labels);
    return out;
}

struct DetectorConfig {
    std::optional<int> r_cap;

    void validate() const {
        if (r_cap && *r_cap < 1) throw ConfigError("r-cap must be at least 1");
    }
};

class LapSets;
inline LapSets detect(const WeightedGraph& g, const DetectorConfig& cfg = {});

/// LAP_r for every radius r >= 1, with the component decomposition of every
/// member.
///
/// Radii 1..evaluated_radius() are stored explicitly. Past that, either every
/// set is empty, or (when detection stopped because every remaining member's
/// ball had stopped growing) LAP_r repeats the last stored set, since a ball
/// that no longer grows cannot change its LAP status. A capped run refuses
/// queries beyond the cap.
class LapSets {
public:
    struct Member {
        VertexId vertex;
        Decomposition components;
    };

    int evaluated_radius() const noexcept { return static_cast<int>(levels_.size()); }
    std::optional<int> cap() const noexcept { return cap_; }
    bool saturated() const noexcept { return repeat_last_; }

    /// Members of LAP_r, sorted by vertex id.
    std::span<const Member> at(int r) const {
        if (r < 1) throw ConfigError("LAP radius must be at least 1");
        if (cap_ && r > *cap_)
            throw ConfigError("radius " + std::to_string(r) + " exceeds the detection cap " + std::to_string(*cap_));
        if (r <= evaluated_radius()) return levels_[static_cast<std::size_t>(r - 1)];
        if (repeat_last_ && !levels_.empty()) return levels_.back();
        return {};
    }

    std::vector<VertexId> vertices(int r) const {
        std::vector<VertexId> out;
        for (const auto& m : at(r)) out.push_back(m.vertex);
        return out;
    }

    std::size_t count(int r) const { return at(r).size(); }

    const Member* find(VertexId v, int r) const {
        auto level = at(r);
        auto it = std::lower_bound(level.begin(), level.end(), v,
                                   [](const Member& m, VertexId x) { return m.vertex < x; });
        return it != level.end() && it->vertex == v ? &*it : nullptr;
    }

    bool contains(VertexId v, int r) const { return find(v, r) != nullptr; }

    /// Active-set size entering each evaluated radius (diagnostics).
    const std::vector<std::size_t>& active_sizes() const noexcept { return active_sizes_; }

private:
    friend LapSets detect(const WeightedGraph&, const DetectorConfig&);

    std::vector<std::vector<Member>> levels_;
    std::vector<std::size_t> active_sizes_;
    std::optional<int> cap_;
    bool repeat_last_ = false;
};

/// Detects LAP_r for r = 1, 2, ... on g. A vertex that fails the test at some
/// radius is never tested again (a failed test means the punctured ball is
/// connected, and it stays connected as the ball grows). Stops when no vertex
/// remains active, when every active vertex's ball has stopped growing, or at
/// the cap.
inline LapSets detect(const WeightedGraph& g, const DetectorConfig& cfg) {
    cfg.validate();
    LapSets out;
    out.cap_ = cfg.r_cap;

    struct Active {
        VertexId v;
        std::size_t ball_size;
        bool frozen; // ball did not grow at the last step
    };
    std::vector<Active> active;
    active.reserve(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) >= 2) active.push_back({v, 0, false}); // degree < 2 can never be a LAP

    for (int r = 1; !active.empty(); ++r) {
        if (cfg.r_cap && r > *cfg.r_cap) break;
        out.active_sizes_.push_back(active.size());
        const bool all_frozen =
            r > 1 && std::all_of(active.begin(), active.end(), [](const Active& a) { return a.frozen; });
        if (all_frozen) {
            // Every remaining ball is final; LAP_r equals LAP_{r-1} from here on.
            out.active_sizes_.pop_back();
            out.repeat_last_ = true;
            break;
        }

        std::vector<LapTest> tests(active.size());
        const auto* previous = out.levels_.empty() ? nullptr : &out.levels_.back();
        parallel_for(active.size(), [&](std::size_t i) {
            if (active[i].frozen) return;
            tests[i] = is_lap(g, active[i].v, r);
        }, 8);

        std::vector<LapSets::Member> level;
        std::vector<Active> next;
        std::size_t prev_pos = 0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (active[i].frozen) {
                // Reuse the decomposition from the previous radius.
                while ((*previous)[prev_pos].vertex != active[i].v) ++prev_pos;
                level.push_back((*previous)[prev_pos]);
                next.push_back(active[i]);
                continue;
            }
            if (!tests[i].is_lap) continue;
            const bool frozen = tests[i].ball_size == active[i].ball_size;
            next.push_back({active[i].v, tests[i].ball_size, frozen});
            level.push_back({active[i].v, std::move(tests[i].components)});
        }
        out.levels_.push_back(std::move(level));
        active = std::move(next);
    }
    // Trailing empty levels carry no information.
    while (!out.levels_.empty() && out.levels_.back().empty() && !out.repeat_last_) out.levels_.pop_back();
    return out;
}

} // namespace ambidr
