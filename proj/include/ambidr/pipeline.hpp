#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "detector.hpp"
#include "document.hpp"
#include "edge_list.hpp"
#include "embedder.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "relationship.hpp"
#include "sparsifier.hpp"
#include "splitter.hpp"

namespace ambidr {

struct PipelineConfig {
    RelationshipConfig relationship;
    SparsifierConfig sparsifier;
    bool skip_sparsify = false;
    DetectorConfig detector;
    SplitConfig split;
    EmbedConfig embed;
    std::uint64_t master_seed = 0;
    std::optional<std::uint64_t> sparsify_seed; ///< overrides the derived seed
    std::optional<std::uint64_t> embed_seed;
    bool compute_metrics = true; ///< needs matrix input
    std::size_t metrics_k = 15;
    bool record_timings = false; ///< timings make documents differ run to run

    void validate() const {
        if (!skip_sparsify) sparsifier.validate();
        detector.validate();
        split.validate();
        embed.validate();
        if (detector.r_cap && split.radius > *detector.r_cap)
            throw ConfigError("radius " + std::to_string(split.radius) + " exceeds r-cap " +
                              std::to_string(*detector.r_cap));
        if (compute_metrics && metrics_k < 1) throw ConfigError("metrics k must be positive");
    }
};

using PipelineInput = std::variant<Dataset, LabeledGraph>;

struct StageSeeds {
    std::uint64_t master = 0;
    std::uint64_t relationship = 0;
    std::uint64_t sparsify = 0;
    std::uint64_t embed = 0;
};

inline StageSeeds stage_seeds(const PipelineConfig& cfg) {
    return {cfg.master_seed, derive_seed(cfg.master_seed, "relationship"),
            cfg.sparsify_seed.value_or(derive_seed(cfg.master_seed, "sparsify")),
            cfg.embed_seed.value_or(derive_seed(cfg.master_seed, "embed"))};
}

/// Everything up to and including the unsplit layout; shared by every
/// (radius, tau_w) setting of a sweep.
struct PreparedRun {
    PipelineConfig config;
    StageSeeds seeds;
    std::optional<Dataset> data;
    std::vector<std::string> names;
    std::vector<std::string> labels; ///< empty, or one per vertex
    WeightedGraph graph;
    WeightedGraph sparsified;
    std::optional<SparsifyReport> sparsify_report;
    LapSets laps;
    Embedding standard;
    std::optional<std::vector<PointQuality>> quality; ///< of the unsplit layout
    std::optional<double> preserved_nn_data;
    std::map<std::string, double> timings; ///< seconds per stage
};

struct SettingResult {
    SplitConfig split;
    DisambiguatedGraph disambiguated;
    double coverage = 0.0;
    Embedding layout;
    ProjectionDocument document;
    std::map<std::string, double> timings;
};

struct PipelineResult {
    PreparedRun prepared;
    SettingResult setting;
    ProjectionDocument standard_document;
};

namespace detail {

template <class F>
auto run_stage(const char* name, std::map<std::string, double>& timings, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        } else {
            auto r = f();
            timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return r;
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), exit_code(e));
    }
}

inline Json timings_json(const std::map<std::string, double>& t) {
    Json j = Json::object();
    for (const auto& [k, v] : t) j[k] = v;
    return j;
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline Json provenance_json(const EmbedProvenance& p) {
    return {{"init", p.init},
            {"spectral_fallback", p.fallback},
            {"seed", p.seed},
            {"graph_fingerprint", p.graph_fingerprint},
            {"epochs", p.epochs},
            {"negatives", p.negatives},
            {"initial_lr", p.initial_lr},
            {"curve_a", p.curve_a},
            {"curve_b", p.curve_b},
            {"mode", p.parallel ? "parallel" : "sequential"}};
}

} // namespace detail

inline PreparedRun prepare_run(PipelineInput input, const PipelineConfig& cfg) {
    cfg.validate();
    PreparedRun run;
    run.config = cfg;
    run.seeds = stage_seeds(cfg);
    auto& t = run.timings;

    if (auto* data = std::get_if<Dataset>(&input)) {
        run.graph = detail::run_stage("relationship", t, [&] {
            data->validate();
            RelationshipConfig rc = cfg.relationship;
            rc.seed = run.seeds.relationship;
            return fuzzy_graph(exact_knn(*data, rc));
        });
        run.names = data->ids.empty() ? index_names(data->rows) : data->ids;
        run.labels = data->labels;
        run.data = std::move(*data);
    } else {
        auto& lg = std::get<LabeledGraph>(input);
        if (lg.graph.edge_count() == 0) throw StageError("relationship", "graph has no edges", 2);
        run.graph = std::move(lg.graph);
        run.names = std::move(lg.names);
    }

    if (cfg.skip_sparsify) {
        run.sparsified = run.graph;
    } else {
        run.sparsified = detail::run_stage("sparsify", t, [&] {
            SparsifierConfig sc = cfg.sparsifier;
            sc.seed = run.seeds.sparsify;
            SparsifyReport report;
            auto out = sparsify(run.graph, sc, &report);
            run.sparsify_report = report;
            return out;
        });
    }

    run.laps = detail::run_stage("detect", t, [&] { return detect(run.sparsified, cfg.detector); });

    run.standard = detail::run_stage("embed-standard", t, [&] {
        EmbedConfig ec = cfg.embed;
        ec.seed = run.seeds.embed;
        ec.init = InitKind::spectral;
        return embed(run.sparsified, ec);
    });

    if (cfg.compute_metrics && run.data) {
        detail::run_stage("metrics", t, [&] {
            const auto& d = *run.data;
            const std::size_t k = cfg.metrics_k;
            if (2 * k < d.rows - 1) run.quality = trustworthiness_continuity(d, run.standard, k, cfg.relationship.metric);
            if (k < d.rows)
                run.preserved_nn_data = preserved_nn_at_k(neighbor_sets(run.standard, k),
                                                          neighbor_sets(d, k, cfg.relationship.metric), k);
        });
    }
    return run;
}

/// Metadata shared by every document of a run.
inline Json common_metadata(const PreparedRun& run) {
    const auto& cfg = run.config;
    Json m = Json::object();
    if (run.data) {
        m["input"] = {{"kind", "matrix"}, {"rows", run.data->rows}, {"dims", run.data->dims}};
        m["k"] = cfg.relationship.k;
        m["metric"] = to_string(cfg.relationship.metric);
    } else {
        m["input"] = {{"kind", "edge_list"}, {"vertices", run.graph.vertex_count()}};
        m["k"] = nullptr;
        m["metric"] = nullptr;
    }
    m["seeds"] = {{"master", run.seeds.master},
                  {"relationship", run.seeds.relationship},
                  {"sparsify", run.seeds.sparsify},
                  {"embed", run.seeds.embed}};
    if (cfg.skip_sparsify) {
        m["epsilon"] = nullptr;
        m["sparsifier"] = {{"skipped", true}};
    } else {
        const auto& r = *run.sparsify_report;
        m["epsilon"] = cfg.sparsifier.epsilon;
        m["sparsifier"] = {{"skipped", false},
                           {"sample_constant", cfg.sparsifier.sample_constant},
                           {"solver_tolerance", cfg.sparsifier.solver_tolerance},
                           {"exact_threshold", cfg.sparsifier.exact_threshold},
                           {"exact_resistances", r.exact_resistances},
                           {"jl_dim", r.jl_dim},
                           {"max_cg_iterations", r.max_cg_iterations},
                           {"samples", r.samples},
                           {"sampled_edges", r.sampled_edges},
                           {"repaired_edges", r.repaired_edges},
                           {"leverage_sum", r.leverage_sum}};
    }
    Json counts = Json::array();
    for (int r = 1; r <= run.laps.evaluated_radius(); ++r) counts.push_back(run.laps.count(r));
    m["lap_counts"] = counts;
    m["detector"] = {{"evaluated_radius", run.laps.evaluated_radius()},
                     {"saturated", run.laps.saturated()},
                     {"r_cap", cfg.detector.r_cap ? Json(*cfg.detector.r_cap) : Json(nullptr)}};
    m["graph"] = {{"vertices", run.graph.vertex_count()},
                  {"edges", run.graph.edge_count()},
                  {"sparsified_edges", run.sparsified.edge_count()}};
    if (run.quality || run.preserved_nn_data) {
        Json q = {{"layout", "standard"}, {"k", cfg.metrics_k}};
        if (run.preserved_nn_data) q["preserved_nn_data"] = *run.preserved_nn_data;
        if (run.quality) {
            std::vector<double> t, c;
            for (const auto& p : *run.quality) {
                t.push_back(p.trustworthiness);
                c.push_back(p.continuity);
            }
            q["trustworthiness_mean"] = detail::mean_of(t);
            q["continuity_mean"] = detail::mean_of(c);
        }
        m["metrics"] = std::move(q);
    } else {
        m["metrics"] = nullptr;
    }
    m["standard_embedding"] = detail::provenance_json(run.standard.provenance);
    if (cfg.record_timings) m["timings"] = detail::timings_json(run.timings);
    return m;
}

inline ProjectionDocument standard_document(const PreparedRun& run) {
    ProjectionDocument doc;
    doc.kind = "standard";
    for (VertexId v = 0; v < run.sparsified.vertex_count(); ++v) {
        DocumentPoint p;
        p.id = p.origin = v;
        p.x = run.standard.positions[v].x;
        p.y = run.standard.positions[v].y;
        if (!run.labels.empty()) p.label = run.labels[v];
        p.source_id = run.names[v];
        doc.points.push_back(std::move(p));
    }
    doc.metadata = common_metadata(run);
    return doc;
}

inline Json split_report_json(const DisambiguatedGraph& dg, const std::vector<std::string>& names) {
    Json out = Json::array();
    for (const auto& set : dg.split_sets) {
        Json comps = Json::array();
        for (const auto& c : set.components)
            comps.push_back({{"size", c.members.size()},
                             {"strength", c.strength},
                             {"links", c.links.size()},
                             {"lap_links", c.lap_links},
                             {"fate", to_string(c.fate)}});
        Json ids = Json::array();
        for (const auto& copy : set.copies) ids.push_back(copy.id);
        out.push_back({{"origin", set.origin},
                       {"source_id", names.at(set.origin)},
                       {"copies", set.is_split() ? set.copies.size() : 1},
                       {"points", ids},
                       {"components", std::move(comps)}});
    }
    return out;
}

/// Splits, lays out and documents one (radius, tau_w) setting.
inline SettingResult run_setting(const PreparedRun& run, const SplitConfig& split) {
    split.validate();
    if (run.config.detector.r_cap && split.radius > *run.config.detector.r_cap)
        throw ConfigError("radius exceeds r-cap");
    SettingResult out;
    out.split = split;
    auto& t = out.timings;
    out.disambiguated = detail::run_stage("split", t, [&] { return disambiguate(run.sparsified, run.laps, split); });
    out.coverage = detail::run_stage("coverage", t, [&] { return coverage(run.sparsified, split.radius); });
    const auto& dg = out.disambiguated;
    out.layout = detail::run_stage("embed-disambiguated", t, [&] {
        EmbedConfig ec = run.config.embed;
        ec.seed = run.seeds.embed;
        auto init = aligned_init(run.standard, dg);
        return embed(dg.graph, ec, &init);
    });

    auto& doc = out.document;
    doc.kind = "disambiguated";
    for (VertexId v = 0; v < dg.graph.vertex_count(); ++v) {
        DocumentPoint p;
        p.id = v;
        p.origin = dg.origin[v];
        p.copy = dg.copy_index[v];
        p.x = out.layout.positions[v].x;
        p.y = out.layout.positions[v].y;
        p.is_split = dg.is_split_copy(v);
        if (!run.labels.empty()) p.label = run.labels[p.origin];
        p.source_id = run.names[p.origin];
        doc.points.push_back(std::move(p));
    }
    for (const auto& [origin, group] : dg.split_groups) doc.split_groups.push_back({origin, group});

    Json m = common_metadata(run);
    m["radius"] = split.radius;
    m["tau_w"] = split.tau_w;
    m["coverage"] = {{"radius", split.radius}, {"value", out.coverage}, {"graph", "sparsified"}};
    m["split_count"] = dg.split_groups.size();
    m["extra_points"] = dg.graph.vertex_count() - run.sparsified.vertex_count();
    m["lap_count"] = run.laps.count(split.radius);
    m["split_report"] = split_report_json(dg, run.names);
    m["disambiguated_graph"] = {{"vertices", dg.graph.vertex_count()},
                                {"edges", dg.graph.edge_count()},
                                {"dropped_lap_lap", dg.dropped_lap_lap},
                                {"dropped_excluded", dg.dropped_excluded},
                                {"dropped_weight", dg.dropped_weight}};
    m["embedding"] = detail::provenance_json(out.layout.provenance);
    if (run.config.record_timings) m["setting_timings"] = detail::timings_json(t);
    doc.metadata = std::move(m);
    return out;
}

inline PipelineResult run_pipeline(PipelineInput input, const PipelineConfig& cfg) {
    PipelineResult out;
    out.prepared = prepare_run(std::move(input), cfg);
    out.setting = run_setting(out.prepared, cfg.split);
    out.standard_document = standard_document(out.prepared);
    // A single-setting run documents the setting on the standard layout too.
    for (const char* key : {"radius", "tau_w", "coverage", "lap_count"})
        out.standard_document.metadata[key] = out.setting.document.metadata[key];
    return out;
}

struct SweepResult {
    PreparedRun prepared;
    ProjectionDocument standard_document;
    std::vector<SettingResult> settings;
};

/// One standard layout plus one disambiguated layout per (radius, tau_w).
inline SweepResult run_sweep(PipelineInput input, const PipelineConfig& cfg, const std::vector<int>& radii,
                             const std::vector<double>& taus) {
    if (radii.empty() || taus.empty()) throw ConfigError("sweep needs at least one radius and one tau_w");
    SweepResult out;
    out.prepared = prepare_run(std::move(input), cfg);
    out.standard_document = standard_document(out.prepared);
    for (int r : radii)
        for (double tau : taus) out.settings.push_back(run_setting(out.prepared, SplitConfig{tau, r}));
    return out;
}

} // namespace ambidr
