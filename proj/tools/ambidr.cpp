// Command-line front end: one subcommand per pipeline stage plus the full
// pipeline. Exit codes: 0 ok, 2 bad input, 3 bad configuration, 4 internal
// error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "ambidr/ambidr.hpp"

namespace fs = std::filesystem;
using namespace ambidr;

namespace {

struct InputOptions {
    std::string matrix;
    std::string edges;
    std::string label_col;
    std::string id_col;

    void add_to(CLI::App* app, bool allow_matrix = true, bool allow_edges = true) {
        CLI::Option* m = nullptr;
        CLI::Option* e = nullptr;
        if (allow_matrix) m = app->add_option("--matrix", matrix, "delimited text or AMBD1 binary matrix");
        if (allow_edges) e = app->add_option("--edges", edges, "edge list (src dst weight)");
        if (m && e) m->excludes(e);
        if (allow_matrix) {
            app->add_option("--label-col", label_col, "label column (index or header name)");
            app->add_option("--id-col", id_col, "id column (index or header name)");
        }
    }

    Dataset dataset() const {
        if (matrix.empty()) throw ConfigError("--matrix is required");
        DelimitedOptions opts;
        if (!label_col.empty()) opts.label_col = label_col;
        if (!id_col.empty()) opts.id_col = id_col;
        return load_dataset(matrix, opts);
    }

    LabeledGraph graph() const {
        if (edges.empty()) throw ConfigError("--edges is required");
        return load_edge_list(edges);
    }

    PipelineInput input() const {
        if (matrix.empty() == edges.empty()) throw ConfigError("give exactly one of --matrix or --edges");
        if (!matrix.empty()) return dataset();
        return graph();
    }
};

template <class F>
void with_output(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    write(out);
}

std::vector<std::string> read_lines_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

// A vertex named "<base>#<k>" is copy k of <base>, the naming used by the
// split subcommand.
std::pair<std::string, std::optional<std::uint32_t>> parse_copy_name(const std::string& name) {
    auto pos = name.rfind('#');
    if (pos == std::string::npos || pos == 0 || pos + 1 == name.size()) return {name, std::nullopt};
    std::uint64_t k = 0;
    if (!detail::parse_index(name.substr(pos + 1), k)) return {name, std::nullopt};
    return {name.substr(0, pos), static_cast<std::uint32_t>(k)};
}

ProjectionDocument document_from_graph(const LabeledGraph& lg, const Embedding& emb, const std::string& kind) {
    ProjectionDocument doc;
    doc.kind = kind;
    const std::size_t n = lg.graph.vertex_count();
    std::map<std::string, std::vector<std::pair<std::uint32_t, VertexId>>> groups;
    std::vector<std::string> base(n);
    for (VertexId v = 0; v < n; ++v) {
        auto [b, k] = parse_copy_name(lg.names[v]);
        if (!k) {
            b = lg.names[v];
            k = 0;
        }
        base[v] = b;
        groups[b].emplace_back(*k, v);
    }
    doc.points.resize(n);
    for (auto& [b, members] : groups) {
        std::sort(members.begin(), members.end());
        const bool split = members.size() >= 2;
        SplitGroup group{members.front().second, {}};
        for (std::uint32_t c = 0; c < members.size(); ++c) {
            const VertexId v = members[c].second;
            auto& p = doc.points[v];
            p.id = v;
            p.origin = members.front().second;
            p.copy = c;
            p.x = emb.positions[v].x;
            p.y = emb.positions[v].y;
            p.is_split = split;
            p.source_id = lg.names[v];
            group.points.push_back(v);
        }
        if (split) {
            std::sort(group.points.begin(), group.points.end(),
                      [&](VertexId a, VertexId b2) { return doc.points[a].copy < doc.points[b2].copy; });
            doc.split_groups.push_back(std::move(group));
        }
    }
    std::sort(doc.split_groups.begin(), doc.split_groups.end(),
              [](const SplitGroup& a, const SplitGroup& b) { return a.origin < b.origin; });
    return doc;
}

Json provenance_json(const EmbedProvenance& p) { return detail::provenance_json(p); }

// Layout position of every data row: the point with that origin and copy 0.
Embedding rows_layout(const ProjectionDocument& doc, std::size_t rows) {
    Embedding e;
    e.positions.resize(rows);
    std::vector<bool> seen(rows, false);
    for (const auto& p : doc.points) {
        if (p.copy != 0) continue;
        if (p.origin >= rows) throw InputError("document has more origins than the dataset has rows");
        e.positions[p.origin] = {p.x, p.y};
        seen[p.origin] = true;
    }
    for (std::size_t i = 0; i < rows; ++i)
        if (!seen[i]) throw InputError("document has no point for row " + std::to_string(i));
    return e;
}

void write_detector_report(std::ostream& out, const LapSets& laps, const std::vector<std::string>& names) {
    out << "radius\tvertex\tcomponents\tcomponent_sizes\n";
    for (int r = 1; r <= laps.evaluated_radius(); ++r) {
        for (const auto& m : laps.at(r)) {
            out << r << '\t' << names[m.vertex] << '\t' << m.components.size() << '\t';
            for (std::size_t c = 0; c < m.components.size(); ++c) out << (c ? "," : "") << m.components[c].size();
            out << '\n';
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detects ambiguous instances in a similarity graph, splits them, and lays out the result in 2D."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ambidr 0.1.0");

    // Shared option storage. Each subcommand binds the subset it uses.
    InputOptions in;
    std::string out_path, standard_out, svg_path, out_dir, report_path;
    std::size_t k = 15;
    std::string metric = "euclidean";
    double epsilon = 0.7, sample_constant = 4.0, tau_w = 0.05;
    std::optional<std::uint64_t> sparsify_seed, embed_seed;
    std::uint64_t seed = 0;
    bool skip_sparsify = false, record_timings = false, parallel = false, no_metrics = false;
    int radius = 2;
    std::optional<int> r_cap;
    int epochs = 500, negatives = 5;
    std::string init = "spectral", reference;
    std::string sweep_radii, sweep_tau;
    std::size_t metrics_k = 15;

    auto add_sparsify = [&](CLI::App* c) {
        c->add_option("--epsilon", epsilon, "sparsification accuracy, in (0, 1)");
        c->add_option("--sample-constant", sample_constant, "oversampling constant C");
        c->add_option("--sparsify-seed", sparsify_seed, "seed for resistance sketches and sampling");
    };
    auto add_detect = [&](CLI::App* c) {
        c->add_option("--radius", radius, "hop radius r used for splitting");
        c->add_option("--r-cap", r_cap, "largest radius evaluated by detection");
    };
    auto add_embed = [&](CLI::App* c) {
        c->add_option("--epochs", epochs, "SGD epochs");
        c->add_option("--neg-samples", negatives, "negative samples per positive sample");
        c->add_option("--embed-seed", embed_seed, "layout seed");
        c->add_flag("--parallel", parallel, "lock-free multi-threaded layout (not reproducible)");
    };

    auto* pipeline = app.add_subcommand("pipeline", "run every stage and write projection documents");
    in.add_to(pipeline);
    pipeline->add_option("--k", k, "neighbors in the kNN graph");
    pipeline->add_option("--metric", metric, "euclidean or cosine");
    add_sparsify(pipeline);
    pipeline->add_flag("--skip-sparsify", skip_sparsify, "detect on the input graph directly");
    add_detect(pipeline);
    pipeline->add_option("--tau-w", tau_w, "component strength threshold, in [0, 1]");
    add_embed(pipeline);
    pipeline->add_option("--seed", seed, "master seed");
    pipeline->add_option("--metrics-k", metrics_k, "neighborhood size for quality metrics");
    pipeline->add_flag("--no-metrics", no_metrics, "skip quality metrics");
    pipeline->add_option("--out", out_path, "disambiguated projection document");
    pipeline->add_option("--standard-out", standard_out, "unsplit projection document");
    pipeline->add_option("--svg", svg_path, "SVG scatter of the disambiguated layout");
    pipeline->add_option("--report", report_path, "per-point metric report (TSV)");
    pipeline->add_flag("--record-timings", record_timings, "store stage timings in the documents");
    pipeline->add_option("--sweep-radii", sweep_radii, "comma-separated radii; writes a manifest");
    pipeline->add_option("--sweep-tau", sweep_tau, "comma-separated tau_w values; writes a manifest");
    pipeline->add_option("--out-dir", out_dir, "directory for sweep documents");

    auto* knn = app.add_subcommand("knn-graph", "build the fuzzy kNN graph of a matrix");
    in.add_to(knn, true, false);
    knn->add_option("--k", k, "neighbors");
    knn->add_option("--metric", metric, "euclidean or cosine");
    knn->add_option("--out", out_path, "edge list (default stdout)");

    auto* sparsify_cmd = app.add_subcommand("sparsify", "spectrally sparsify an edge list");
    in.add_to(sparsify_cmd, false, true);
    add_sparsify(sparsify_cmd);
    sparsify_cmd->add_option("--out", out_path, "edge list (default stdout)");

    auto* detect_cmd = app.add_subcommand("detect", "list local articulation points per radius");
    in.add_to(detect_cmd, false, true);
    add_detect(detect_cmd);
    detect_cmd->add_option("--out", out_path, "TSV report (default stdout)");

    auto* split_cmd = app.add_subcommand("split", "split LAP_r vertices and write the rewired graph");
    in.add_to(split_cmd, false, true);
    add_detect(split_cmd);
    split_cmd->add_option("--tau-w", tau_w, "component strength threshold");
    split_cmd->add_option("--out", out_path, "edge list; copies are named <name>#<k>");
    split_cmd->add_option("--report", report_path, "JSON split report");

    auto* embed_cmd = app.add_subcommand("embed", "lay out an edge list in 2D");
    in.add_to(embed_cmd, false, true);
    add_embed(embed_cmd);
    embed_cmd->add_option("--init", init, "spectral, aligned or random");
    embed_cmd->add_option("--reference", reference, "projection document for --init aligned");
    embed_cmd->add_option("--out", out_path, "projection document (default stdout)");
    embed_cmd->add_option("--svg", svg_path, "SVG scatter");

    std::string against = "embedding";
    std::vector<std::string> layouts, p_layouts;
    auto* metrics_cmd = app.add_subcommand("metrics", "compare layouts with each other or with the data");
    metrics_cmd->add_option("--k", k, "neighborhood size");
    metrics_cmd->add_option("--against", against, "embedding, data or rho");
    metrics_cmd->add_option("--metric", metric, "data-space metric");
    in.add_to(metrics_cmd, true, false);
    metrics_cmd->add_option("--unsparsified", p_layouts, "layouts of the unsparsified graph (rho)");
    metrics_cmd->add_option("layouts", layouts, "projection documents");
    metrics_cmd->add_option("--out", out_path, "report (default stdout)");

    SyntheticSpec synth;
    std::string truth_path;
    auto* synth_cmd = app.add_subcommand("synth", "generate clusters with planted ambiguous points");
    synth_cmd->add_option("--clusters", synth.clusters);
    synth_cmd->add_option("--cluster-size", synth.cluster_size);
    synth_cmd->add_option("--dims", synth.dims);
    synth_cmd->add_option("--separation", synth.separation, "centroid distance in cluster std units");
    synth_cmd->add_option("--planted", synth.planted, "number of planted ambiguous points");
    synth_cmd->add_option("--noise", synth.planted_noise, "jitter of planted points");
    synth_cmd->add_option("--seed", synth.seed);
    synth_cmd->add_option("--out", out_path, "CSV with id and label columns (default stdout)");
    synth_cmd->add_option("--truth", truth_path, "ground-truth TSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        auto sparsifier_config = [&] {
            SparsifierConfig c;
            c.epsilon = epsilon;
            c.sample_constant = sample_constant;
            c.seed = sparsify_seed.value_or(derive_seed(seed, "sparsify"));
            return c;
        };
        auto embed_config = [&] {
            EmbedConfig c;
            c.epochs = epochs;
            c.negatives = negatives;
            c.seed = embed_seed.value_or(derive_seed(seed, "embed"));
            c.parallel = parallel;
            c.init = parse_init(init);
            return c;
        };
        auto detector_config = [&] {
            DetectorConfig c;
            c.r_cap = r_cap;
            return c;
        };

        if (*pipeline) {
            PipelineConfig cfg;
            cfg.relationship.k = k;
            cfg.relationship.metric = parse_metric(metric);
            cfg.sparsifier = sparsifier_config();
            cfg.skip_sparsify = skip_sparsify;
            cfg.detector = detector_config();
            cfg.split = {tau_w, radius};
            cfg.embed = embed_config();
            cfg.master_seed = seed;
            cfg.sparsify_seed = sparsify_seed;
            cfg.embed_seed = embed_seed;
            cfg.compute_metrics = !no_metrics;
            cfg.metrics_k = metrics_k;
            cfg.record_timings = record_timings;

            if (!sweep_radii.empty() || !sweep_tau.empty()) {
                if (out_dir.empty()) throw ConfigError("a sweep needs --out-dir");
                std::vector<int> radii;
                std::vector<double> taus;
                for (const auto& s : read_lines_list(sweep_radii.empty() ? std::to_string(radius) : sweep_radii))
                    radii.push_back(std::stoi(s));
                for (const auto& s : read_lines_list(sweep_tau.empty() ? detail::format_double(tau_w) : sweep_tau)) {
                    auto v = detail::parse_double(s);
                    if (!v) throw ConfigError("bad tau_w value '" + s + "'");
                    taus.push_back(*v);
                }
                auto sweep = run_sweep(in.input(), cfg, radii, taus);
                fs::create_directories(out_dir);
                DocumentManifest manifest;
                manifest.standard = "standard.json";
                save_document((fs::path(out_dir) / manifest.standard).string(), sweep.standard_document);
                for (const auto& s : sweep.settings) {
                    std::string name = "r" + std::to_string(s.split.radius) + "_tau" +
                                       detail::format_double(s.split.tau_w) + ".json";
                    save_document((fs::path(out_dir) / name).string(), s.document);
                    manifest.documents.push_back({s.split.radius, s.split.tau_w, name});
                }
                with_output((fs::path(out_dir) / "manifest.json").string(),
                            [&](std::ostream& o) { write_manifest(o, manifest); });
                std::cerr << "wrote " << sweep.settings.size() + 1 << " documents to " << out_dir << '\n';
                return 0;
            }

            auto result = run_pipeline(in.input(), cfg);
            with_output(out_path, [&](std::ostream& o) { write_document(o, result.setting.document); });
            if (!standard_out.empty())
                with_output(standard_out, [&](std::ostream& o) { write_document(o, result.standard_document); });
            if (!svg_path.empty())
                with_output(svg_path, [&](std::ostream& o) { write_svg(o, result.setting.document); });
            if (!report_path.empty()) {
                if (!result.prepared.quality) throw ConfigError("--report needs matrix input and metrics");
                auto rows = split_metric_report(result.prepared.laps, radius, result.setting.disambiguated,
                                                *result.prepared.quality);
                with_output(report_path,
                            [&](std::ostream& o) { write_split_metric_report(o, rows, result.prepared.names); });
            }
            const auto& m = result.setting.document.metadata;
            std::cerr << "LAP_" << radius << ": " << m["lap_count"] << " vertices, " << m["split_count"]
                      << " split, coverage " << m["coverage"]["value"] << '\n';
            return 0;
        }

        if (*knn) {
            RelationshipConfig rc;
            rc.k = k;
            rc.metric = parse_metric(metric);
            auto data = in.dataset();
            auto g = relationship_graph(data, rc);
            auto names = data.ids.empty() ? index_names(data.rows) : data.ids;
            with_output(out_path, [&](std::ostream& o) { write_edge_list(o, g, names); });
            return 0;
        }

        if (*sparsify_cmd) {
            auto lg = in.graph();
            SparsifyReport report;
            auto gbar = sparsify(lg.graph, sparsifier_config(), &report);
            with_output(out_path, [&](std::ostream& o) { write_edge_list(o, gbar, lg.names); });
            std::cerr << "kept " << report.output_edges << " of " << report.input_edges << " edges (" << report.samples
                      << " samples, " << report.repaired_edges << " repaired)\n";
            return 0;
        }

        if (*detect_cmd) {
            auto lg = in.graph();
            auto laps = detect(lg.graph, detector_config());
            with_output(out_path, [&](std::ostream& o) { write_detector_report(o, laps, lg.names); });
            std::cerr << "LAP_" << radius << ": " << laps.count(radius) << " vertices\n";
            return 0;
        }

        if (*split_cmd) {
            auto lg = in.graph();
            SplitConfig sc{tau_w, radius};
            auto laps = detect(lg.graph, detector_config());
            auto dg = disambiguate(lg.graph, laps, sc);
            std::vector<std::string> names(dg.graph.vertex_count());
            for (VertexId v = 0; v < names.size(); ++v) {
                names[v] = lg.names[dg.origin[v]];
                if (dg.is_split_copy(v)) names[v] += "#" + std::to_string(dg.copy_index[v]);
            }
            with_output(out_path, [&](std::ostream& o) { write_edge_list(o, dg.graph, names); });
            if (!report_path.empty())
                with_output(report_path,
                            [&](std::ostream& o) { o << canonical_json(split_report_json(dg, lg.names)); });
            std::cerr << dg.split_groups.size() << " of " << laps.count(radius) << " LAP vertices split\n";
            return 0;
        }

        if (*embed_cmd) {
            auto lg = in.graph();
            auto cfg = embed_config();
            Embedding emb;
            if (cfg.init == InitKind::aligned) {
                if (reference.empty()) throw ConfigError("--init aligned needs --reference");
                auto ref = load_document(reference);
                std::unordered_map<std::string, Point2> by_name;
                for (const auto& p : ref.points)
                    by_name.emplace(p.source_id.value_or(std::to_string(p.id)), Point2{p.x, p.y});
                std::vector<std::optional<Point2>> anchors(lg.graph.vertex_count());
                for (VertexId v = 0; v < anchors.size(); ++v) {
                    if (parse_copy_name(lg.names[v]).second) continue; // copies start at their neighbors' mean
                    auto it = by_name.find(lg.names[v]);
                    if (it == by_name.end()) throw InputError("vertex '" + lg.names[v] + "' missing from reference");
                    anchors[v] = it->second;
                }
                auto init_layout = anchored_init(lg.graph, anchors);
                emb = embed(lg.graph, cfg, &init_layout);
            } else {
                emb = embed(lg.graph, cfg);
            }
            auto doc = document_from_graph(lg, emb, cfg.init == InitKind::aligned ? "disambiguated" : "standard");
            doc.metadata["embedding"] = provenance_json(emb.provenance);
            with_output(out_path, [&](std::ostream& o) { write_document(o, doc); });
            if (!svg_path.empty()) with_output(svg_path, [&](std::ostream& o) { write_svg(o, doc); });
            return 0;
        }

        if (*metrics_cmd) {
            if (against == "embedding") {
                if (layouts.size() != 2) throw ConfigError("--against embedding needs exactly two documents");
                auto a = document_layout(load_document(layouts[0]));
                auto b = document_layout(load_document(layouts[1]));
                const double v = preserved_nn_at_k(a, b, k);
                with_output(out_path, [&](std::ostream& o) { o << "preserved_nn\t" << detail::format_double(v) << '\n'; });
                return 0;
            }
            const auto m = parse_metric(metric);
            if (against == "data") {
                if (layouts.size() != 1) throw ConfigError("--against data needs exactly one document");
                auto data = in.dataset();
                auto emb = rows_layout(load_document(layouts[0]), data.rows);
                const double v = preserved_nn_at_k(neighbor_sets(emb, k), neighbor_sets(data, k, m), k);
                auto tc = trustworthiness_continuity(data, emb, k, m);
                with_output(out_path, [&](std::ostream& o) {
                    o << "# preserved_nn\t" << detail::format_double(v) << '\n';
                    o << "point\ttrustworthiness\tcontinuity\n";
                    for (std::size_t i = 0; i < tc.size(); ++i)
                        o << (data.ids.empty() ? std::to_string(i) : data.ids[i]) << '\t'
                          << detail::format_double(tc[i].trustworthiness) << '\t'
                          << detail::format_double(tc[i].continuity) << '\n';
                });
                return 0;
            }
            if (against == "rho") {
                auto data = in.dataset();
                std::vector<Embedding> p, q;
                for (const auto& f : p_layouts) p.push_back(rows_layout(load_document(f), data.rows));
                for (const auto& f : layouts) q.push_back(rows_layout(load_document(f), data.rows));
                auto report = rho_ratios(p, q, data, k, m);
                with_output(out_path, [&](std::ostream& o) {
                    o << "ratio\tvalue\n";
                    for (double v : report.rho_2d) o << "rho_2d\t" << detail::format_double(v) << '\n';
                    for (double v : report.rho_hd) o << "rho_hd\t" << detail::format_double(v) << '\n';
                    o << "# flagged rho_2d " << report.flagged_2d << ", rho_hd " << report.flagged_hd << '\n';
                });
                return 0;
            }
            throw ConfigError("--against must be embedding, data or rho");
        }

        if (*synth_cmd) {
            auto s = generate_synthetic(synth);
            with_output(out_path, [&](std::ostream& o) { write_delimited(o, s.data); });
            if (!truth_path.empty())
                with_output(truth_path, [&](std::ostream& o) {
                    o << "id\tplanted\tcluster\tparent_a\tparent_b\n";
                    for (std::size_t i = 0; i < s.data.rows; ++i)
                        o << s.data.ids[i] << '\t' << s.planted[i] << '\t' << s.cluster[i] << '\t'
                          << s.parents[i].first << '\t' << s.parents[i].second << '\n';
                });
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    }
    return 0;
}
