// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ambidr/ambidr.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ambidr;
using namespace fixture;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", name, seconds_since(start), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

oracle::Partition sorted(Decomposition d) {
    for (auto& c : d) std::sort(c.begin(), c.end());
    std::sort(d.begin(), d.end());
    return d;
}

std::string text(const ProjectionDocument& doc) {
    std::ostringstream out;
    write_document(out, doc);
    return out.str();
}

Outcome lap_oracle() {
    std::mt19937_64 rng(2024);
    double detect_time = 0.0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 10 + rng() % 191;
        const double density = std::array{1.2, 2.0, 3.0, 5.0, 10.0, 30.0}[t % 6] / static_cast<double>(n);
        auto g = t % 2 ? random_graph(n, density, rng()) : random_knn_graph(n, 2 + t % 4, rng());
        const auto hops = oracle::all_pairs_hops(g);
        int diameter = 1;
        for (const auto& row : hops)
            for (int d : row) diameter = std::max(diameter, d);
        // Beyond the largest hop distance every ball is its whole component.
        const int max_r = diameter + 1;
        auto naive = oracle::naive_lap_sets(g, max_r);
        const auto start = Clock::now();
        auto laps = detect(g);
        detect_time += seconds_since(start);
        for (int r = 1; r <= max_r; ++r) {
            const auto& want = naive[static_cast<std::size_t>(r - 1)];
            const auto got = laps.at(r);
            bool same = got.size() == want.size();
            for (std::size_t i = 0; same && i < got.size(); ++i)
                same = got[i].vertex == want[i].first && sorted(got[i].components) == want[i].second;
            if (!same) return {false, fmt("graph %d (N=%zu) differs at r=%d", t, n, r)};
        }
    }
    return {detect_time < 60.0, fmt("200 graphs equal, detect %.2fs", detect_time)};
}

Outcome eight_vertex_fixture() {
    auto laps = detect(eight_vertex());
    const bool ok = laps.contains(a, 1) && laps.contains(a, 2) && !laps.contains(a, 3) &&
                    sorted(laps.find(a, 1)->components) == oracle::Partition{{b, c}, {e, g}} &&
                    sorted(laps.find(a, 2)->components) == oracle::Partition{{b, c, d}, {e, f, g}};
    return {ok, ""};
}

Outcome split_rules() {
    SplitConfig cfg;
    auto ga = split_two_neighborhoods();
    auto da = disambiguate(ga, detect(ga), cfg);
    const bool a_ok = da.split_groups.size() == 1 && da.split_groups.at(0).size() == 2;

    auto gb = split_lap_bridge();
    auto db = disambiguate(gb, detect(gb), cfg);
    const bool b_ok = db.graph.vertex_count() == gb.vertex_count() && !db.graph.edge_weight(0, 5);

    auto gc = split_weak_component(0.01);
    auto dc = disambiguate(gc, detect(gc), cfg);
    bool c_ok = dc.split_groups.size() == 1 && dc.split_groups.at(0).size() == 2;
    if (c_ok) {
        const auto& comps = dc.split_sets.front().components;
        double smax = 0.0;
        for (const auto& c : comps) smax = std::max(smax, c.strength);
        for (const auto& c : comps) {
            const bool weak = c.strength < cfg.tau_w * smax;
            c_ok = c_ok && (weak == (c.fate == ComponentFate::weak));
            if (weak) c_ok = c_ok && std::find(c.members.begin(), c.members.end(), VertexId{9}) != c.members.end();
        }
    }
    return {a_ok && b_ok && c_ok, fmt("a=%d b=%d c=%d", a_ok, b_ok, c_ok)};
}

Outcome resistance() {
    bool exact_ok = true;
    double worst_exact = 0.0;
    auto check = [&](const WeightedGraph& g, double want) {
        for (double r : exact_effective_resistances(g).values) {
            worst_exact = std::max(worst_exact, std::abs(r - want));
            exact_ok = exact_ok && std::abs(r - want) <= 1e-9;
        }
    };
    check(path(12), 1.0);
    for (std::size_t n : {3u, 5u, 8u, 13u}) check(cycle(n), static_cast<double>(n - 1) / static_cast<double>(n));
    check(complete(3), 2.0 / 3.0);

    std::mt19937_64 rng(31);
    double worst_sketch = 0.0, worst_foster_jl = 0.0, worst_foster = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 20 + rng() % 281;
        auto g = random_connected_graph(n, 4.0 / static_cast<double>(n), rng());
        SparsifierConfig cfg;
        cfg.exact_threshold = 0;
        cfg.seed = rng();
        auto sketch = effective_resistances(g, cfg);
        auto exact = exact_effective_resistances(g);
        auto want = oracle::pinv_resistances(g);
        double rel = 0.0, foster_jl = 0.0, foster = 0.0;
        for (std::size_t e = 0; e < want.size(); ++e) {
            rel += std::abs(sketch.values[e] - want[e]) / want[e];
            foster_jl += g.edges()[e].weight * sketch.values[e];
            foster += g.edges()[e].weight * exact.values[e];
        }
        const double n1 = static_cast<double>(n - 1);
        worst_sketch = std::max(worst_sketch, rel / static_cast<double>(want.size()));
        worst_foster_jl = std::max(worst_foster_jl, std::abs(foster_jl - n1) / n1);
        worst_foster = std::max(worst_foster, std::abs(foster - n1));
    }
    const bool ok = exact_ok && worst_sketch < 0.10 && worst_foster_jl < 0.10 && worst_foster < 1e-6;
    return {ok, fmt("exact err %.1e, sketch mean rel err max %.3f, Foster JL %.3f exact %.1e", worst_exact,
                    worst_sketch, worst_foster_jl, worst_foster)};
}

Outcome spectral_bound() {
    const double eps = 0.5;
    int inside = 0, total = 0;
    std::size_t kept = 0, edges = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto g = random_connected_graph(200, 0.15, 500 + seed);
        SparsifierConfig cfg;
        cfg.epsilon = eps;
        cfg.seed = seed;
        auto h = sparsify(g, cfg);
        kept += h.edge_count();
        edges += g.edge_count();
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        for (int t = 0; t < 100; ++t) {
            std::vector<double> x(200);
            for (auto& v : x) v = nd(rng);
            const double ratio = laplacian_quadratic(h, x) / laplacian_quadratic(g, x);
            inside += ratio >= 1.0 - 1.5 * eps && ratio <= 1.0 + 1.5 * eps;
            ++total;
        }
    }
    return {inside * 100 >= total * 99,
            fmt("%d/%d vectors in band, kept %.0f%% of edges", inside, total, 100.0 * kept / edges)};
}

Outcome planted_recovery() {
    int recovered = 0, placed = 0;
    std::string misses;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        auto syn = generate_synthetic(spec);
        const VertexId planted = spec.clusters * spec.cluster_size;
        PipelineConfig cfg;
        cfg.master_seed = seed;
        cfg.compute_metrics = false;
        auto res = run_pipeline(syn.data, cfg);
        const auto& groups = res.setting.disambiguated.split_groups;
        const bool in_lap = res.prepared.laps.contains(planted, 2);
        if (!in_lap || !groups.count(planted) || groups.at(planted).size() != 2) {
            misses += fmt(" %llu%s", static_cast<unsigned long long>(seed), in_lap ? "(lap)" : "");
            continue;
        }
        ++recovered;

        std::vector<Point2> centroid(spec.clusters, Point2{0.0, 0.0});
        std::vector<double> count(spec.clusters, 0.0);
        for (VertexId v = 0; v < planted; ++v) {
            const auto c = static_cast<std::size_t>(syn.cluster[v]);
            centroid[c].x += res.setting.layout.positions[v].x;
            centroid[c].y += res.setting.layout.positions[v].y;
            count[c] += 1.0;
        }
        for (std::size_t c = 0; c < spec.clusters; ++c) centroid[c] = {centroid[c].x / count[c], centroid[c].y / count[c]};
        std::set<int> nearest;
        for (VertexId copy : groups.at(planted)) {
            const auto p = res.setting.layout.positions[copy];
            int best = 0;
            for (std::size_t c = 1; c < spec.clusters; ++c)
                if (std::hypot(p.x - centroid[c].x, p.y - centroid[c].y) <
                    std::hypot(p.x - centroid[best].x, p.y - centroid[best].y))
                    best = static_cast<int>(c);
            nearest.insert(best);
        }
        const auto [pa, pb] = syn.parents[planted];
        placed += nearest == std::set<int>{pa, pb};
    }
    return {recovered >= 8 && placed == recovered,
            fmt("recovered %d/10, copies placed by parents in %d; missed seeds:%s", recovered, placed, misses.c_str())};
}

Outcome gradient_check() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-3, 3), ua(0.5, 3.0), ub(0.5, 1.5);
    const double h = 1e-5;
    double worst = 0.0;
    for (int checked = 0; checked < 100;) {
        const double xi = pos(rng), yi = pos(rng), xj = pos(rng), yj = pos(rng), aa = ua(rng), bb = ub(rng);
        const double dx = xi - xj, dy = yi - yj;
        if (std::hypot(dx, dy) < 1e-3) continue;
        auto d2 = [&](double x, double y) { return (x - xj) * (x - xj) + (y - yj) * (y - yj); };
        auto fd = [&](auto f, bool along_x) {
            return along_x ? (f(d2(xi + h, yi), aa, bb) - f(d2(xi - h, yi), aa, bb)) / (2 * h)
                           : (f(d2(xi, yi + h), aa, bb) - f(d2(xi, yi - h), aa, bb)) / (2 * h);
        };
        const double ca = attractive_coefficient(dx * dx + dy * dy, aa, bb);
        const double cr = repulsive_coefficient(dx * dx + dy * dy, aa, bb);
        auto rel = [](double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-8); };
        for (double e : {rel(ca * dx, fd(log_phi, true)), rel(ca * dy, fd(log_phi, false)),
                         rel(cr * dx, fd(log_one_minus_phi, true)), rel(cr * dy, fd(log_one_minus_phi, false))})
            worst = std::max(worst, e);
        ++checked;
    }
    return {worst <= 1e-4, fmt("max relative error %.2e", worst)};
}

Embedding scatter(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Embedding e;
    for (std::size_t i = 0; i < n; ++i) e.positions.push_back({nd(rng), nd(rng)});
    return e;
}

Outcome metrics() {
    std::mt19937_64 rng(41);
    bool pnn_ok = true;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 10 + rng() % 50, k = 1 + rng() % 8;
        auto x = scatter(n, rng), y = scatter(n, rng);
        pnn_ok = pnn_ok && preserved_nn_at_k(x, x, k) == 1.0 &&
                 preserved_nn_at_k(x, y, k) == preserved_nn_at_k(y, x, k) && preserved_nn_at_k(x, y, n - 1) == 1.0;
    }
    Embedding l1, l2;
    for (double v : {0.0, 1.0, 5.0, 6.0}) l1.positions.push_back({v, 0.0});
    for (double v : {0.0, 1.0, 2.0, 6.0}) l2.positions.push_back({v, 0.0});
    const bool worked = preserved_nn_at_k(l1, l2, 2) == 0.875;

    bool tc_ok = true;
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        Dataset data;
        data.rows = 20;
        data.dims = 3;
        std::normal_distribution<double> nd;
        for (int i = 0; i < 60; ++i) data.values.push_back(nd(rng));
        Embedding ident, mirror;
        for (std::size_t i = 0; i < 20; ++i) {
            ident.positions.push_back({data.row(i)[0], data.row(i)[1]});
            mirror.positions.push_back({-data.row(i)[0], data.row(i)[1]});
        }
        Dataset flat;
        flat.rows = 20;
        flat.dims = 2;
        flat.values = flatten(ident);
        for (const auto* e : {&ident, &mirror})
            for (const auto& q : trustworthiness_continuity(flat, *e, 4))
                tc_ok = tc_ok && q.trustworthiness == 1.0 && q.continuity == 1.0;

        auto emb = scatter(20, rng);
        std::vector<std::vector<double>> high(20, std::vector<double>(20)), low = high;
        for (std::size_t i = 0; i < 20; ++i)
            for (std::size_t j = 0; j < 20; ++j) {
                high[i][j] = euclidean_distance(data.row(i), data.row(j));
                low[i][j] = std::hypot(emb.positions[i].x - emb.positions[j].x, emb.positions[i].y - emb.positions[j].y);
            }
        for (std::size_t k : {1u, 4u, 9u}) {
            auto got = trustworthiness_continuity(data, emb, k);
            auto want = oracle::trust_continuity(high, low, k);
            for (std::size_t i = 0; i < 20; ++i)
                worst = std::max({worst, std::abs(got[i].trustworthiness - want[i].first),
                                  std::abs(got[i].continuity - want[i].second)});
        }
    }
    return {pnn_ok && worked && tc_ok && worst <= 1e-9,
            fmt("pnn=%d example=%d identity/mirror=%d oracle err %.1e", pnn_ok, worked, tc_ok, worst)};
}

Outcome order_independence() {
    SyntheticSpec spec;
    auto syn = generate_synthetic(spec);
    PipelineConfig cfg;
    cfg.compute_metrics = false;
    auto run = prepare_run(syn.data, cfg);
    int checked = 0;
    for (const auto* g : {&run.sparsified}) {
        for (int r : {1, 2}) {
            SplitConfig sc{0.05, r};
            const auto members = run.laps.at(r);
            const auto lap_r = run.laps.vertices(r);
            const auto mask = make_mask(lap_r, g->vertex_count());
            const auto reference = disambiguate(*g, run.laps, sc);
            std::vector<std::size_t> order(members.size());
            std::iota(order.begin(), order.end(), 0);
            std::mt19937_64 rng(r);
            for (int t = 0; t < 20; ++t) {
                std::shuffle(order.begin(), order.end(), rng);
                std::vector<SplitSet> sets;
                for (auto i : order) sets.push_back(split_set(*g, members[i].vertex, sc, mask, members[i].components));
                auto dg = build_disambiguated(*g, lap_r, std::move(sets));
                if (canonical_edges(dg.graph) != canonical_edges(reference.graph) || dg.origin != reference.origin ||
                    dg.copy_index != reference.copy_index || dg.split_groups != reference.split_groups)
                    return {false, fmt("permutation %d differs at r=%d", t, r)};
                ++checked;
            }
        }
    }
    return {true, fmt("%d permutations identical (LAP_1 %zu, LAP_2 %zu vertices)", checked, run.laps.count(1),
                      run.laps.count(2))};
}

Outcome complexity() {
    std::vector<double> ns, detect_times;
    double full_10k = 0.0;
    std::string detail;
    for (std::size_t n : {2500u, 5000u, 10000u}) {
        SyntheticSpec spec;
        spec.clusters = 5;
        spec.cluster_size = n / 5;
        spec.planted = 0;
        spec.seed = n;
        auto syn = generate_synthetic(spec);
        PipelineConfig cfg;
        cfg.record_timings = true;
        const auto start = Clock::now();
        auto res = run_pipeline(syn.data, cfg);
        const double total = seconds_since(start);
        ns.push_back(static_cast<double>(n));
        // Sub-second stage; best of several repeats keeps scheduler noise out of the fit.
        double best = res.prepared.timings.at("detect");
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = Clock::now();
            auto again = detect(res.prepared.sparsified, cfg.detector);
            best = std::min(best, seconds_since(t0));
        }
        detect_times.push_back(best);
        if (n == 10000) full_10k = total;
        detail += fmt("N=%zu total %.1fs detect %.2fs; ", n, total, detect_times.back());
    }
    // Least-squares slope in log-log space.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        mx += std::log(ns[i]) / 3.0;
        my += std::log(detect_times[i]) / 3.0;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        sxy += (std::log(ns[i]) - mx) * (std::log(detect_times[i]) - my);
        sxx += (std::log(ns[i]) - mx) * (std::log(ns[i]) - mx);
    }
    const double exponent = sxy / sxx;
    return {full_10k < 300.0 && exponent < 1.5, detail + fmt("detect exponent %.2f", exponent)};
}

Outcome determinism() {
    SyntheticSpec spec;
    spec.seed = 5;
    auto syn = generate_synthetic(spec);
    PipelineConfig cfg;
    cfg.master_seed = 17;
    auto first = run_pipeline(syn.data, cfg);
    auto second = run_pipeline(syn.data, cfg);
    const bool ok = text(first.setting.document) == text(second.setting.document) &&
                    text(first.standard_document) == text(second.standard_document);
    return {ok, fmt("%zu split points", first.setting.document.split_groups.size())};
}

} // namespace

int main() {
    report("lap-oracle-equivalence", lap_oracle);
    report("eight-vertex-lap-fixture", eight_vertex_fixture);
    report("split-decision-rules", split_rules);
    report("effective-resistance", resistance);
    report("spectral-bound", spectral_bound);
    report("planted-ambiguity-recovery", planted_recovery);
    report("embedder-gradient", gradient_check);
    report("metrics", metrics);
    report("order-independence", order_independence);
    report("complexity-smoke", complexity);
    report("end-to-end-determinism", determinism);
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
