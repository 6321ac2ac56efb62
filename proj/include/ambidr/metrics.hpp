#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "detector.hpp"
#include "embedder.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "relationship.hpp"
#include "splitter.hpp"

namespace ambidr {

/// Row i holds the k nearest other points of i, ordered by (distance, id).
struct NeighborSets {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<VertexId> ids;

    std::span<const VertexId> row(std::size_t i) const { return {ids.data() + i * k, k}; }
};

inline std::vector<double> flatten(const Embedding& emb) {
    std::vector<double> xy(2 * emb.size());
    for (std::size_t i = 0; i < emb.size(); ++i) {
        xy[2 * i] = emb.positions[i].x;
        xy[2 * i + 1] = emb.positions[i].y;
    }
    return xy;
}

inline NeighborSets neighbor_sets(std::span<const double> values, std::size_t rows, std::size_t dims, std::size_t k,
                                  Metric metric = Metric::euclidean) {
    if (k < 1 || k >= rows) throw InputError("neighbor count must satisfy 1 <= k < N");
    auto knn = exact_knn(values, rows, dims, k, metric);
    return {rows, k, std::move(knn.ids)};
}

inline NeighborSets neighbor_sets(const Embedding& emb, std::size_t k) {
    const auto xy = flatten(emb);
    return neighbor_sets(xy, emb.size(), 2, k);
}

inline NeighborSets neighbor_sets(const Dataset& data, std::size_t k, Metric metric = Metric::euclidean) {
    return neighbor_sets(data.values, data.rows, data.dims, k, metric);
}

/// Mean over points of |NN_k^A(i) ∩ NN_k^B(i)| / k, using the first k entries
/// of each row.
inline double preserved_nn_at_k(const NeighborSets& a, const NeighborSets& b, std::size_t k) {
    if (a.n != b.n) throw InputError("neighbor sets cover different point sets");
    if (k < 1 || k > a.k || k > b.k) throw InputError("k exceeds the neighbor-set length");
    double total = 0.0;
    std::vector<VertexId> ra(k), rb(k);
    for (std::size_t i = 0; i < a.n; ++i) {
        auto x = a.row(i), y = b.row(i);
        std::copy_n(x.begin(), k, ra.begin());
        std::copy_n(y.begin(), k, rb.begin());
        std::sort(ra.begin(), ra.end());
        std::sort(rb.begin(), rb.end());
        std::size_t shared = 0;
        for (std::size_t p = 0, q = 0; p < k && q < k;) {
            if (ra[p] < rb[q]) ++p;
            else if (rb[q] < ra[p]) ++q;
            else { ++shared; ++p; ++q; }
        }
        total += static_cast<double>(shared) / static_cast<double>(k);
    }
    return a.n == 0 ? 1.0 : total / static_cast<double>(a.n);
}

inline double preserved_nn_at_k(const Embedding& a, const Embedding& b, std::size_t k) {
    if (a.size() != b.size()) throw InputError("embeddings have different point counts");
    return preserved_nn_at_k(neighbor_sets(a, k), neighbor_sets(b, k), k);
}

struct RatioSummary {
    double min = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;
};

inline RatioSummary summarize(std::vector<double> values) {
    RatioSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    const std::size_t m = values.size() / 2;
    s.median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
    return s;
}

struct RatioReport {
    std::vector<double> rho_2d;
    std::vector<double> rho_hd;
    std::size_t flagged_2d = 0; ///< combinations with a zero denominator
    std::size_t flagged_hd = 0;
    RatioSummary summary_2d, summary_hd;
};

/// Sparsification-impact ratios. P holds layouts of G, Q layouts of Gbar.
/// rho_2d: every preservedNN(A in P, B in Q) over every preservedNN(A', B')
/// for distinct A', B' in P. rho_hd: every preservedNN(B in Q, X) over every
/// preservedNN(A in P, X). When Q and P share elements, a layout is never
/// compared with itself.
inline RatioReport rho_ratios(std::span<const Embedding> p, std::span<const Embedding> q, const Dataset& data,
                              std::size_t k, Metric metric = Metric::euclidean) {
    if (p.size() < 2) throw InputError("rho ratios need at least two layouts of the unsparsified graph");
    if (q.empty()) throw InputError("rho ratios need at least one layout of the sparsified graph");
    for (const auto& e : p)
        if (e.size() != data.rows) throw InputError("layout size does not match the dataset");
    for (const auto& e : q)
        if (e.size() != data.rows) throw InputError("layout size does not match the dataset");

    std::vector<NeighborSets> np, nq;
    for (const auto& e : p) np.push_back(neighbor_sets(e, k));
    for (const auto& e : q) nq.push_back(neighbor_sets(e, k));
    const auto nx = neighbor_sets(data, k, metric);

    std::vector<double> num_2d, den_2d, num_hd, den_hd;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            if (&p[i] != &q[j]) num_2d.push_back(preserved_nn_at_k(np[i], nq[j], k));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) den_2d.push_back(preserved_nn_at_k(np[i], np[j], k));
    for (const auto& s : nq) num_hd.push_back(preserved_nn_at_k(s, nx, k));
    for (const auto& s : np) den_hd.push_back(preserved_nn_at_k(s, nx, k));

    RatioReport out;
    auto combine = [](const std::vector<double>& num, const std::vector<double>& den, std::vector<double>& ratios,
                      std::size_t& flagged) {
        for (double a : num)
            for (double b : den) {
                if (b == 0.0) {
                    ++flagged;
                    continue;
                }
                ratios.push_back(a / b);
            }
    };
    combine(num_2d, den_2d, out.rho_2d, out.flagged_2d);
    combine(num_hd, den_hd, out.rho_hd, out.flagged_hd);
    out.summary_2d = summarize(out.rho_2d);
    out.summary_hd = summarize(out.rho_hd);
    return out;
}

struct PointQuality {
    double trustworthiness = 1.0;
    double continuity = 1.0;
};

namespace detail {

// Rank (1-based) of j among all points other than i, ordered by (distance, id).
inline std::size_t rank_of(std::span<const double> dist, std::size_t i, std::size_t j) {
    std::size_t r = 1;
    for (std::size_t l = 0; l < dist.size(); ++l) {
        if (l == i || l == j) continue;
        if (dist[l] < dist[j] || (dist[l] == dist[j] && l < j)) ++r;
    }
    return r;
}

inline std::vector<std::size_t> nearest(std::span<const double> dist, std::size_t i, std::size_t k) {
    std::vector<std::size_t> idx;
    idx.reserve(dist.size() - 1);
    for (std::size_t l = 0; l < dist.size(); ++l)
        if (l != i) idx.push_back(l);
    auto less = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), less);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace detail

/// Per-point trustworthiness and continuity (Venna and Kaski), scaled by
/// 2 / (k (2N - 3k - 1)) so each value lies in [0, 1].
inline std::vector<PointQuality> trustworthiness_continuity(const Dataset& data, const Embedding& emb, std::size_t k,
                                                            Metric metric = Metric::euclidean) {
    const std::size_t n = data.rows;
    if (emb.size() != n) throw InputError("layout size does not match the dataset");
    if (k < 1 || 2 * k >= n - 1) throw InputError("k must satisfy 1 <= k < (N - 1) / 2");
    std::vector<double> norms(n, 0.0);
    if (metric == Metric::cosine)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double v : data.row(i)) s += v * v;
            norms[i] = std::sqrt(s);
        }
    const double scale = 2.0 / (static_cast<double>(k) * (2.0 * n - 3.0 * k - 1.0));

    std::vector<PointQuality> out(n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> dh(n), dl(n);
        for (std::size_t j = 0; j < n; ++j) {
            dh[j] = metric == Metric::euclidean ? euclidean_distance(data.row(i), data.row(j))
                                                : cosine_distance(data.row(i), data.row(j), norms[i], norms[j]);
            const double dx = emb.positions[i].x - emb.positions[j].x, dy = emb.positions[i].y - emb.positions[j].y;
            dl[j] = std::sqrt(dx * dx + dy * dy);
        }
        const auto nh = detail::nearest(dh, i, k), nl = detail::nearest(dl, i, k);
        double t = 0.0, c = 0.0;
        for (std::size_t j : nl)
            if (!std::binary_search(nh.begin(), nh.end(), j)) t += static_cast<double>(detail::rank_of(dh, i, j) - k);
        for (std::size_t j : nh)
            if (!std::binary_search(nl.begin(), nl.end(), j)) c += static_cast<double>(detail::rank_of(dl, i, j) - k);
        out[i] = {1.0 - scale * t, 1.0 - scale * c};
    }, 16);
    return out;
}

/// Mean over vertices of |ball(v, r)| / N.
inline double coverage(const WeightedGraph& g, int r) {
    if (r < 0) throw ConfigError("coverage radius must be non-negative");
    const std::size_t n = g.vertex_count();
    if (n == 0) return 0.0;
    std::vector<double> sizes(n);
    parallel_for(n, [&](std::size_t v) { sizes[v] = static_cast<double>(induced_ball(g, static_cast<VertexId>(v), r).size()); }, 32);
    double s = 0.0;
    for (double x : sizes) s += x;
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

struct SplitMetricRow {
    VertexId vertex = 0;
    bool ambiguous = false; ///< in LAP_r
    bool split = false;     ///< received two or more copies
    std::size_t copies = 1;
    PointQuality quality;
};

/// Joins per-point quality of the unsplit layout with ambiguity and split flags.
inline std::vector<SplitMetricRow> split_metric_report(const LapSets& laps, int radius, const DisambiguatedGraph& dg,
                                                       std::span<const PointQuality> quality) {
    std::vector<SplitMetricRow> rows(quality.size());
    for (std::size_t v = 0; v < quality.size(); ++v) {
        rows[v].vertex = static_cast<VertexId>(v);
        rows[v].quality = quality[v];
    }
    for (const auto& m : laps.at(radius)) {
        if (m.vertex >= rows.size()) throw InputError("LAP vertex outside the quality table");
        rows[m.vertex].ambiguous = true;
    }
    for (const auto& [origin, group] : dg.split_groups) {
        if (origin >= rows.size()) throw InputError("split origin outside the quality table");
        rows[origin].split = true;
        rows[origin].copies = group.size();
    }
    return rows;
}

inline void write_split_metric_report(std::ostream& out, std::span<const SplitMetricRow> rows,
                                      std::span<const std::string> names = {}) {
    out << "vertex\tambiguous\tsplit\tcopies\ttrustworthiness\tcontinuity\n";
    for (const auto& r : rows) {
        out << (names.empty() ? std::to_string(r.vertex) : names[r.vertex]) << '\t' << r.ambiguous << '\t' << r.split
            << '\t' << r.copies << '\t' << detail::format_double(r.quality.trustworthiness) << '\t'
            << detail::format_double(r.quality.continuity) << '\n';
    }
}

} // namespace ambidr
