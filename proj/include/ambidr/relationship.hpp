#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "parallel.hpp"

namespace ambidr {

enum class Metric { euclidean, cosine };

inline Metric parse_metric(std::string_view s) {
    if (s == "euclidean") return Metric::euclidean;
    if (s == "cosine") return Metric::cosine;
    throw ConfigError("unknown metric '" + std::string(s) + "' (expected euclidean or cosine)");
}

inline const char* to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine"; }

struct RelationshipConfig {
    std::size_t k = 15;
    Metric metric = Metric::euclidean;
    std::uint64_t seed = 0; ///< recorded only; tie-breaking is by vertex id
};

/// Row i holds the k nearest other rows, ordered by (distance, id).
struct KnnIndex {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<VertexId> ids;
    std::vector<double> distances;

    std::span<const VertexId> neighbors(std::size_t i) const { return {ids.data() + i * k, k}; }
    std::span<const double> dists(std::size_t i) const { return {distances.data() + i * k, k}; }
};

/// Cosine distance 1 - cos(a, b). A zero vector is at distance 1 from any
/// non-zero vector and 0 from another zero vector.
inline double cosine_distance(std::span<const double> a, std::span<const double> b, double norm_a, double norm_b) {
    if (norm_a == 0.0 || norm_b == 0.0) return (norm_a == 0.0 && norm_b == 0.0) ? 0.0 : 1.0;
    double dot = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
    return std::max(0.0, 1.0 - dot / (norm_a * norm_b));
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return std::sqrt(s);
}

/// Brute-force exact kNN over `rows` points of dimension `dims` stored row-major.
inline KnnIndex exact_knn(std::span<const double> values, std::size_t rows, std::size_t dims, std::size_t k,
                          Metric metric = Metric::euclidean) {
    if (k < 1 || k >= rows)
        throw ConfigError("k must satisfy 1 <= k < N (k=" + std::to_string(k) + ", N=" + std::to_string(rows) + ")");
    if (values.size() != rows * dims) throw InputError("matrix is not rectangular");
    for (double v : values)
        if (!std::isfinite(v)) throw InputError("non-finite value in input matrix");

    std::vector<double> norms;
    if (metric == Metric::cosine) {
        norms.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t d = 0; d < dims; ++d) s += values[i * dims + d] * values[i * dims + d];
            norms[i] = std::sqrt(s);
        }
    }

    KnnIndex index;
    index.n = rows;
    index.k = k;
    index.ids.resize(rows * k);
    index.distances.resize(rows * k);
    parallel_for(rows, [&](std::size_t i) {
        std::vector<std::pair<double, VertexId>> cand;
        cand.reserve(rows - 1);
        auto xi = values.subspan(i * dims, dims);
        for (std::size_t j = 0; j < rows; ++j) {
            if (j == i) continue;
            auto xj = values.subspan(j * dims, dims);
            double d = metric == Metric::euclidean ? euclidean_distance(xi, xj)
                                                   : cosine_distance(xi, xj, norms[i], norms[j]);
            cand.emplace_back(d, static_cast<VertexId>(j));
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t t = 0; t < k; ++t) {
            index.ids[i * k + t] = cand[t].second;
            index.distances[i * k + t] = cand[t].first;
        }
    }, 16);
    return index;
}

inline KnnIndex exact_knn(const Dataset& data, const RelationshipConfig& cfg) {
    if (cfg.k < 2) throw ConfigError("k must be at least 2");
    if (cfg.k >= data.rows) throw ConfigError("k must be smaller than the number of rows");
    return exact_knn(data.values, data.rows, data.dims, cfg.k, cfg.metric);
}

/// Per-instance local connectivity of the fuzzy kNN graph.
struct LocalScale {
    double rho = 0.0;   ///< distance to the nearest neighbor
    double sigma = 1.0; ///< bandwidth
};

inline constexpr int smooth_knn_iterations = 64;
inline constexpr double smooth_knn_tolerance = 1e-5;
inline constexpr double min_k_dist_scale = 1e-3;

/// Sum over neighbors of exp(-max(0, d - rho) / sigma).
inline double membership_sum(std::span<const double> dists, double rho, double sigma) {
    double s = 0.0;
    for (double d : dists) s += std::exp(-std::max(0.0, d - rho) / sigma);
    return s;
}

/// Finds sigma with membership_sum(dists, rho, sigma) = log2(k) by bisection
/// (doubling until bracketed). The result is floored at 1e-3 times the mean
/// neighbor distance (or `global_mean` when rho is 0) to keep it positive.
inline LocalScale smooth_knn_scale(std::span<const double> dists, double global_mean) {
    LocalScale out;
    out.rho = dists.empty() ? 0.0 : dists.front();
    const double target = std::log2(static_cast<double>(dists.size()));
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
    for (int it = 0; it < smooth_knn_iterations; ++it) {
        const double psum = membership_sum(dists, out.rho, mid);
        if (std::abs(psum - target) < smooth_knn_tolerance) break;
        if (psum > target) {
            hi = mid;
            mid = 0.5 * (lo + hi);
        } else {
            lo = mid;
            mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
        }
    }
    out.sigma = mid;
    if (out.rho > 0.0) {
        const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
        out.sigma = std::max(out.sigma, min_k_dist_scale * mean);
    } else {
        out.sigma = std::max(out.sigma, min_k_dist_scale * global_mean);
    }
    if (!(out.sigma > 0.0)) out.sigma = std::numeric_limits<double>::min();
    return out;
}

/// Fuzzy simplicial kNN graph: directed memberships exp(-max(0, d - rho_i)/sigma_i),
/// symmetrized with the probabilistic t-conorm a + b - ab. Memberships that
/// underflow to zero are dropped.
inline WeightedGraph fuzzy_graph(const KnnIndex& knn, std::vector<LocalScale>* scales_out = nullptr) {
    const std::size_t n = knn.n, k = knn.k;
    const double global_mean =
        knn.distances.empty() ? 0.0
                              : std::accumulate(knn.distances.begin(), knn.distances.end(), 0.0) /
                                    static_cast<double>(knn.distances.size());

    std::vector<LocalScale> scales(n);
    parallel_for(n, [&](std::size_t i) { scales[i] = smooth_knn_scale(knn.dists(i), global_mean); }, 64);

    struct Directed {
        VertexId lo, hi;
        bool forward; // lo -> hi
        double w;
    };
    std::vector<Directed> directed;
    directed.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        auto nbrs = knn.neighbors(i);
        auto dists = knn.dists(i);
        for (std::size_t t = 0; t < k; ++t) {
            const double w = std::exp(-std::max(0.0, dists[t] - scales[i].rho) / scales[i].sigma);
            const auto a = static_cast<VertexId>(i), b = nbrs[t];
            directed.push_back({std::min(a, b), std::max(a, b), a < b, w});
        }
    }
    std::sort(directed.begin(), directed.end(), [](const Directed& x, const Directed& y) {
        if (x.lo != y.lo) return x.lo < y.lo;
        if (x.hi != y.hi) return x.hi < y.hi;
        return x.forward < y.forward;
    });

    std::vector<Edge> edges;
    edges.reserve(directed.size());
    for (std::size_t i = 0; i < directed.size();) {
        double a = 0.0, b = 0.0;
        std::size_t j = i;
        for (; j < directed.size() && directed[j].lo == directed[i].lo && directed[j].hi == directed[i].hi; ++j)
            (directed[j].forward ? a : b) = directed[j].w;
        const double w = a + b - a * b;
        if (w > 0.0) edges.push_back({directed[i].lo, directed[i].hi, std::min(w, 1.0)});
        i = j;
    }
    if (scales_out) *scales_out = std::move(scales);
    return WeightedGraph(n, std::move(edges));
}

/// Relationship phase: exact kNN followed by the fuzzy graph.
inline WeightedGraph relationship_graph(const Dataset& data, const RelationshipConfig& cfg) {
    data.validate();
    return fuzzy_graph(exact_knn(data, cfg));
}

} // namespace ambidr
