#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace ambidr {

/// Gaussian clusters plus points planted halfway between two cluster centers.
struct SyntheticSpec {
    std::size_t clusters = 3;
    std::size_t cluster_size = 200;
    std::size_t dims = 10;
    double separation = 8.0;  ///< distance between centroids, in units of cluster_std
    double cluster_std = 1.0;
    std::size_t planted = 1;
    double planted_noise = 0.05; ///< std of the planted points' jitter, in units of cluster_std
    std::uint64_t seed = 0;

    void validate() const {
        if (!(separation > 0.0)) throw ConfigError("separation must be positive");
        if (!(cluster_std > 0.0)) throw ConfigError("cluster std must be positive");
        if (!(planted_noise >= 0.0)) throw ConfigError("planted noise must be non-negative");
        if (clusters < 1 || cluster_size < 1 || dims < 1) throw ConfigError("empty synthetic spec");
        if (planted > 0 && clusters < 2) throw ConfigError("planted points need at least two clusters");
        if (clusters * cluster_size + planted < 2) throw ConfigError("synthetic data needs at least two rows");
    }
};

struct SyntheticData {
    Dataset data;
    std::vector<std::vector<double>> centroids;
    std::vector<int> cluster;                  ///< per row; -1 for planted rows
    std::vector<bool> planted;                 ///< ground-truth ambiguity
    std::vector<std::pair<int, int>> parents;  ///< per row; (-1, -1) unless planted
};

/// Rows are the clusters in order, followed by the planted points. With at
/// least as many dimensions as clusters the centroids sit on distinct random
/// axes (so every pair is exactly `separation` apart); otherwise they point in
/// random directions.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SyntheticData out;
    const double sep = spec.separation * spec.cluster_std;
    out.centroids.assign(spec.clusters, std::vector<double>(spec.dims, 0.0));
    if (spec.dims >= spec.clusters) {
        std::vector<std::size_t> axes(spec.dims);
        std::iota(axes.begin(), axes.end(), 0);
        for (std::size_t i = axes.size(); i > 1; --i) std::swap(axes[i - 1], axes[uniform_index(rng, i)]);
        for (std::size_t c = 0; c < spec.clusters; ++c) out.centroids[c][axes[c]] = sep / std::sqrt(2.0);
    } else {
        for (auto& c : out.centroids) {
            double norm = 0.0;
            for (double& x : c) {
                x = standard_normal(rng);
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (double& x : c) x *= sep / std::sqrt(2.0) / norm;
        }
    }

    auto& ds = out.data;
    ds.dims = spec.dims;
    auto add_row = [&](const std::vector<double>& center, double std_dev, std::string label) {
        for (std::size_t d = 0; d < spec.dims; ++d) ds.values.push_back(center[d] + std_dev * standard_normal(rng));
        ds.ids.push_back("p" + std::to_string(ds.rows));
        ds.labels.push_back(std::move(label));
        ++ds.rows;
    };
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        for (std::size_t i = 0; i < spec.cluster_size; ++i) {
            add_row(out.centroids[c], spec.cluster_std, "c" + std::to_string(c));
            out.cluster.push_back(static_cast<int>(c));
            out.planted.push_back(false);
            out.parents.emplace_back(-1, -1);
        }
    }
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t a = 0; a < spec.clusters; ++a)
        for (std::size_t b = a + 1; b < spec.clusters; ++b) pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    for (std::size_t p = 0; p < spec.planted; ++p) {
        const auto [a, b] = pairs[p % pairs.size()];
        std::vector<double> mid(spec.dims);
        for (std::size_t d = 0; d < spec.dims; ++d) mid[d] = 0.5 * (out.centroids[a][d] + out.centroids[b][d]);
        add_row(mid, spec.planted_noise * spec.cluster_std, "c" + std::to_string(a) + "|c" + std::to_string(b));
        out.cluster.push_back(-1);
        out.planted.push_back(true);
        out.parents.emplace_back(a, b);
    }
    return out;
}

} // namespace ambidr
