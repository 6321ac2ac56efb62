#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace ambidr {

struct SparsifierConfig {
    double epsilon = 0.7;
    double sample_constant = 4.0;
    double solver_tolerance = 1e-8;
    std::size_t jl_dim = 0;            ///< 0 selects ceil(24 ln N / eps^2), capped at 256
    std::size_t exact_threshold = 500; ///< N at or below which resistances are exact
    std::size_t max_cg_iterations = 0; ///< 0 selects max(1000, 10 N)
    std::uint64_t seed = 0;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
        if (!(sample_constant > 0.0)) throw ConfigError("sample constant must be positive");
        if (!(solver_tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
    }

    std::size_t effective_jl_dim(std::size_t n) const {
        if (jl_dim > 0) return jl_dim;
        const double d = std::ceil(24.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))) / (epsilon * epsilon));
        return std::min<std::size_t>(256, static_cast<std::size_t>(d));
    }
};

/// x^T L x computed edge by edge: sum of w_uv (x_u - x_v)^2.
inline double laplacian_quadratic(const WeightedGraph& g, std::span<const double> x) {
    if (x.size() != g.vertex_count())
        throw InputError("vector length " + std::to_string(x.size()) + " does not match vertex count " +
                         std::to_string(g.vertex_count()));
    double s = 0.0;
    for (const auto& e : g.edges()) {
        const double d = x[e.u] - x[e.v];
        s += e.weight * d * d;
    }
    return s;
}

/// y = L x.
inline void laplacian_apply(const WeightedGraph& g, std::span<const double> x, std::span<double> y) {
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        double acc = 0.0;
        for (const auto& nb : g.neighbors(v)) acc += nb.weight * (x[v] - x[nb.vertex]);
        y[v] = acc;
    }
}

struct CgResult {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Subtracts the per-component mean so x is orthogonal to every component's
/// constant vector (the nullspace of L).
inline void remove_component_means(std::span<double> x, const ComponentLabeling& comps) {
    std::vector<double> sum(comps.count, 0.0);
    std::vector<std::size_t> size(comps.count, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum[comps.labels[i]] += x[i];
        ++size[comps.labels[i]];
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= sum[comps.labels[i]] / static_cast<double>(size[comps.labels[i]]);
}

/// Jacobi-preconditioned conjugate gradient for L x = b, where b must sum to
/// zero on every component. Starts from x = 0; the returned solution is
/// orthogonalized against the constant vector of each component.
inline CgResult solve_laplacian(const WeightedGraph& g, const ComponentLabeling& comps, std::span<const double> b,
                                std::span<double> x, double tolerance, std::size_t max_iterations) {
    const std::size_t n = g.vertex_count();
    std::vector<double> inv_diag(n), r(b.begin(), b.end()), z(n), p(n), q(n);
    for (VertexId v = 0; v < n; ++v) {
        const double d = g.weighted_degree(v);
        inv_diag[v] = d > 0.0 ? 1.0 / d : 1.0;
    }
    std::fill(x.begin(), x.end(), 0.0);

    auto dot = [n](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i];
        return s;
    };

    CgResult res;
    const double b_norm = std::sqrt(dot(r, r));
    if (b_norm == 0.0) {
        res.converged = true;
        return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
        laplacian_apply(g, p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.relative_residual = std::sqrt(dot(r, r)) / b_norm;
        if (res.relative_residual < tolerance) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    remove_component_means(x, comps);
    return res;
}

/// Effective resistance of every edge, parallel to WeightedGraph::edges().
struct EffectiveResistances {
    std::vector<double> values;
    bool exact = true;
    std::size_t jl_dim = 0;            ///< projections used (0 when exact)
    std::size_t max_cg_iterations = 0; ///< worst solve (JL path)
    bool all_converged = true;
};

/// Exact resistances. Per connected component, M = L + J/n is inverted
/// densely; M^{-1} agrees with the pseudoinverse on every difference vector
/// e_u - e_v of the component.
inline EffectiveResistances exact_effective_resistances(const WeightedGraph& g) {
    EffectiveResistances res;
    res.values.assign(g.edge_count(), 0.0);
    const auto comps = connected_components(g);
    std::vector<std::vector<VertexId>> members(comps.count);
    std::vector<Eigen::Index> local(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        local[v] = static_cast<Eigen::Index>(members[comps.labels[v]].size());
        members[comps.labels[v]].push_back(v);
    }
    std::vector<Eigen::MatrixXd> inverses(comps.count);
    for (std::size_t c = 0; c < comps.count; ++c) {
        const auto nc = static_cast<Eigen::Index>(members[c].size());
        if (nc < 2) continue;
        Eigen::MatrixXd m = Eigen::MatrixXd::Constant(nc, nc, 1.0 / static_cast<double>(nc));
        for (VertexId v : members[c]) {
            for (const auto& nb : g.neighbors(v)) {
                m(local[v], local[v]) += nb.weight;
                m(local[v], local[nb.vertex]) -= nb.weight;
            }
        }
        inverses[c] = m.llt().solve(Eigen::MatrixXd::Identity(nc, nc));
    }
    const auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& inv = inverses[comps.labels[edges[e].u]];
        const auto a = local[edges[e].u], b = local[edges[e].v];
        res.values[e] = inv(a, a) + inv(b, b) - 2.0 * inv(a, b);
    }
    return res;
}

/// Johnson-Lindenstrauss sketch: R_uv ~ |Z (e_u - e_v)|^2 with
/// Z = Q W^{1/2} B L^+, Q a jl_dim x |E| matrix of +-1/sqrt(jl_dim). Each row
/// of Z is one Laplacian solve. Projection i draws its signs from a generator
/// seeded by (seed, i), so the result is independent of scheduling.
inline EffectiveResistances sketched_effective_resistances(const WeightedGraph& g, const SparsifierConfig& cfg) {
    const std::size_t n = g.vertex_count(), dim = cfg.effective_jl_dim(n);
    const auto edges = g.edges();
    const std::size_t max_iter = cfg.max_cg_iterations ? cfg.max_cg_iterations : std::max<std::size_t>(1000, 10 * n);
    auto comps = connected_components(g);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));

    std::vector<double> sketch(dim * n);
    std::vector<CgResult> solves(dim);
    parallel_for(dim, [&](std::size_t i) {
        Rng rng(splitmix64(cfg.seed ^ splitmix64(0x5eed0000ULL + i)));
        std::vector<double> rhs(n, 0.0);
        for (const auto& e : edges) {
            const double s = ((rng() >> 63) ? scale : -scale) * std::sqrt(e.weight);
            rhs[e.u] += s;
            rhs[e.v] -= s;
        }
        solves[i] = solve_laplacian(g, comps, rhs, std::span<double>(sketch.data() + i * n, n), cfg.solver_tolerance,
                                    max_iter);
    }, 1);

    EffectiveResistances res;
    res.exact = false;
    res.jl_dim = dim;
    for (const auto& s : solves) {
        res.max_cg_iterations = std::max(res.max_cg_iterations, s.iterations);
        res.all_converged = res.all_converged && s.converged;
    }
    res.values.assign(edges.size(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        const double* z = sketch.data() + i * n;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const double d = z[edges[e].u] - z[edges[e].v];
            res.values[e] += d * d;
        }
    }
    return res;
}

inline EffectiveResistances effective_resistances(const WeightedGraph& g, const SparsifierConfig& cfg) {
    if (g.vertex_count() <= cfg.exact_threshold) return exact_effective_resistances(g);
    return sketched_effective_resistances(g, cfg);
}

struct SparsifyReport {
    std::size_t samples = 0;        ///< q
    std::size_t input_edges = 0;
    std::size_t sampled_edges = 0;  ///< distinct edges drawn
    std::size_t repaired_edges = 0; ///< edges added back to restore connectivity
    std::size_t output_edges = 0;
    bool exact_resistances = true;
    std::size_t jl_dim = 0;
    std::size_t max_cg_iterations = 0;
    double leverage_sum = 0.0; ///< sum of w_e R_e (N - components, by Foster's theorem)
};

/// Number of samples q = ceil(C N ln N / eps^2).
inline std::size_t sample_count(std::size_t n, const SparsifierConfig& cfg) {
    const double nn = static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(cfg.sample_constant * nn * std::log(nn) / (cfg.epsilon * cfg.epsilon)));
}

/// Spectral sparsification by leverage-score sampling: q edges are drawn with
/// replacement with probability p_e proportional to w_e R_e, each draw adding
/// w_e / (q p_e). If sampling disconnects a component, the heaviest original
/// edges across the new cuts are restored at their original weight until the
/// component count matches the input.
inline WeightedGraph sparsify(const WeightedGraph& g, const SparsifierConfig& cfg, const EffectiveResistances& r,
                              SparsifyReport* report = nullptr) {
    cfg.validate();
    const auto edges = g.edges();
    if (r.values.size() != edges.size()) throw InvariantError("resistances do not match the edge list");
    SparsifyReport rep;
    rep.input_edges = edges.size();
    rep.exact_resistances = r.exact;
    rep.jl_dim = r.jl_dim;
    rep.max_cg_iterations = r.max_cg_iterations;
    if (edges.empty() || g.vertex_count() < 2) {
        if (report) *report = rep;
        return g;
    }

    std::vector<double> cumulative(edges.size());
    double total = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        total += edges[e].weight * r.values[e];
        cumulative[e] = total;
    }
    rep.leverage_sum = total;
    if (!(total > 0.0) || !std::isfinite(total)) throw InvariantError("degenerate leverage scores");

    const std::size_t q = sample_count(g.vertex_count(), cfg);
    rep.samples = q;
    std::vector<std::uint32_t> counts(edges.size(), 0);
    Rng rng(derive_seed(cfg.seed, "sparsify-sampling"));
    for (std::size_t s = 0; s < q; ++s) {
        const double u = uniform01(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        ++counts[static_cast<std::size_t>(it - cumulative.begin())];
    }

    std::vector<Edge> kept;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!counts[e]) continue;
        const double p = edges[e].weight * r.values[e] / total;
        kept.push_back({edges[e].u, edges[e].v, counts[e] * edges[e].weight / (static_cast<double>(q) * p)});
    }
    rep.sampled_edges = kept.size();

    // Connectivity repair (Kruskal over the heaviest unsampled edges).
    const std::size_t target = connected_components(g).count;
    std::vector<VertexId> parent(g.vertex_count());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](VertexId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = g.vertex_count();
    for (const auto& e : kept) {
        auto a = find(e.u), b = find(e.v);
        if (a != b) parent[a] = b, --components;
    }
    if (components > target) {
        std::vector<std::size_t> order;
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (!counts[e]) order.push_back(e);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return edges[a].weight > edges[b].weight; });
        for (std::size_t e : order) {
            if (components == target) break;
            auto a = find(edges[e].u), b = find(edges[e].v);
            if (a == b) continue;
            parent[a] = b;
            --components;
            kept.push_back(edges[e]);
            ++rep.repaired_edges;
        }
    }
    WeightedGraph out(g.vertex_count(), std::move(kept));
    rep.output_edges = out.edge_count();
    if (report) *report = rep;
    return out;
}

inline WeightedGraph sparsify(const WeightedGraph& g, const SparsifierConfig& cfg, SparsifyReport* report = nullptr) {
    cfg.validate();
    return sparsify(g, cfg, effective_resistances(g, cfg), report);
}

} // namespace ambidr
