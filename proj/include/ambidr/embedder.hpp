#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "splitter.hpp"

namespace ambidr {

enum class InitKind { spectral, aligned, random };

inline InitKind parse_init(std::string_view s) {
    if (s == "spectral") return InitKind::spectral;
    if (s == "aligned") return InitKind::aligned;
    if (s == "random") return InitKind::random;
    throw ConfigError("unknown init '" + std::string(s) + "' (expected spectral, aligned or random)");
}

inline const char* to_string(InitKind k) {
    switch (k) {
    case InitKind::spectral: return "spectral";
    case InitKind::aligned: return "aligned";
    case InitKind::random: return "random";
    }
    return "?";
}

struct EmbedConfig {
    int epochs = 500;
    double initial_lr = 1.0;
    int negatives = 5;
    double curve_a = 1.577;
    double curve_b = 0.895;
    std::uint64_t seed = 0;
    InitKind init = InitKind::spectral;
    bool parallel = false; ///< lock-free updates, not reproducible

    void validate() const {
        if (epochs < 1) throw ConfigError("epochs must be at least 1");
        if (negatives < 0) throw ConfigError("negative sample count must be non-negative");
        if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ConfigError("learning rate must be positive");
        if (!(curve_a > 0.0) || !(curve_b > 0.0)) throw ConfigError("curve parameters must be positive");
    }
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

struct EmbedProvenance {
    std::string init = "none";
    bool fallback = false; ///< spectral init fell back to random placement
    std::uint64_t seed = 0;
    std::uint64_t graph_fingerprint = 0;
    int epochs = 0;
    int negatives = 0;
    double initial_lr = 0.0;
    double curve_a = 0.0;
    double curve_b = 0.0;
    bool parallel = false;
};

struct Embedding {
    std::vector<Point2> positions;
    EmbedProvenance provenance;

    std::size_t size() const noexcept { return positions.size(); }
};

/// FNV-1a over the vertex count and the normalized edge list.
inline std::uint64_t graph_fingerprint(const WeightedGraph& g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(g.vertex_count());
    for (const auto& e : g.edges()) {
        mix(e.u);
        mix(e.v);
        mix(std::bit_cast<std::uint64_t>(e.weight));
    }
    return h;
}

// Low-dimensional similarity phi(d) = 1 / (1 + a d^(2b)), written in terms of
// the squared distance d2.

inline double log_phi(double d2, double a, double b) { return -std::log1p(a * std::pow(d2, b)); }

inline double log_one_minus_phi(double d2, double a, double b) {
    const double t = a * std::pow(d2, b);
    return std::log(t) - std::log1p(t);
}

/// d log(phi) / d y_i = coefficient * (y_i - y_j).
inline double attractive_coefficient(double d2, double a, double b) {
    if (d2 <= 0.0) return 0.0;
    const double t = std::pow(d2, b);
    return -2.0 * a * b * t / d2 / (1.0 + a * t);
}

/// d log(1 - phi) / d y_i = coefficient * (y_i - y_j).
inline double repulsive_coefficient(double d2, double a, double b) {
    return 2.0 * b / (d2 * (1.0 + a * std::pow(d2, b)));
}

inline constexpr double gradient_clip = 4.0;
inline constexpr double min_repulsion_d2 = 1e-3;
inline constexpr double init_extent = 10.0;

inline double clip_gradient(double g) { return std::clamp(g, -gradient_clip, gradient_clip); }

inline Embedding random_init(std::size_t n, std::uint64_t seed) {
    Embedding out;
    out.positions.resize(n);
    Rng rng(seed);
    for (auto& p : out.positions) {
        p.x = uniform(rng, -init_extent, init_extent);
        p.y = uniform(rng, -init_extent, init_extent);
    }
    out.provenance.init = "random";
    out.provenance.seed = seed;
    return out;
}

/// Two leading non-trivial eigenvectors of D^-1/2 A D^-1/2 on one component
/// (equivalently the two smallest non-trivial ones of the normalized
/// Laplacian), indexed by position in `vertices`.
struct SpectralBasis {
    std::vector<double> u2, u3;
    double mu2 = 0.0, mu3 = 0.0; ///< eigenvalues of I + D^-1/2 A D^-1/2
    int iterations = 0;
    bool converged = false;
};

inline constexpr double spectral_tolerance = 1e-6;
inline constexpr int spectral_max_iterations = 2000;
inline constexpr double spectral_degeneracy_gap = 1e-6;

/// Orthogonal (block power) iteration on M = I + D^-1/2 A D^-1/2, deflated
/// against the known top eigenvector D^1/2 1, with a 2x2 Rayleigh-Ritz
/// rotation at each convergence check. `vertices` must be one sorted
/// connected component with at least three vertices.
inline SpectralBasis spectral_basis(const WeightedGraph& g, std::span<const VertexId> vertices, std::uint64_t seed,
                                    double tol = spectral_tolerance, int max_iterations = spectral_max_iterations) {
    const std::size_t n = vertices.size();
    if (n < 3) throw InvariantError("spectral basis needs a component with at least three vertices");
    std::vector<double> inv_sqrt_deg(n), top(n);
    double top_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = g.weighted_degree(vertices[i]);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
        top[i] = std::sqrt(d);
        top_norm += d;
    }
    top_norm = std::sqrt(top_norm);
    for (double& t : top) t /= top_norm;

    auto local = [&](VertexId v) {
        return static_cast<std::size_t>(std::lower_bound(vertices.begin(), vertices.end(), v) - vertices.begin());
    };
    // Component-local CSR copy so the iteration does not search per edge.
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& nb : g.neighbors(vertices[i])) {
            const std::size_t j = local(nb.vertex);
            cols.push_back(j);
            vals.push_back(nb.weight * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
        }
        offsets[i + 1] = cols.size();
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) s += vals[p] * x[cols[p]];
            y[i] = s;
        }
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };
    auto axpy = [&](std::vector<double>& y, double alpha, const std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
    };
    auto normalize = [&](std::vector<double>& x) {
        const double nx = std::sqrt(dot(x, x));
        if (nx > 0.0)
            for (double& t : x) t /= nx;
    };
    auto orthonormalize = [&](std::vector<double>& a, std::vector<double>& b) {
        axpy(a, -dot(a, top), top);
        normalize(a);
        axpy(b, -dot(b, top), top);
        axpy(b, -dot(b, a), a);
        normalize(b);
    };

    Rng rng(seed);
    std::vector<double> v1(n), v2(n), w1(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        v1[i] = standard_normal(rng);
        v2[i] = standard_normal(rng);
    }
    orthonormalize(v1, v2);

    SpectralBasis out;
    for (int it = 1; it <= max_iterations; ++it) {
        apply(v1, w1);
        apply(v2, w2);
        out.iterations = it;
        if (it % 10 == 0 || it == max_iterations) {
            // Rayleigh-Ritz on span{v1, v2}.
            const double h11 = dot(v1, w1), h12 = dot(v1, w2), h22 = dot(v2, w2);
            const double mean = 0.5 * (h11 + h22), diff = 0.5 * (h11 - h22);
            const double rad = std::hypot(diff, h12);
            const double l1 = mean + rad, l2 = mean - rad;
            const double theta = 0.5 * std::atan2(2.0 * h12, h11 - h22);
            const double c = std::cos(theta), s = std::sin(theta);
            std::vector<double> r1(n), r2(n), m1(n), m2(n);
            for (std::size_t i = 0; i < n; ++i) {
                r1[i] = c * v1[i] + s * v2[i];
                r2[i] = -s * v1[i] + c * v2[i];
                m1[i] = c * w1[i] + s * w2[i];
                m2[i] = -s * w1[i] + c * w2[i];
            }
            double res1 = 0.0, res2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                res1 += (m1[i] - l1 * r1[i]) * (m1[i] - l1 * r1[i]);
                res2 += (m2[i] - l2 * r2[i]) * (m2[i] - l2 * r2[i]);
            }
            out.u2 = r1;
            out.u3 = r2;
            out.mu2 = l1;
            out.mu3 = l2;
            if (std::sqrt(std::max(res1, res2)) < tol) {
                out.converged = true;
                break;
            }
            v1 = std::move(m1);
            v2 = std::move(m2);
        } else {
            std::swap(v1, w1);
            std::swap(v2, w2);
        }
        orthonormalize(v1, v2);
    }
    return out;
}

/// Spectral layout of every component, scaled so the largest coordinate
/// magnitude is 10, components laid out on a grid. Components of size <= 2
/// and components whose eigenvalues are degenerate are placed at random.
inline Embedding spectral_init(const WeightedGraph& g, std::uint64_t seed = 0) {
    const std::size_t n = g.vertex_count();
    Embedding out;
    out.positions.resize(n);
    out.provenance.init = "spectral";
    out.provenance.seed = seed;
    const auto labels = connected_components(g);
    std::vector<std::vector<VertexId>> groups(labels.count);
    for (VertexId v = 0; v < n; ++v) groups[labels.labels[v]].push_back(v);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(labels.count))));
    constexpr double spacing = 25.0;

    Rng rng(seed);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& vs = groups[c];
        const double ox = spacing * static_cast<double>(c % cols), oy = spacing * static_cast<double>(c / cols);
        std::vector<Point2> local(vs.size());
        bool placed = false;
        if (vs.size() >= 3) {
            auto basis = spectral_basis(g, vs, derive_seed(seed, "spectral-" + std::to_string(c)));
            if (std::abs(basis.mu2 - basis.mu3) >= spectral_degeneracy_gap) {
                double extent = 0.0;
                for (std::size_t i = 0; i < vs.size(); ++i) {
                    const double s = 1.0 / std::sqrt(g.weighted_degree(vs[i]));
                    local[i] = {basis.u2[i] * s, basis.u3[i] * s};
                    extent = std::max({extent, std::abs(local[i].x), std::abs(local[i].y)});
                }
                if (extent > 0.0 && std::isfinite(extent)) {
                    for (auto& p : local) p = {p.x * init_extent / extent, p.y * init_extent / extent};
                    placed = true;
                }
            }
            if (!placed) out.provenance.fallback = true;
        }
        if (!placed) {
            if (vs.size() == 1) {
                local[0] = {0.0, 0.0};
            } else {
                for (auto& p : local) p = {uniform(rng, -init_extent, init_extent), uniform(rng, -init_extent, init_extent)};
            }
        }
        for (std::size_t i = 0; i < vs.size(); ++i) out.positions[vs[i]] = {local[i].x + ox, local[i].y + oy};
    }
    return out;
}

/// Vertices with an anchor keep it; every other vertex is placed at the mean
/// of its anchored neighbors.
inline Embedding anchored_init(const WeightedGraph& g, std::span<const std::optional<Point2>> anchors) {
    if (anchors.size() != g.vertex_count()) throw InvariantError("anchor table does not match graph");
    Embedding out;
    out.positions.resize(g.vertex_count());
    out.provenance.init = "aligned";
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (anchors[v]) {
            out.positions[v] = *anchors[v];
            continue;
        }
        double sx = 0.0, sy = 0.0;
        std::size_t count = 0;
        for (const auto& nb : g.neighbors(v)) {
            if (!anchors[nb.vertex]) continue;
            sx += anchors[nb.vertex]->x;
            sy += anchors[nb.vertex]->y;
            ++count;
        }
        if (count == 0) throw InvariantError("vertex " + std::to_string(v) + " has no positioned neighbor");
        out.positions[v] = {sx / static_cast<double>(count), sy / static_cast<double>(count)};
    }
    return out;
}

/// Initializes a layout of G'_r from a layout of Gbar: unsplit vertices keep
/// their reference coordinates, each copy of a split vertex starts at the
/// mean reference position of the neighbors it inherited.
inline Embedding aligned_init(const Embedding& reference, const DisambiguatedGraph& dg) {
    std::size_t originals = 0;
    for (std::size_t v = 0; v < dg.origin.size(); ++v)
        if (dg.copy_index[v] == 0) originals = std::max<std::size_t>(originals, dg.origin[v] + 1);
    if (reference.size() < originals)
        throw InputError("reference layout has " + std::to_string(reference.size()) + " points, expected " +
                         std::to_string(originals));
    Embedding out;
    out.positions.resize(dg.graph.vertex_count());
    out.provenance.init = "aligned";
    for (VertexId v = 0; v < dg.graph.vertex_count(); ++v)
        if (!dg.is_split_copy(v)) out.positions[v] = reference.positions[dg.origin[v]];
    for (const auto& set : dg.split_sets) {
        if (!set.is_split()) continue;
        for (const auto& copy : set.copies) {
            if (copy.edges.empty()) throw InvariantError("split copy without neighbors");
            double sx = 0.0, sy = 0.0;
            for (const auto& nb : copy.edges) {
                sx += reference.positions.at(nb.vertex).x;
                sy += reference.positions.at(nb.vertex).y;
            }
            const auto k = static_cast<double>(copy.edges.size());
            out.positions[copy.id] = {sx / k, sy / k};
        }
    }
    return out;
}

namespace detail {

struct DirectedEdge {
    VertexId head, tail;
    double epochs_per_sample;
};

// Reads and writes go through atomic_ref in parallel mode so concurrent
// updates are races on values, not undefined behavior.
template <bool Atomic>
struct Coord {
    static double load(double& x) {
        if constexpr (Atomic)
            return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
        else
            return x;
    }
    static void add(double& x, double delta) {
        if constexpr (Atomic) {
            std::atomic_ref<double> r(x);
            r.store(r.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
        } else {
            x += delta;
        }
    }
};

template <bool Atomic>
struct EdgeState {
    double next_sample;
    double next_negative;
};

template <bool Atomic>
void process_edge(std::vector<double>& xy, std::size_t n, const DirectedEdge& e, EdgeState<Atomic>& st,
                  double epoch, double alpha, double per_negative, const EmbedConfig& cfg, Rng& rng) {
    using C = Coord<Atomic>;
    const std::size_t j = e.head, k = e.tail;
    {
        const double dx = C::load(xy[2 * j]) - C::load(xy[2 * k]);
        const double dy = C::load(xy[2 * j + 1]) - C::load(xy[2 * k + 1]);
        const double coeff = attractive_coefficient(dx * dx + dy * dy, cfg.curve_a, cfg.curve_b);
        const double gx = clip_gradient(coeff * dx) * alpha, gy = clip_gradient(coeff * dy) * alpha;
        C::add(xy[2 * j], gx);
        C::add(xy[2 * j + 1], gy);
        C::add(xy[2 * k], -gx);
        C::add(xy[2 * k + 1], -gy);
    }
    st.next_sample += e.epochs_per_sample;
    if (cfg.negatives == 0) return;

    const auto draws = static_cast<long>((epoch - st.next_negative) / per_negative);
    for (long p = 0; p < draws; ++p) {
        const std::size_t m = uniform_index(rng, n);
        if (m == j) continue;
        const double dx = C::load(xy[2 * j]) - C::load(xy[2 * m]);
        const double dy = C::load(xy[2 * j + 1]) - C::load(xy[2 * m + 1]);
        const double d2 = std::max(dx * dx + dy * dy, min_repulsion_d2);
        const double coeff = repulsive_coefficient(d2, cfg.curve_a, cfg.curve_b);
        C::add(xy[2 * j], clip_gradient(coeff * dx) * alpha);
        C::add(xy[2 * j + 1], clip_gradient(coeff * dy) * alpha);
    }
    st.next_negative += static_cast<double>(std::max(draws, 0L)) * per_negative;
}

} // namespace detail

/// SGD layout of g. Each undirected edge is visited in both directions on an
/// epochs-per-sample schedule proportional to its weight; each visit pulls
/// both endpoints together and pushes the head away from `negatives` random
/// vertices. Without `init`, cfg.init selects spectral or random placement
/// (aligned placement needs an explicit init).
inline Embedding embed(const WeightedGraph& g, const EmbedConfig& cfg, const Embedding* init = nullptr) {
    cfg.validate();
    const std::size_t n = g.vertex_count();
    if (n == 0) throw InputError("cannot embed an empty graph");
    Embedding out;
    if (init) {
        if (init->size() != n) throw InputError("initial layout size does not match graph");
        out = *init;
    } else if (cfg.init == InitKind::spectral) {
        out = spectral_init(g, derive_seed(cfg.seed, "spectral-init"));
    } else if (cfg.init == InitKind::random) {
        out = random_init(n, derive_seed(cfg.seed, "random-init"));
    } else {
        throw ConfigError("aligned initialization needs a reference layout");
    }
    for (const auto& p : out.positions)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InputError("initial layout has non-finite coordinates");
    out.provenance.seed = cfg.seed;
    out.provenance.graph_fingerprint = graph_fingerprint(g);
    out.provenance.epochs = cfg.epochs;
    out.provenance.negatives = cfg.negatives;
    out.provenance.initial_lr = cfg.initial_lr;
    out.provenance.curve_a = cfg.curve_a;
    out.provenance.curve_b = cfg.curve_b;
    out.provenance.parallel = cfg.parallel;
    if (g.edge_count() == 0) return out;

    double wmax = 0.0;
    for (const auto& e : g.edges()) wmax = std::max(wmax, e.weight);
    std::vector<detail::DirectedEdge> directed;
    directed.reserve(2 * g.edge_count());
    for (const auto& e : g.edges()) {
        const double eps = wmax / e.weight;
        directed.push_back({e.u, e.v, eps});
        directed.push_back({e.v, e.u, eps});
    }

    std::vector<double> xy(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        xy[2 * i] = out.positions[i].x;
        xy[2 * i + 1] = out.positions[i].y;
    }

    const double epochs = static_cast<double>(cfg.epochs);
    auto run = [&]<bool Atomic>() {
        std::vector<detail::EdgeState<Atomic>> state(directed.size());
        std::vector<double> per_negative(directed.size());
        for (std::size_t i = 0; i < directed.size(); ++i) {
            per_negative[i] = cfg.negatives > 0 ? directed[i].epochs_per_sample / cfg.negatives : 0.0;
            state[i] = {directed[i].epochs_per_sample, per_negative[i]};
        }
        Rng rng(derive_seed(cfg.seed, "embed-negatives"));
        constexpr std::size_t block = 1024;
        const std::size_t blocks = (directed.size() + block - 1) / block;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            const double alpha = cfg.initial_lr * (1.0 - static_cast<double>(epoch) / epochs);
            const auto t = static_cast<double>(epoch);
            if constexpr (!Atomic) {
                for (std::size_t i = 0; i < directed.size(); ++i)
                    if (state[i].next_sample <= t)
                        detail::process_edge<false>(xy, n, directed[i], state[i], t, alpha, per_negative[i], cfg, rng);
            } else {
                parallel_for(blocks, [&](std::size_t b) {
                    Rng local(derive_seed(cfg.seed, "embed-negatives") ^ splitmix64((std::uint64_t(epoch) << 32) | b));
                    const std::size_t end = std::min(directed.size(), (b + 1) * block);
                    for (std::size_t i = b * block; i < end; ++i)
                        if (state[i].next_sample <= t)
                            detail::process_edge<true>(xy, n, directed[i], state[i], t, alpha, per_negative[i], cfg,
                                                       local);
                }, 1);
            }
        }
    };
    if (cfg.parallel && thread_count() > 1)
        run.template operator()<true>();
    else
        run.template operator()<false>();

    for (std::size_t i = 0; i < n; ++i) {
        out.positions[i] = {xy[2 * i], xy[2 * i + 1]};
        if (!std::isfinite(xy[2 * i]) || !std::isfinite(xy[2 * i + 1]))
            throw InvariantError("layout diverged to non-finite coordinates");
    }
    return out;
}

} // namespace ambidr
