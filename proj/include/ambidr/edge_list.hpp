#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "graph.hpp"

namespace ambidr {

/// A graph together with the external name of every vertex.
struct LabeledGraph {
    WeightedGraph graph;
    std::vector<std::string> names;
};

// Edge-list text format: one `src<TAB>dst<TAB>weight` per line (any run of
// blanks also separates fields); '#' starts a comment line. The writer
// additionally emits `#@vertex <name>` lines in id order so that vertex
// numbering and isolated vertices survive a round trip; other readers see
// them as comments.
//
// If every name is a non-negative integer, names are taken as dense vertex
// ids (vertex count = max + 1). Otherwise names are interned in order of
// first appearance.

namespace detail {

inline bool parse_index(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s.size() > 10) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace detail

inline LabeledGraph read_edge_list(std::istream& in) {
    struct RawEdge {
        std::string a, b;
        double w;
        std::size_t line;
    };
    std::vector<std::string> declared;
    std::vector<RawEdge> raw;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("#@vertex ", 0) == 0) {
            declared.push_back(line.substr(9));
            continue;
        }
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string a, b, w, extra;
        if (!(fields >> a >> b >> w)) throw ParseError("expected `src dst weight`", no);
        if (fields >> extra) throw ParseError("unexpected trailing field '" + extra + "'", no);
        auto weight = detail::parse_double(w);
        if (!weight) throw ParseError("weight is not a number: '" + w + "'", no);
        if (!(*weight > 0.0) || !std::isfinite(*weight))
            throw InputError("line " + std::to_string(no) + ": weight must be positive and finite");
        if (a == b) throw InputError("line " + std::to_string(no) + ": self-loop on '" + a + "'");
        raw.push_back({std::move(a), std::move(b), *weight, no});
    }
    if (raw.empty()) throw InputError("no edges");

    bool dense = true;
    std::uint64_t max_index = 0;
    auto check_dense = [&](const std::string& s) {
        std::uint64_t x = 0;
        if (!detail::parse_index(s, x) || (s.size() > 1 && s[0] == '0')) {
            dense = false;
            return;
        }
        max_index = std::max(max_index, x);
    };
    for (const auto& d : declared) check_dense(d);
    for (const auto& e : raw) {
        check_dense(e.a);
        check_dense(e.b);
    }

    LabeledGraph out;
    std::vector<Edge> edges;
    edges.reserve(raw.size());
    if (dense) {
        out.names.resize(max_index + 1);
        for (std::size_t i = 0; i < out.names.size(); ++i) out.names[i] = std::to_string(i);
        for (const auto& e : raw)
            edges.push_back({static_cast<VertexId>(std::stoull(e.a)), static_cast<VertexId>(std::stoull(e.b)), e.w});
    } else {
        std::unordered_map<std::string, VertexId> ids;
        auto intern = [&](const std::string& name) {
            auto [it, fresh] = ids.try_emplace(name, static_cast<VertexId>(out.names.size()));
            if (fresh) out.names.push_back(name);
            return it->second;
        };
        for (const auto& d : declared) intern(d);
        for (const auto& e : raw) edges.push_back({intern(e.a), intern(e.b), e.w});
    }
    out.graph = WeightedGraph(out.names.size(), std::move(edges));
    return out;
}

inline LabeledGraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g, std::span<const std::string> names) {
    if (names.size() != g.vertex_count()) throw InvariantError("name table does not match graph");
    out << "# ambidr edge list: " << g.vertex_count() << " vertices, " << g.edge_count() << " edges\n";
    for (const auto& n : names) out << "#@vertex " << n << '\n';
    for (const auto& e : g.edges())
        out << names[e.u] << '\t' << names[e.v] << '\t' << detail::format_double(e.weight) << '\n';
}

inline void write_edge_list(std::ostream& out, const LabeledGraph& lg) { write_edge_list(out, lg.graph, lg.names); }

/// Names "0", "1", ... for graphs without an external id table.
inline std::vector<std::string> index_names(std::size_t n) {
    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) names[i] = std::to_string(i);
    return names;
}

} // namespace ambidr
