#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dataset.hpp"
#include "embedder.hpp"
#include "errors.hpp"
#include "graph.hpp"

namespace ambidr {

using Json = nlohmann::json;

inline constexpr int schema_version = 1;

struct DocumentPoint {
    VertexId id = 0;
    VertexId origin = 0;
    std::uint32_t copy = 0;
    double x = 0.0;
    double y = 0.0;
    bool is_split = false;
    std::optional<std::string> label;
    std::optional<std::string> source_id;

    bool operator==(const DocumentPoint&) const = default;
};

struct SplitGroup {
    VertexId origin = 0;
    std::vector<VertexId> points;

    bool operator==(const SplitGroup&) const = default;
};

/// Serialized result of one layout: points, dashed-link groups and free-form
/// metadata.
struct ProjectionDocument {
    std::string kind; ///< "standard" or "disambiguated"
    std::vector<DocumentPoint> points;
    std::vector<SplitGroup> split_groups;
    Json metadata = Json::object();

    bool operator==(const ProjectionDocument&) const = default;
};

/// Checks the schema invariants: ids equal positions, copy indices dense per
/// origin, split groups consistent with the points, coordinates finite.
inline void validate(const ProjectionDocument& doc) {
    std::map<VertexId, std::vector<std::pair<std::uint32_t, VertexId>>> by_origin;
    for (std::size_t i = 0; i < doc.points.size(); ++i) {
        const auto& p = doc.points[i];
        if (p.id != i) throw InputError("point ids must equal their position in the points array");
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InputError("point " + std::to_string(p.id) + " has non-finite coordinates");
        by_origin[p.origin].emplace_back(p.copy, p.id);
    }
    std::map<VertexId, std::vector<VertexId>> groups;
    for (auto& [origin, copies] : by_origin) {
        std::sort(copies.begin(), copies.end());
        for (std::size_t c = 0; c < copies.size(); ++c)
            if (copies[c].first != c)
                throw InputError("copy indices of origin " + std::to_string(origin) + " are not dense");
        const bool split = doc.points[copies.front().second].is_split;
        for (const auto& [c, id] : copies)
            if (doc.points[id].is_split != split) throw InputError("inconsistent is_split for origin " + std::to_string(origin));
        if (split != (copies.size() >= 2))
            throw InputError("origin " + std::to_string(origin) + ": is_split disagrees with its point count");
        if (split)
            for (const auto& [c, id] : copies) groups[origin].push_back(id);
    }
    if (groups.size() != doc.split_groups.size()) throw InputError("split_groups do not match the split points");
    for (const auto& g : doc.split_groups) {
        auto it = groups.find(g.origin);
        if (it == groups.end() || it->second != g.points)
            throw InputError("split group for origin " + std::to_string(g.origin) + " does not match its points");
    }
}

inline Json to_json(const ProjectionDocument& doc) {
    Json points = Json::array();
    for (const auto& p : doc.points) {
        Json j = {{"id", p.id}, {"origin", p.origin}, {"copy", p.copy},
                  {"x", p.x},   {"y", p.y},           {"is_split", p.is_split}};
        if (p.label) j["label"] = *p.label;
        if (p.source_id) j["source_id"] = *p.source_id;
        points.push_back(std::move(j));
    }
    Json groups = Json::array();
    for (const auto& g : doc.split_groups) groups.push_back({{"origin", g.origin}, {"points", g.points}});
    return {{"ambidr_schema", schema_version},
            {"kind", doc.kind},
            {"points", std::move(points)},
            {"split_groups", std::move(groups)},
            {"metadata", doc.metadata}};
}

inline ProjectionDocument from_json(const Json& j) {
    try {
        if (!j.is_object() || !j.contains("ambidr_schema")) throw InputError("not a projection document");
        if (j.at("ambidr_schema") != schema_version)
            throw InputError("unsupported schema version " + j.at("ambidr_schema").dump());
        ProjectionDocument doc;
        doc.kind = j.at("kind").get<std::string>();
        for (const auto& p : j.at("points")) {
            DocumentPoint q;
            q.id = p.at("id").get<VertexId>();
            q.origin = p.at("origin").get<VertexId>();
            q.copy = p.at("copy").get<std::uint32_t>();
            q.x = p.at("x").get<double>();
            q.y = p.at("y").get<double>();
            q.is_split = p.at("is_split").get<bool>();
            if (p.contains("label")) q.label = p["label"].get<std::string>();
            if (p.contains("source_id")) q.source_id = p["source_id"].get<std::string>();
            doc.points.push_back(std::move(q));
        }
        for (const auto& g : j.at("split_groups"))
            doc.split_groups.push_back({g.at("origin").get<VertexId>(), g.at("points").get<std::vector<VertexId>>()});
        doc.metadata = j.value("metadata", Json::object());
        validate(doc);
        return doc;
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed projection document: ") + e.what());
    }
}

namespace detail {

inline void dump_string(std::ostream& out, const std::string& s) {
    out << Json(s).dump(-1, ' ', false, Json::error_handler_t::replace);
}

inline void dump_number(std::ostream& out, double x) {
    if (!std::isfinite(x)) {
        out << "null";
        return;
    }
    auto s = format_double(x);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    out << s;
}

inline bool is_flat(const Json& j) {
    for (const auto& v : j)
        if (v.is_structured() && !v.empty()) return false;
    return true;
}

// Stable text form: keys sorted (nlohmann objects are std::map), floats with
// 17 significant digits, containers holding only scalars on one line.
inline void dump_canonical(std::ostream& out, const Json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out << "{}";
            return;
        }
        const bool flat = is_flat(j);
        out << '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            out << (first ? "" : ",");
            if (flat) out << (first ? "" : " ");
            else out << '\n' << inner;
            first = false;
            dump_string(out, it.key());
            out << ": ";
            dump_canonical(out, it.value(), indent + 1);
        }
        if (!flat) out << '\n' << pad;
        out << '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out << "[]";
            return;
        }
        const bool flat = is_flat(j);
        out << '[';
        bool first = true;
        for (const auto& v : j) {
            out << (first ? "" : ",");
            if (flat) out << (first ? "" : " ");
            else out << '\n' << inner;
            first = false;
            dump_canonical(out, v, indent + 1);
        }
        if (!flat) out << '\n' << pad;
        out << ']';
        return;
    }
    case Json::value_t::number_float: dump_number(out, j.get<double>()); return;
    case Json::value_t::string: dump_string(out, j.get_ref<const std::string&>()); return;
    default: out << j.dump(); return;
    }
}

} // namespace detail

inline std::string canonical_json(const Json& j) {
    std::ostringstream out;
    detail::dump_canonical(out, j, 0);
    out << '\n';
    return out.str();
}

inline void write_document(std::ostream& out, const ProjectionDocument& doc) {
    validate(doc);
    out << canonical_json(to_json(doc));
}

inline ProjectionDocument read_document(std::istream& in) {
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

inline void save_document(const std::string& path, const ProjectionDocument& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    write_document(out, doc);
}

inline ProjectionDocument load_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    return read_document(in);
}

/// Layout positions in point order.
inline Embedding document_layout(const ProjectionDocument& doc) {
    Embedding e;
    e.positions.reserve(doc.points.size());
    for (const auto& p : doc.points) e.positions.push_back({p.x, p.y});
    return e;
}

/// Index of a (radius, tau_w) grid of documents, for loading a sweep at once.
struct ManifestEntry {
    int radius = 2;
    double tau_w = 0.05;
    std::string path;

    bool operator==(const ManifestEntry&) const = default;
};

struct DocumentManifest {
    std::string standard; ///< path of the shared unsplit layout
    std::vector<ManifestEntry> documents;

    bool operator==(const DocumentManifest&) const = default;
};

inline Json to_json(const DocumentManifest& m) {
    Json docs = Json::array();
    for (const auto& e : m.documents) docs.push_back({{"radius", e.radius}, {"tau_w", e.tau_w}, {"path", e.path}});
    return {{"ambidr_manifest", schema_version}, {"standard", m.standard}, {"documents", std::move(docs)}};
}

inline DocumentManifest manifest_from_json(const Json& j) {
    try {
        if (!j.is_object() || j.value("ambidr_manifest", 0) != schema_version) throw InputError("not a document manifest");
        DocumentManifest m;
        m.standard = j.at("standard").get<std::string>();
        for (const auto& e : j.at("documents"))
            m.documents.push_back({e.at("radius").get<int>(), e.at("tau_w").get<double>(), e.at("path").get<std::string>()});
        return m;
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
}

inline void write_manifest(std::ostream& out, const DocumentManifest& m) { out << canonical_json(to_json(m)); }

inline DocumentManifest read_manifest(std::istream& in) {
    try {
        return manifest_from_json(Json::parse(in));
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace ambidr
