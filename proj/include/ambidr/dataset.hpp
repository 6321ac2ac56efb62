#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace ambidr {

/// Dense row-major numeric matrix with optional per-row labels and ids.
struct Dataset {
    std::size_t rows = 0;
    std::size_t dims = 0;
    std::vector<double> values;
    std::vector<std::string> labels; ///< empty, or one per row
    std::vector<std::string> ids;    ///< empty, or one per row

    std::span<const double> row(std::size_t i) const { return {values.data() + i * dims, dims}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * dims, dims}; }

    void validate() const {
        if (rows < 2) throw InputError("dataset needs at least 2 rows");
        if (dims < 1) throw InputError("dataset needs at least 1 column");
        if (values.size() != rows * dims) throw InputError("dataset is not rectangular");
        if (!labels.empty() && labels.size() != rows) throw InputError("label count does not match rows");
        if (!ids.empty() && ids.size() != rows) throw InputError("id count does not match rows");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw InputError("non-finite value at row " + std::to_string(i / dims) + ", column " +
                                 std::to_string(i % dims));
    }
};

namespace detail {

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return x;
}

inline std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    if (delim == ' ') {
        std::istringstream in(line);
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(delim, start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

/// Column selection for delimited input. A column is given either by
/// 0-based index or by header name.
struct DelimitedOptions {
    std::optional<std::string> label_col;
    std::optional<std::string> id_col;
    char delimiter = 0; ///< 0 = sniff from the first line (tab, comma, else whitespace)
};

/// Reads delimiter-separated numeric text. The first line is treated as a
/// header when any of its data fields is not a number. Lines starting with
/// '#' and blank lines are skipped.
inline Dataset read_delimited(std::istream& in, const DelimitedOptions& opts = {}) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.emplace_back(no, line);
    }
    if (lines.empty()) throw InputError("dataset file has no rows");

    char delim = opts.delimiter;
    if (delim == 0) {
        const auto& first = lines.front().second;
        delim = first.find('\t') != std::string::npos ? '\t' : first.find(',') != std::string::npos ? ',' : ' ';
    }

    auto first_fields = detail::split_fields(lines.front().second, delim);
    const std::size_t width = first_fields.size();

    auto as_index = [](const std::optional<std::string>& spec) -> std::optional<std::size_t> {
        if (!spec) return std::nullopt;
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(spec->data(), spec->data() + spec->size(), idx);
        if (ec != std::errc{} || ptr != spec->data() + spec->size()) return std::nullopt;
        return idx;
    };
    auto named = [&](const std::optional<std::string>& spec) { return spec && !as_index(spec); };

    // Selecting a column by name implies a header; otherwise the first line is
    // a header iff one of its data fields is not numeric.
    bool has_header = named(opts.label_col) || named(opts.id_col);
    if (!has_header) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c == as_index(opts.label_col) || c == as_index(opts.id_col)) continue;
            if (!detail::parse_double(first_fields[c])) has_header = true;
        }
    }

    auto resolve = [&](const std::optional<std::string>& spec) -> std::optional<std::size_t> {
        if (!spec) return std::nullopt;
        if (auto idx = as_index(spec)) {
            if (*idx >= width) throw ConfigError("column index " + *spec + " out of range");
            return idx;
        }
        for (std::size_t i = 0; i < width; ++i)
            if (first_fields[i] == *spec) return i;
        throw ConfigError("column '" + *spec + "' not found in header");
    };
    const auto label_idx = resolve(opts.label_col);
    const auto id_idx = resolve(opts.id_col);

    Dataset ds;
    for (std::size_t c = 0; c < width; ++c)
        if (c != label_idx && c != id_idx) ++ds.dims;
    for (std::size_t li = has_header ? 1 : 0; li < lines.size(); ++li) {
        const auto& [no, text] = lines[li];
        auto fields = detail::split_fields(text, delim);
        if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()), no);
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_idx || c == id_idx) continue;
            auto v = detail::parse_double(fields[c]);
            if (!v) throw ParseError("field " + std::to_string(c) + " is not a number: '" + fields[c] + "'", no);
            ds.values.push_back(*v);
        }
        if (label_idx) ds.labels.push_back(fields[*label_idx]);
        if (id_idx) ds.ids.push_back(fields[*id_idx]);
        ++ds.rows;
    }
    ds.validate();
    return ds;
}

/// Writes `id,label,x0,...` (id/label columns only when present) with a header.
inline void write_delimited(std::ostream& out, const Dataset& ds) {
    bool first = true;
    auto sep = [&] {
        if (!first) out << ',';
        first = false;
    };
    if (!ds.ids.empty()) sep(), out << "id";
    if (!ds.labels.empty()) sep(), out << "label";
    for (std::size_t c = 0; c < ds.dims; ++c) sep(), out << 'x' << c;
    out << '\n';
    for (std::size_t i = 0; i < ds.rows; ++i) {
        first = true;
        if (!ds.ids.empty()) sep(), out << ds.ids[i];
        if (!ds.labels.empty()) sep(), out << ds.labels[i];
        for (double v : ds.row(i)) sep(), out << detail::format_double(v);
        out << '\n';
    }
}

// Binary matrix: "AMBD1", u64 rows, u64 dims, rows*dims float64, all little-endian.
inline constexpr std::string_view binary_magic = "AMBD1";

namespace detail {

template <class T>
T from_le(T x) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(x);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return x;
}

} // namespace detail

inline Dataset read_binary(std::istream& in) {
    char magic[5];
    if (!in.read(magic, 5) || std::string_view(magic, 5) != binary_magic)
        throw InputError("not an AMBD1 matrix file");
    std::uint64_t rows = 0, dims = 0;
    if (!in.read(reinterpret_cast<char*>(&rows), 8) || !in.read(reinterpret_cast<char*>(&dims), 8))
        throw InputError("truncated AMBD1 header");
    rows = detail::from_le(rows);
    dims = detail::from_le(dims);
    if (dims == 0 || rows > (std::uint64_t{1} << 40) / dims) throw InputError("implausible AMBD1 dimensions");
    Dataset ds;
    ds.rows = rows;
    ds.dims = dims;
    ds.values.resize(rows * dims);
    if (!in.read(reinterpret_cast<char*>(ds.values.data()), static_cast<std::streamsize>(rows * dims * 8)))
        throw InputError("truncated AMBD1 payload");
    for (auto& v : ds.values) v = detail::from_le(v);
    ds.validate();
    return ds;
}

inline void write_binary(std::ostream& out, const Dataset& ds) {
    out.write(binary_magic.data(), 5);
    std::uint64_t rows = detail::from_le<std::uint64_t>(ds.rows), dims = detail::from_le<std::uint64_t>(ds.dims);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&dims), 8);
    for (double v : ds.values) {
        double le = detail::from_le(v);
        out.write(reinterpret_cast<const char*>(&le), 8);
    }
}

/// Opens `path`, dispatching on the AMBD1 magic.
inline Dataset load_dataset(const std::string& path, const DelimitedOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    char magic[5] = {};
    in.read(magic, 5);
    in.clear();
    in.seekg(0);
    if (std::string_view(magic, 5) == binary_magic) return read_binary(in);
    return read_delimited(in, opts);
}

} // namespace ambidr
