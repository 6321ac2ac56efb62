#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "document.hpp"

namespace ambidr {

// Static scatter of a projection document for headless snapshots. Unsplit
// points are circles, split copies are crosses drawn on top, and the copies
// of each split origin are joined by dashed lines.
inline void write_svg(std::ostream& out, const ProjectionDocument& doc, double size = 800.0) {
    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double lo_x = std::numeric_limits<double>::max(), hi_x = std::numeric_limits<double>::lowest();
    double lo_y = lo_x, hi_y = hi_x;
    for (const auto& p : doc.points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    const double margin = 20.0;
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    const double scale = (size - 2 * margin) / span;
    auto sx = [&](double x) { return margin + (x - lo_x) * scale; };
    auto sy = [&](double y) { return size - margin - (y - lo_y) * scale; };

    std::map<std::string, std::size_t> label_index;
    for (const auto& p : doc.points)
        if (p.label) label_index.emplace(*p.label, 0);
    std::size_t next = 0;
    for (auto& [label, idx] : label_index) idx = next++;
    auto color = [&](const DocumentPoint& p) {
        return p.label ? palette[label_index[*p.label] % std::size(palette)] : "#444444";
    };

    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& p : doc.points) {
        if (p.is_split) continue;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\" fill-opacity=\"0.7\"/>\n",
                      sx(p.x), sy(p.y), color(p));
        out << buf;
    }
    for (const auto& g : doc.split_groups) {
        for (std::size_t a = 0; a < g.points.size(); ++a)
            for (std::size_t b = a + 1; b < g.points.size(); ++b) {
                const auto& p = doc.points.at(g.points[a]);
                const auto& q = doc.points.at(g.points[b]);
                std::snprintf(buf, sizeof buf,
                              "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\" "
                              "stroke-width=\"0.8\" stroke-dasharray=\"4 3\"/>\n",
                              sx(p.x), sy(p.y), sx(q.x), sy(q.y));
                out << buf;
            }
    }
    for (const auto& p : doc.points) {
        if (!p.is_split) continue;
        const double x = sx(p.x), y = sy(p.y), h = 5.0;
        std::snprintf(buf, sizeof buf,
                      "<path d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                      x - h, y - h, x + h, y + h, x - h, y + h, x + h, y - h, color(p));
        out << buf;
    }
    out << "</svg>\n";
}

} // namespace ambidr
