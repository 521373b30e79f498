#include "actrec/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "actrec/common.hpp"

namespace actrec {

namespace {

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char ch : raw) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

// Splits one CSV record, honoring quoted fields with doubled quotes.
std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_csv_double(const std::string& field) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size()) {
        throw ParseError("bad numeric CSV field '" + field + "'");
    }
    return v;
}

std::string xml_escape(const std::string& raw) {
    std::string out;
    for (char ch : raw) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

}  // namespace

std::string confusion_csv(const ConfusionMatrix& m, const std::vector<std::string>& classes) {
    const std::size_t c = m.counts.shape()[0];
    if (classes.size() != c) throw ParamError("class name count does not match matrix size");
    std::string out = "prediction";
    for (const std::string& name : classes) out += "," + csv_field(name);
    out += "\n";
    for (std::size_t i = 0; i < c; ++i) {
        out += csv_field(classes[i]);
        for (std::size_t j = 0; j < c; ++j) {
            out += "," + std::to_string(static_cast<long long>(m.counts(i, j)));
        }
        out += "\n";
    }
    return out;
}

std::string summary_csv(const std::string& axis_name, const std::vector<SweepPoint>& points) {
    if (points.empty()) throw ParamError("summary of an empty sweep");
    std::string out = csv_field(axis_name) + ",accuracy,fm,note\n";
    for (const SweepPoint& p : points) {
        out += format_double(p.axis_value);
        if (p.ok) {
            out += "," + format_double(p.accuracy) + "," + format_double(p.fm);
        } else {
            out += ",,";
        }
        out += "," + csv_field(p.note) + "\n";
    }
    return out;
}

std::vector<SweepPoint> parse_summary_csv(const std::string& text, std::string* axis_name) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    if (lines.empty()) throw ParseError("empty summary CSV");
    const auto header = csv_split(lines.front());
    if (header.size() != 4 || header[1] != "accuracy" || header[2] != "fm" ||
        header[3] != "note") {
        throw ParseError("unrecognized summary CSV header");
    }
    if (axis_name) *axis_name = header[0];
    std::vector<SweepPoint> points;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv_split(lines[i]);
        if (fields.size() != 4) {
            throw ParseError("summary CSV row " + std::to_string(i) + " has " +
                             std::to_string(fields.size()) + " fields, expected 4");
        }
        SweepPoint p;
        p.axis_value = parse_csv_double(fields[0]);
        p.ok = !fields[1].empty();
        if (p.ok) {
            p.accuracy = parse_csv_double(fields[1]);
            p.fm = parse_csv_double(fields[2]);
        } else if (!fields[2].empty()) {
            throw ParseError("summary CSV row " + std::to_string(i) + " mixes empty fields");
        }
        p.note = fields[3];
        points.push_back(std::move(p));
    }
    return points;
}

std::string confusion_heatmap_svg(const ConfusionMatrix& m,
                                  const std::vector<std::string>& classes,
                                  const std::string& title) {
    const std::size_t c = m.counts.shape()[0];
    if (classes.size() != c) throw ParamError("class name count does not match matrix size");
    const double cell = 44.0;
    const double left = 150.0, top = 120.0;
    const double width = left + cell * static_cast<double>(c) + 20.0;
    const double height = top + cell * static_cast<double>(c) + 20.0;
    double max_count = 1.0;
    for (std::size_t i = 0; i < m.counts.size(); ++i) {
        max_count = std::max(max_count, m.counts.data()[i]);
    }
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) +
           "\" height=\"" + fmt("%.0f", height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", width / 2) +
           "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" + xml_escape(title) +
           "</text>\n";
    svg += "<text x=\"" + fmt("%.1f", left + cell * static_cast<double>(c) / 2) +
           "\" y=\"44\" font-size=\"12\" text-anchor=\"middle\">label</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt("%.1f", top + cell * static_cast<double>(c) / 2) +
           "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt("%.1f", top + cell * static_cast<double>(c) / 2) +
           ")\">prediction</text>\n";
    for (std::size_t j = 0; j < c; ++j) {
        const double x = left + cell * (static_cast<double>(j) + 0.5);
        svg += "<text x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", top - 8.0) +
               "\" font-size=\"10\" text-anchor=\"start\" transform=\"rotate(-45 " +
               fmt("%.1f", x) + " " + fmt("%.1f", top - 8.0) + ")\">" +
               xml_escape(classes[j]) + "</text>\n";
    }
    for (std::size_t i = 0; i < c; ++i) {
        const double y = top + cell * (static_cast<double>(i) + 0.5);
        svg += "<text x=\"" + fmt("%.1f", left - 8.0) + "\" y=\"" + fmt("%.1f", y + 3.0) +
               "\" font-size=\"10\" text-anchor=\"end\">" + xml_escape(classes[i]) + "</text>\n";
        for (std::size_t j = 0; j < c; ++j) {
            const double count = m.counts(i, j);
            const double t = count / max_count;
            // White through steel blue; the diagonal saturates fastest.
            const int r = static_cast<int>(std::lround(255.0 + (31.0 - 255.0) * t));
            const int g = static_cast<int>(std::lround(255.0 + (119.0 - 255.0) * t));
            const int b = static_cast<int>(std::lround(255.0 + (180.0 - 255.0) * t));
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
            const double x = left + cell * static_cast<double>(j);
            const double yy = top + cell * static_cast<double>(i);
            svg += "<rect x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", yy) + "\" width=\"" +
                   fmt("%.1f", cell) + "\" height=\"" + fmt("%.1f", cell) + "\" fill=\"" + color +
                   "\" stroke=\"#cccccc\"/>\n";
            svg += "<text x=\"" + fmt("%.1f", x + cell / 2) + "\" y=\"" +
                   fmt("%.1f", yy + cell / 2 + 4.0) + "\" font-size=\"11\" text-anchor=\"middle\"" +
                   (t > 0.5 ? " fill=\"white\"" : "") + ">" +
                   std::to_string(static_cast<long long>(count)) + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string line_chart_svg(const std::string& axis_name, const std::vector<SweepPoint>& points,
                           const std::string& title) {
    if (points.empty()) throw ParamError("line chart of an empty sweep");
    const double width = 640.0, height = 420.0;
    const double left = 70.0, right = 600.0, top = 60.0, bottom = 360.0;
    double lo = points.front().axis_value, hi = lo;
    for (const SweepPoint& p : points) {
        lo = std::min(lo, p.axis_value);
        hi = std::max(hi, p.axis_value);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    auto px = [&](double v) { return left + (right - left) * (v - lo) / span; };
    auto py = [&](double v) { return bottom - (bottom - top) * v; };
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) +
           "\" height=\"" + fmt("%.0f", height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", width / 2) +
           "\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">" + xml_escape(title) +
           "</text>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double v = static_cast<double>(tick) / 5.0;
        svg += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", py(v)) + "\" x2=\"" +
               fmt("%.1f", right) + "\" y2=\"" + fmt("%.1f", py(v)) +
               "\" stroke=\"#e0e0e0\"/>\n";
        svg += "<text x=\"" + fmt("%.1f", left - 8.0) + "\" y=\"" + fmt("%.1f", py(v) + 4.0) +
               "\" font-size=\"11\" text-anchor=\"end\">" + fmt("%.1f", v) + "</text>\n";
    }
    svg += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", top) + "\" x2=\"" +
           fmt("%.1f", left) + "\" y2=\"" + fmt("%.1f", bottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", bottom) + "\" x2=\"" +
           fmt("%.1f", right) + "\" y2=\"" + fmt("%.1f", bottom) + "\" stroke=\"black\"/>\n";
    for (const SweepPoint& p : points) {
        svg += "<text x=\"" + fmt("%.1f", px(p.axis_value)) + "\" y=\"" +
               fmt("%.1f", bottom + 18.0) + "\" font-size=\"11\" text-anchor=\"middle\">" +
               fmt("%.6g", p.axis_value) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.1f", (left + right) / 2) + "\" y=\"" +
           fmt("%.1f", bottom + 40.0) + "\" font-size=\"12\" text-anchor=\"middle\">" +
           xml_escape(axis_name) + "</text>\n";
    struct Series {
        const char* name;
        const char* color;
        double SweepPoint::* field;
    };
    const Series series[] = {{"accuracy", "#1f77b4", &SweepPoint::accuracy},
                             {"fm", "#ff7f0e", &SweepPoint::fm}};
    double legend_y = 44.0;
    for (const Series& s : series) {
        std::string polyline;
        for (const SweepPoint& p : points) {
            if (!p.ok) continue;
            polyline += fmt("%.1f", px(p.axis_value)) + "," + fmt("%.1f", py(p.*(s.field))) + " ";
        }
        if (!polyline.empty()) {
            svg += "<polyline points=\"" + polyline + "\" fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"2\"/>\n";
        }
        for (const SweepPoint& p : points) {
            if (!p.ok) continue;
            svg += "<circle cx=\"" + fmt("%.1f", px(p.axis_value)) + "\" cy=\"" +
                   fmt("%.1f", py(p.*(s.field))) + "\" r=\"4\" fill=\"" + s.color + "\"/>\n";
        }
        svg += "<rect x=\"" + fmt("%.1f", right - 90.0) + "\" y=\"" + fmt("%.1f", legend_y) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(s.color) + "\"/>\n";
        svg += "<text x=\"" + fmt("%.1f", right - 72.0) + "\" y=\"" + fmt("%.1f", legend_y + 10.0) +
               "\" font-size=\"12\">" + s.name + "</text>\n";
        legend_y += 18.0;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace actrec
