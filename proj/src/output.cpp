#include "llq/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace llq::out {

std::string format_value(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // no "-0"
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), os_(path), width_(header.size()) {
    if (!os_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != width_)
        throw std::invalid_argument(path_.filename().string() + ": row has " + std::to_string(values.size()) +
                                    " fields, header has " + std::to_string(width_));
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_value(values[i]);
    os_ << '\n';
    if (!os_) throw std::runtime_error("write to " + path_.string() + " failed");
}

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::values(const std::string& name) const {
    std::size_t c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.at(c));
    return v;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
    t.header = split(line);
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split(line);
        if (f.size() != t.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
        std::vector<double> r;
        r.reserve(f.size());
        for (const auto& s : f) r.push_back(s.empty() ? std::nan("") : std::stod(s));
        t.rows.push_back(std::move(r));
    }
    return t;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return nlohmann::json::parse(is);
}

const std::string& palette(std::size_t i) {
    static const std::vector<std::string> colors = {"#000000", "#d62728", "#1f77b4", "#2ca02c",
                                                    "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    return colors[i % colors.size()];
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct Axis {
    double lo, hi;
    bool log;
    double map(double v, double p0, double p1) const {
        double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi, x = log ? std::log10(v) : v;
        return p0 + (x - a) / (b - a) * (p1 - p0);
    }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

std::pair<double, double> auto_range(const Plot& p, bool xaxis) {
    bool log = xaxis ? p.log_x : p.log_y;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : p.series)
        for (std::size_t k = 0; k < s.xs.size() && k < s.ys.size(); ++k) {
            if (!usable(s.xs[k], p.log_x) || !usable(s.ys[k], p.log_y)) continue;
            double v = xaxis ? s.xs[k] : s.ys[k];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo)) return {log ? 0.1 : 0.0, 1.0};
    if (hi <= lo) {
        if (log) return {lo / 2, lo * 2};
        double d = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
        return {lo - d, hi + d};
    }
    if (log) return {lo, hi};
    double pad = 0.04 * (hi - lo);
    return {xaxis ? lo : lo - pad, xaxis ? hi : hi + pad};
}

std::vector<double> ticks(const Axis& ax) {
    std::vector<double> t;
    if (ax.log) {
        for (int e = static_cast<int>(std::floor(std::log10(ax.lo))); e <= std::ceil(std::log10(ax.hi)); ++e) {
            double v = std::pow(10.0, e);
            if (v >= ax.lo * (1 - 1e-12) && v <= ax.hi * (1 + 1e-12)) t.push_back(v);
        }
        return t;
    }
    double span = ax.hi - ax.lo;
    double raw = span / 6.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    for (double v = std::ceil(ax.lo / step) * step; v <= ax.hi + 1e-9 * step; v += step)
        t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

}  // namespace

void write_svg(const std::filesystem::path& path, const Plot& plot, int width, int height) {
    auto [xl, xh] = auto_range(plot, true);
    auto [yl, yh] = auto_range(plot, false);
    if (std::isfinite(plot.x_min)) xl = plot.x_min;
    if (std::isfinite(plot.x_max)) xh = plot.x_max;
    if (std::isfinite(plot.y_min)) yl = plot.y_min;
    if (std::isfinite(plot.y_max)) yh = plot.y_max;
    Axis ax{xl, xh, plot.log_x}, ay{yl, yh, plot.log_y};
    const double left = 80, right = width - 20.0, top = 40, bottom = height - 60.0;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(plot.title)
      << "</text>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\"" << bottom - top
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : ticks(ax)) {
        double px = ax.map(v, left, right);
        s << "<line x1=\"" << px << "\" y1=\"" << bottom << "\" x2=\"" << px << "\" y2=\"" << bottom + 5
          << "\" stroke=\"black\"/>";
        s << "<text x=\"" << px << "\" y=\"" << bottom + 18 << "\" text-anchor=\"middle\">" << tick_label(v)
          << "</text>\n";
    }
    for (double v : ticks(ay)) {
        double py = ay.map(v, bottom, top);
        s << "<line x1=\"" << left - 5 << "\" y1=\"" << py << "\" x2=\"" << left << "\" y2=\"" << py
          << "\" stroke=\"black\"/>";
        s << "<text x=\"" << left - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << tick_label(v)
          << "</text>\n";
    }
    s << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 20 << "\" text-anchor=\"middle\">"
      << esc(plot.xlabel) << "</text>\n";
    s << "<text x=\"18\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + bottom) / 2 << ")\">" << esc(plot.ylabel) << "</text>\n";
    s << "<clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left
      << "\" height=\"" << bottom - top << "\"/></clipPath>\n";
    for (double v : plot.vlines) {
        if (!usable(v, plot.log_x) || v < xl || v > xh) continue;
        double px = ax.map(v, left, right);
        s << "<line x1=\"" << px << "\" y1=\"" << top << "\" x2=\"" << px << "\" y2=\"" << bottom
          << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    s << "<g clip-path=\"url(#plot)\">\n";
    for (const auto& ser : plot.series) {
        std::string dash = ser.dashed ? " stroke-dasharray=\"6 4\"" : "";
        std::ostringstream pts;
        auto flush = [&] {
            if (pts.tellp() > 0)
                s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"" << ser.width << "\""
                  << dash << " points=\"" << pts.str() << "\"/>\n";
            pts.str("");
            pts.clear();
        };
        for (std::size_t k = 0; k < ser.xs.size() && k < ser.ys.size(); ++k) {
            if (!usable(ser.xs[k], plot.log_x) || !usable(ser.ys[k], plot.log_y)) {
                flush();
                continue;
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", ax.map(ser.xs[k], left, right),
                          ay.map(ser.ys[k], bottom, top));
            pts << buf;
        }
        flush();
    }
    s << "</g>\n";
    double ly = top + 16;
    for (const auto& ser : plot.series) {
        if (ser.label.empty()) continue;
        s << "<line x1=\"" << right - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << right - 125 << "\" y2=\"" << ly - 4
          << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\"" << (ser.dashed ? " stroke-dasharray=\"6 4\"" : "")
          << "/>";
        s << "<text x=\"" << right - 120 << "\" y=\"" << ly << "\">" << esc(ser.label) << "</text>\n";
        ly += 16;
    }
    s << "</svg>\n";

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << s.str();
}

}  // namespace llq::out
