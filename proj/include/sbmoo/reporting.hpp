#pragma once

// Colour-coded report tables and SVG plots (histograms, region scatter,
// Pareto-front scatter).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sbmoo/detection.hpp"
#include "sbmoo/errors.hpp"
#include "sbmoo/pareto.hpp"

namespace sbmoo {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline Rgb parse_hex(std::string_view hex) {
    if (hex.size() != 7 || hex[0] != '#') throw InputError("colour must look like #rrggbb");
    auto byte = [&](std::size_t at) {
        unsigned v = 0;
        for (std::size_t i = at; i < at + 2; ++i) {
            const char c = hex[i];
            v *= 16;
            if (c >= '0' && c <= '9') v += c - '0';
            else if (c >= 'a' && c <= 'f') v += c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v += c - 'A' + 10;
            else throw InputError("bad hex digit in colour");
        }
        return static_cast<std::uint8_t>(v);
    };
    return {byte(1), byte(3), byte(5)};
}

inline std::string to_hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

enum class Metric { BiasRej, Chi2P, Binsize, Cei };

inline Metric parse_metric(std::string_view s) {
    if (s == "BIAS_rej" || s == "bias_rej") return Metric::BiasRej;
    if (s == "chi2_p") return Metric::Chi2P;
    if (s == "binsize") return Metric::Binsize;
    if (s == "CEI" || s == "cei") return Metric::Cei;
    throw ConfigError("unknown metric '" + std::string(s) + "'");
}

/// Piecewise-linear RGB ramp; clamps outside the breakpoints.
class ColourScale {
public:
    struct Stop {
        double value;
        Rgb colour;
    };

    ColourScale(Metric m, std::vector<Stop> stops, bool log10_space = false)
        : metric_(m), stops_(std::move(stops)), log_(log10_space) {
        if (stops_.size() < 2) throw ConfigError("colour scale needs two or more breakpoints");
        const bool up = stops_[1].value > stops_[0].value;
        for (std::size_t i = 1; i < stops_.size(); ++i)
            if ((stops_[i].value > stops_[i - 1].value) != up || stops_[i].value == stops_[i - 1].value)
                throw ConfigError("colour scale breakpoints must be strictly monotone");
        if (log_)
            for (const auto& s : stops_)
                if (!(s.value > 0.0)) throw ConfigError("log-scaled breakpoints must be positive");
    }

    Metric metric() const noexcept { return metric_; }
    const std::vector<Stop>& stops() const noexcept { return stops_; }

    Rgb colour(double v) const {
        auto tr = [&](double x) { return log_ ? std::log10(x) : x; };
        if (log_) v = std::max(v, 1e-300);
        const double t = tr(v);
        const bool up = stops_[1].value > stops_[0].value;
        auto before = [&](double a, double b) { return up ? a <= b : a >= b; };
        if (std::isnan(t) || before(t, tr(stops_.front().value))) return stops_.front().colour;
        if (before(tr(stops_.back().value), t)) return stops_.back().colour;
        for (std::size_t i = 1; i < stops_.size(); ++i) {
            const double a = tr(stops_[i - 1].value), b = tr(stops_[i].value);
            if (before(t, b)) {
                const double w = (t - a) / (b - a);
                const auto& c0 = stops_[i - 1].colour;
                const auto& c1 = stops_[i].colour;
                auto mix = [&](std::uint8_t p, std::uint8_t q) {
                    return static_cast<std::uint8_t>(std::lround(p + w * (static_cast<double>(q) - p)));
                };
                return {mix(c0.r, c1.r), mix(c0.g, c1.g), mix(c0.b, c1.b)};
            }
        }
        return stops_.back().colour;
    }
    std::string hex(double v) const { return to_hex(colour(v)); }

private:
    Metric metric_;
    std::vector<Stop> stops_;
    bool log_;
};

inline constexpr std::array<std::string_view, 5> kPalette{"#fde725", "#5ec962", "#21918c", "#3b528b", "#440154"};

inline ColourScale make_scale(Metric m, std::array<double, 5> values, bool log_space = false) {
    std::vector<ColourScale::Stop> stops;
    for (std::size_t i = 0; i < 5; ++i) stops.push_back({values[i], parse_hex(kPalette[i])});
    return ColourScale(m, std::move(stops), log_space);
}

inline const ColourScale& colour_scale(Metric m) {
    static const ColourScale bias = make_scale(Metric::BiasRej, {0.1, 0.2, 0.3, 0.5, 1.0});
    static const ColourScale chi2 = make_scale(Metric::Chi2P, {0.1, 0.05, 0.01, 1e-20, 1e-50}, true);
    static const ColourScale bins = make_scale(Metric::Binsize, {1.0, 1.2, 2.0, 4.0, 10.0});
    static const ColourScale cei = make_scale(Metric::Cei, {1.0, 0.8, 0.6, 0.4, 0.1});
    switch (m) {
        case Metric::BiasRej: return bias;
        case Metric::Chi2P: return chi2;
        case Metric::Binsize: return bins;
        case Metric::Cei: return cei;
    }
    throw ConfigError("unknown metric");
}

// ---------------------------------------------------------------------------
// Tables

/// Flat view of one detection cell, as stored in report.csv.
struct ReportRow {
    std::string algorithm;
    std::string problem;
    std::size_t d = 0;
    double bias_rej = 0.0;
    double chi2_p = 1.0;
    double chi2_log10_p = 0.0;
    BinsizeQuad quad;
    double cei = 1.0;
    Region region = Region::Unbiased;
    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

inline ReportRow row_of(const DetectionReport& r) {
    return {r.algorithm, r.problem, r.d, r.bias_rej, r.chi2_p_merged, r.chi2_log10_p_merged, r.quad, r.cei.mean, r.region};
}

enum class TableFormat { Csv, Markdown, Html };

inline TableFormat parse_table_format(std::string_view s) {
    if (s == "csv") return TableFormat::Csv;
    if (s == "md" || s == "markdown") return TableFormat::Markdown;
    if (s == "html") return TableFormat::Html;
    throw ConfigError("unknown table format '" + std::string(s) + "'");
}

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string fmt_p(double p, double log10_p) {
    if (p > 0.0 && log10_p > -300.0) return fmt("%.3g", p);
    return "1e" + fmt("%.0f", std::floor(log10_p));
}

inline std::string csv_p(const ReportRow& r) {
    if (r.chi2_log10_p > -300.0) return fmt("%.17g", r.chi2_p);
    return "1e" + fmt("%.6f", r.chi2_log10_p);
}

inline std::string xml_escape(std::string_view s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader =
    "algorithm,problem,d,BIAS_rej,chi2_p,binsize_B_L,binsize_C_L,binsize_C_R,binsize_B_R,CEI,region";

inline std::string render_table(std::span<const ReportRow> rows, TableFormat format) {
    if (rows.empty()) throw InputError("render_table: no reports");
    std::ostringstream o;
    using detail::fmt;
    if (format == TableFormat::Csv) {
        o << kCsvHeader << '\n';
        for (const auto& r : rows) {
            o << r.algorithm << ',' << r.problem << ',' << r.d << ',' << fmt("%.17g", r.bias_rej) << ','
              << detail::csv_p(r) << ',' << fmt("%.17g", r.quad.bound_left) << ',' << fmt("%.17g", r.quad.centre_left)
              << ',' << fmt("%.17g", r.quad.centre_right) << ',' << fmt("%.17g", r.quad.bound_right) << ','
              << fmt("%.17g", r.cei) << ',' << to_string(r.region) << '\n';
        }
        return o.str();
    }

    const auto& sb = colour_scale(Metric::BiasRej);
    const auto& sp = colour_scale(Metric::Chi2P);
    const auto& sz = colour_scale(Metric::Binsize);
    const auto& sc = colour_scale(Metric::Cei);
    // chi2 colour uses the exact log value so clamped p still lands in the deep band
    auto pcol = [&](const ReportRow& r) { return sp.hex(std::pow(10.0, std::max(r.chi2_log10_p, -299.0))); };

    if (format == TableFormat::Markdown) {
        o << "| algorithm | problem | d | BIAS_rej | chi2 p | B_L | C_L | C_R | B_R | CEI | region |\n";
        o << "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---|\n";
        auto cell = [](const std::string& text, const std::string& colour) { return text + " `" + colour + "`"; };
        for (const auto& r : rows) {
            o << "| " << r.algorithm << " | " << r.problem << " | " << r.d << " | "
              << cell(fmt("%.3f", r.bias_rej), sb.hex(r.bias_rej)) << " | "
              << cell(detail::fmt_p(r.chi2_p, r.chi2_log10_p), pcol(r)) << " | "
              << cell(fmt("%.2f", r.quad.bound_left), sz.hex(r.quad.bound_left)) << " | "
              << cell(fmt("%.2f", r.quad.centre_left), sz.hex(r.quad.centre_left)) << " | "
              << cell(fmt("%.2f", r.quad.centre_right), sz.hex(r.quad.centre_right)) << " | "
              << cell(fmt("%.2f", r.quad.bound_right), sz.hex(r.quad.bound_right)) << " | "
              << cell(fmt("%.3f", r.cei), sc.hex(r.cei)) << " | " << to_string(r.region) << " |\n";
        }
        return o.str();
    }

    o << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>structural bias report</title>\n<style>\n"
         "table{border-collapse:collapse;font-family:sans-serif;font-size:13px}\n"
         "td,th{border:1px solid #ccc;padding:3px 8px;text-align:right}\n"
         "td.l,th.l{text-align:left}\n</style>\n</head>\n<body>\n<table>\n"
         "<tr><th class=\"l\">algorithm</th><th class=\"l\">problem</th><th>d</th><th>BIAS_rej</th><th>chi2 p</th>"
         "<th>B<sub>L</sub></th><th>C<sub>L</sub></th><th>C<sub>R</sub></th><th>B<sub>R</sub></th><th>CEI</th>"
         "<th class=\"l\">region</th></tr>\n";
    auto td = [](const std::string& text, const std::string& colour) {
        // dark end of the palette needs light text
        const Rgb c = parse_hex(colour);
        const double lum = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
        return "<td style=\"background:" + colour + ";color:" + (lum < 128 ? "#ffffff" : "#000000") + "\">" + text +
               "</td>";
    };
    for (const auto& r : rows) {
        o << "<tr><td class=\"l\">" << detail::xml_escape(r.algorithm) << "</td><td class=\"l\">"
          << detail::xml_escape(r.problem) << "</td><td>" << r.d << "</td>" << td(fmt("%.3f", r.bias_rej), sb.hex(r.bias_rej))
          << td(detail::fmt_p(r.chi2_p, r.chi2_log10_p), pcol(r))
          << td(fmt("%.2f", r.quad.bound_left), sz.hex(r.quad.bound_left))
          << td(fmt("%.2f", r.quad.centre_left), sz.hex(r.quad.centre_left))
          << td(fmt("%.2f", r.quad.centre_right), sz.hex(r.quad.centre_right))
          << td(fmt("%.2f", r.quad.bound_right), sz.hex(r.quad.bound_right)) << td(fmt("%.3f", r.cei), sc.hex(r.cei))
          << "<td class=\"l\">" << to_string(r.region) << "</td></tr>\n";
    }
    o << "</table>\n</body>\n</html>\n";
    return o.str();
}

inline std::string render_table(std::span<const DetectionReport> reports, TableFormat format) {
    std::vector<ReportRow> rows;
    for (const auto& r : reports) rows.push_back(row_of(r));
    return render_table(std::span<const ReportRow>(rows), format);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("report.csv", line, "bad number '" + s + "'");
    }
}

}  // namespace detail

inline std::vector<ReportRow> parse_report_csv(std::istream& in) {
    std::string line;
    std::size_t no = 1;
    if (!std::getline(in, line)) throw ParseError("report.csv", 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ParseError("report.csv", 1, "unexpected header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        ++no;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 11) throw ParseError("report.csv", no, "expected 11 fields");
        ReportRow r;
        r.algorithm = f[0];
        r.problem = f[1];
        r.d = static_cast<std::size_t>(detail::parse_double(f[2], no));
        r.bias_rej = detail::parse_double(f[3], no);
        if (f[4].starts_with("1e") && f[4].find('.') != std::string::npos) {
            r.chi2_log10_p = detail::parse_double(f[4].substr(2), no);
            r.chi2_p = std::max(std::pow(10.0, r.chi2_log10_p), std::numeric_limits<double>::denorm_min());
        } else {
            r.chi2_p = detail::parse_double(f[4], no);
            r.chi2_log10_p = r.chi2_p > 0.0 ? std::log10(r.chi2_p) : -324.0;
        }
        r.quad = {detail::parse_double(f[5], no), detail::parse_double(f[6], no), detail::parse_double(f[7], no),
                  detail::parse_double(f[8], no)};
        r.cei = detail::parse_double(f[9], no);
        try {
            r.region = parse_region(f[10]);
        } catch (const InputError& e) {
            throw ParseError("report.csv", no, e.what());
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError("report.csv", no, "no rows");
    return rows;
}

// ---------------------------------------------------------------------------
// SVG

namespace svg {

inline std::string num(double v) {
    if (std::fabs(v) < 5e-5) v = 0.0;
    return detail::fmt("%.2f", v);
}

inline std::string header(int w, int h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
           std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\" fill=\"#ffffff\"/>\n";
}

inline std::string text(double x, double y, std::string_view s, std::string_view anchor = "middle") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) + "\">" +
           detail::xml_escape(s) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, std::string_view stroke, std::string_view extra = "") {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + std::string(stroke) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>\n";
}

inline std::string rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = "") {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(std::max(w, 0.0)) + "\" height=\"" +
           num(std::max(h, 0.0)) + "\" fill=\"" + std::string(fill) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) +
           "/>\n";
}

inline std::string tick_label(double v) {
    std::string s = detail::fmt("%.2f", v);
    while (s.find('.') != std::string::npos && (s.back() == '0' || s.back() == '.')) {
        const bool dot = s.back() == '.';
        s.pop_back();
        if (dot) break;
    }
    return s;
}

struct Frame {
    double left = 60, top = 30, width = 520, height = 300;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

inline std::string axes(const Frame& f, std::string_view xlabel, std::string_view ylabel, int ticks = 5) {
    std::string o;
    o += line(f.left, f.top + f.height, f.left + f.width, f.top + f.height, "#000000");
    o += line(f.left, f.top, f.left, f.top + f.height, "#000000");
    for (int i = 0; i <= ticks; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / ticks;
        const double yv = f.y0 + (f.y1 - f.y0) * i / ticks;
        o += line(f.px(xv), f.top + f.height, f.px(xv), f.top + f.height + 4, "#000000");
        o += text(f.px(xv), f.top + f.height + 16, tick_label(xv));
        o += line(f.left - 4, f.py(yv), f.left, f.py(yv), "#000000");
        o += text(f.left - 7, f.py(yv) + 4, tick_label(yv), "end");
    }
    o += text(f.left + f.width / 2, f.top + f.height + 34, xlabel);
    o += "<text x=\"16\" y=\"" + num(f.top + f.height / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(f.top + f.height / 2) + ")\">" + detail::xml_escape(ylabel) + "</text>\n";
    return o;
}

}  // namespace svg

/// Bar chart of relative binsizes, dashed reference at 1, the four bins of
/// interest tinted and labelled.
inline std::string render_histogram(const BinHistogram& h, const BinsizeQuad& q, std::string_view title = "") {
    if (h.K == 0) throw InputError("render_histogram: empty histogram");
    const auto bs = h.binsizes();
    double top = 1.5;
    for (double b : bs) top = std::max(top, b * 1.1);
    top = std::max(top, std::max({q.bound_left, q.bound_right, q.centre_left, q.centre_right}) * 1.1);
    svg::Frame f;
    f.y1 = std::ceil(top * 2.0) / 2.0;
    std::string o = svg::header(640, 380);
    if (!title.empty()) o += svg::text(f.left + f.width / 2, 18, title);
    const double bw = f.width / static_cast<double>(h.K);
    const std::size_t cl = h.K / 2 - (h.K % 2 == 0 ? 1 : 0), cr = h.K / 2;
    for (std::size_t k = 0; k < h.K; ++k) {
        std::string fill = "#9e9e9e";
        std::string label;
        if (k == 0) fill = "#d95f02", label = "B_L";
        else if (k == h.K - 1) fill = "#d95f02", label = "B_R";
        else if (h.K % 2 == 0 && k == cl) fill = "#1b9e77", label = "C_L";
        else if (h.K % 2 == 0 && k == cr) fill = "#1b9e77", label = "C_R";
        const double y = f.py(bs[k]);
        o += svg::rect(f.left + k * bw + 1, y, bw - 2, f.top + f.height - y, fill);
        if (!label.empty()) o += svg::text(f.left + (k + 0.5) * bw, y - 5, label);
    }
    o += svg::line(f.left, f.py(1.0), f.left + f.width, f.py(1.0), "#000000", "stroke-dasharray=\"6,4\"");
    o += svg::axes(f, "decision-space bin", "binsize");
    o += "</svg>\n";
    return o;
}

/// Boundary-bin sum against centre-bin sum, one point per row, coloured by
/// BIAS_rej, over the region partition.
inline std::string render_region_scatter(std::span<const ReportRow> rows, double tau = 0.5) {
    if (rows.empty()) throw InputError("render_region_scatter: no reports");
    // at least 3 (2 + tau) so the B and D wedges are non-empty
    double hi = std::max(8.0, 3.0 * (2.0 + tau) + 0.5);
    for (const auto& r : rows) hi = std::max({hi, r.quad.boundary_sum() * 1.05, r.quad.centre_sum() * 1.05});
    svg::Frame f;
    f.width = 440;
    f.height = 440;
    f.x1 = f.y1 = std::ceil(hi);
    std::string o = svg::header(560, 520);
    const double lo = 2.0 - tau, up = 2.0 + tau;
    auto poly = [&](std::vector<std::pair<double, double>> pts, std::string_view fill, std::string_view label, double lx,
                    double ly) {
        std::string s = "<polygon points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            s += (i ? " " : "") + svg::num(f.px(pts[i].first)) + "," + svg::num(f.py(pts[i].second));
        s += "\" fill=\"" + std::string(fill) + "\" fill-opacity=\"0.35\" stroke=\"#666666\"/>\n";
        s += svg::text(f.px(lx), f.py(ly), label);
        return s;
    };
    const double m = f.x1;
    const double s3 = std::sqrt(3.0);
    o += poly({{lo, lo}, {up, lo}, {up, up}, {lo, up}}, "#1a9850", "U", 2.0, 2.0 - tau / 2 - 0.1);
    o += poly({{f.x0, up}, {up, up}, {up, m}, {f.x0, m}}, "#4575b4", "A", (f.x0 + up) / 2, (up + m) / 2);
    o += poly({{m, f.y0}, {m, up}, {up, up}, {up, f.y0}}, "#d73027", "E", (up + m) / 2, (f.y0 + up) / 2);
    // both sums above 2 + tau: split at y/x = sqrt(3) and 1/sqrt(3)
    o += poly({{up, up * s3}, {up, m}, {m / s3, m}}, "#91bfdb", "B", (up + m / s3) / 2 - 0.1, m - 0.5);
    o += poly({{up, up}, {up, up * s3}, {m / s3, m}, {m, m}, {m, m / s3}, {up * s3, up}}, "#ffffbf", "C", m * 0.75,
              m * 0.75);
    o += poly({{up * s3, up}, {m, up}, {m, m / s3}}, "#fc8d59", "D", m - 0.6, (up + m / s3) / 2 - 0.2);
    o += svg::axes(f, "binsize_B^L + binsize_B^R", "binsize_C^L + binsize_C^R", static_cast<int>(f.x1));
    const auto& sb = colour_scale(Metric::BiasRej);
    for (const auto& r : rows) {
        o += "<circle cx=\"" + svg::num(f.px(r.quad.boundary_sum())) + "\" cy=\"" + svg::num(f.py(r.quad.centre_sum())) +
             "\" r=\"4\" fill=\"" + sb.hex(r.bias_rej) + "\" stroke=\"#000000\" stroke-width=\"0.5\"><title>" +
             detail::xml_escape(r.algorithm + " " + r.problem + " d=" + std::to_string(r.d)) + "</title></circle>\n";
    }
    o += "<path d=\"M" + svg::num(f.px(2.0) - 6) + "," + svg::num(f.py(2.0)) + " h12 M" + svg::num(f.px(2.0)) + "," +
         svg::num(f.py(2.0) - 6) + " v12\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    o += "</svg>\n";
    return o;
}

/// Objective-space scatter with the reference front drawn over it.
inline std::string render_front_scatter(std::span<const ObjectivePair> samples, std::span<const ObjectivePair> front,
                                        std::string_view title = "") {
    if (samples.empty()) throw InputError("render_front_scatter: no samples");
    double x0 = samples[0].g1, x1 = x0, y0 = samples[0].g2, y1 = y0;
    auto grow = [&](const ObjectivePair& p) {
        x0 = std::min(x0, p.g1), x1 = std::max(x1, p.g1), y0 = std::min(y0, p.g2), y1 = std::max(y1, p.g2);
    };
    for (const auto& p : samples) grow(p);
    for (const auto& p : front) grow(p);
    if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
    svg::Frame f;
    f.width = f.height = 400;
    f.x0 = x0, f.x1 = x1, f.y0 = y0, f.y1 = y1;
    std::string o = svg::header(500, 480);
    if (!title.empty()) o += svg::text(f.left + f.width / 2, 18, title);
    o += "<g fill=\"#3b528b\" fill-opacity=\"0.35\">\n";
    for (const auto& p : samples)
        o += "<circle cx=\"" + svg::num(f.px(p.g1)) + "\" cy=\"" + svg::num(f.py(p.g2)) + "\" r=\"1.2\"/>\n";
    o += "</g>\n";
    if (front.size() == 1) {
        o += "<circle cx=\"" + svg::num(f.px(front[0].g1)) + "\" cy=\"" + svg::num(f.py(front[0].g2)) +
             "\" r=\"4\" fill=\"#d73027\"/>\n";
    } else if (!front.empty()) {
        o += "<polyline fill=\"none\" stroke=\"#d73027\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < front.size(); ++i)
            o += (i ? " " : "") + svg::num(f.px(front[i].g1)) + "," + svg::num(f.py(front[i].g2));
        o += "\"/>\n";
    }
    o += svg::axes(f, "g1", "g2");
    o += "</svg>\n";
    return o;
}

}  // namespace sbmoo
