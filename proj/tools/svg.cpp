#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "shortrate/errors.hpp"

namespace shortrate::cli {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

// Round step of roughly (hi - lo) / 5.
double nice_step(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * p >= raw) return m * p;
    return 10.0 * p;
}

void draw_panel(std::ostringstream& out, const Panel& panel, double ox, double oy, double w, double h) {
    const double left = 62, right = 14, top = 28, bottom = 42;
    const double pw = w - left - right, ph = h - top - bottom;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const Series& s : panel.series) {
        for (double x : s.x) xlo = std::min(xlo, x), xhi = std::max(xhi, x);
        for (double y : s.y) ylo = std::min(ylo, y), yhi = std::max(yhi, y);
    }
    if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    if (xhi <= xlo) xhi = xlo + 1.0;
    if (yhi <= ylo) {
        const double pad = std::max(std::abs(ylo) * 0.05, 1e-12);
        ylo -= pad;
        yhi += pad;
    }
    const double ypad = 0.05 * (yhi - ylo);
    ylo -= ypad;
    yhi += ypad;
    auto px = [&](double x) { return ox + left + (x - xlo) / (xhi - xlo) * pw; };
    auto py = [&](double y) { return oy + top + (yhi - y) / (yhi - ylo) * ph; };

    out << "<rect x=\"" << num(ox + left) << "\" y=\"" << num(oy + top) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"0.8\"/>\n";
    const double xs = nice_step(xlo, xhi), ys = nice_step(ylo, yhi);
    for (double t = std::ceil(xlo / xs) * xs; t <= xhi + 1e-12 * xs; t += xs) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(oy + top + ph) << "\" x2=\"" << num(px(t))
            << "\" y2=\"" << num(oy + top + ph + 4) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(oy + top + ph + 16)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << tick_label(std::abs(t) < 1e-12 * xs ? 0.0 : t)
            << "</text>\n";
    }
    for (double t = std::ceil(ylo / ys) * ys; t <= yhi + 1e-12 * ys; t += ys) {
        out << "<line x1=\"" << num(ox + left - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(ox + left)
            << "\" y2=\"" << num(py(t)) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << num(ox + left - 7) << "\" y=\"" << num(py(t) + 3)
            << "\" font-size=\"10\" text-anchor=\"end\">" << tick_label(std::abs(t) < 1e-12 * ys ? 0.0 : t)
            << "</text>\n";
    }
    out << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"" << num(oy + 18)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(panel.title) << "</text>\n";
    out << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"" << num(oy + h - 8)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(panel.x_label) << "</text>\n";
    out << "<text x=\"" << num(ox + 14) << "\" y=\"" << num(oy + top + ph / 2) << "\" font-size=\"11\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 " << num(ox + 14) << " " << num(oy + top + ph / 2)
        << ")\">" << escape(panel.y_label) << "</text>\n";

    for (const Series& s : panel.series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"" << num(s.width) << "\"";
        if (s.dashed) out << " stroke-dasharray=\"6,4\"";
        out << " points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            out << (i ? " " : "") << num(px(s.x[i])) << "," << num(py(s.y[i]));
        out << "\"/>\n";
    }
    double ly = oy + top + 14;
    for (const Series& s : panel.series) {
        if (s.label.empty()) continue;
        const double lx = ox + left + pw - 120;
        out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 3) << "\" x2=\"" << num(lx + 22) << "\" y2=\""
            << num(ly - 3) << "\" stroke=\"" << s.colour << "\" stroke-width=\"" << num(s.width) << "\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        out << "<text x=\"" << num(lx + 27) << "\" y=\"" << num(ly) << "\" font-size=\"10\">" << escape(s.label)
            << "</text>\n";
        ly += 14;
    }
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int columns, double panel_width, double panel_height) {
    const int cols = std::max(1, columns);
    const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(cols * panel_width)
        << "\" height=\"" << num(rows * panel_height) << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const int r = static_cast<int>(i) / cols, c = static_cast<int>(i) % cols;
        draw_panel(out, panels[i], c * panel_width, r * panel_height, panel_width, panel_height);
    }
    out << "</svg>\n";
    return out.str();
}

void write_svg(const std::string& path, const std::string& document) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << document;
}

}  // namespace shortrate::cli
