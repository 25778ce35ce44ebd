#include "cfx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kGap = 40.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const TimeSeries& x, const TimeSeries& cf, const ChangeMask& mask, const SvgOptions& opts) {
    require_same_shape(x, cf);
    if (mask.shape != x.shape()) throw ShapeError("change mask shape does not match the series");
    const std::size_t C = x.channels();
    const std::size_t T = x.length();
    const double plot_w = opts.width - kLeft - kRight;
    const double plot_h = opts.panel_height - kGap;
    const double height = kTop + static_cast<double>(C) * opts.panel_height;
    const double column = plot_w / static_cast<double>(T);
    const auto px = [&](double t) { return kLeft + (t + 0.5) * column; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(opts.width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(opts.width) << ' ' << num(height) << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << num(opts.width) << "\" height=\"" << num(height)
        << "\" fill=\"white\"/>\n";
    if (!opts.title.empty()) {
        out << "<text x=\"" << num(kLeft) << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
            << escape(opts.title) << "</text>\n";
    }

    for (std::size_t c = 0; c < C; ++c) {
        const double top = kTop + static_cast<double>(c) * opts.panel_height;
        const double bottom = top + plot_h;
        double lo = std::min(*std::min_element(x.channel(c).begin(), x.channel(c).end()),
                             *std::min_element(cf.channel(c).begin(), cf.channel(c).end()));
        double hi = std::max(*std::max_element(x.channel(c).begin(), x.channel(c).end()),
                             *std::max_element(cf.channel(c).begin(), cf.channel(c).end()));
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        const auto py = [&](double v) { return bottom - (v - lo) / (hi - lo) * plot_h; };

        out << "<g class=\"panel\" id=\"channel-" << c << "\">\n";
        for (const auto& s : mask.segments) {
            if (s.channel != c) continue;
            out << "<rect class=\"changed\" x=\"" << num(px(static_cast<double>(s.start) - 0.5)) << "\" y=\"" << num(top)
                << "\" width=\"" << num(static_cast<double>(s.length()) * column) << "\" height=\"" << num(plot_h)
                << "\" fill=\"#d62728\" fill-opacity=\"0.18\"/>\n";
        }
        // Axes with three ticks each.
        out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\""
            << num(bottom) << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(top) << "\" x2=\"" << num(kLeft) << "\" y2=\""
            << num(bottom) << "\" stroke=\"black\"/>\n";
        for (double f : {0.0, 0.5, 1.0}) {
            const double t = std::round(f * static_cast<double>(T - 1));
            out << "<text class=\"tick\" x=\"" << num(px(t)) << "\" y=\"" << num(bottom + 14)
                << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << label(t) << "</text>\n";
            const double v = lo + f * (hi - lo);
            out << "<text class=\"tick\" x=\"" << num(kLeft - 4) << "\" y=\"" << num(py(v) + 3)
                << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << label(v) << "</text>\n";
        }
        out << "<text x=\"" << num(kLeft + plot_w) << "\" y=\"" << num(top - 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">channel " << c << "</text>\n";
        const auto polyline = [&](const TimeSeries& s, const char* cls, const char* colour) {
            out << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t t = 0; t < T; ++t) {
                if (t > 0) out << ' ';
                out << num(px(static_cast<double>(t))) << ',' << num(py(s(c, t)));
            }
            out << "\"/>\n";
        };
        polyline(x, "original", "#1f77b4");
        polyline(cf, "counterfactual", "#ff7f0e");
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace cfx
