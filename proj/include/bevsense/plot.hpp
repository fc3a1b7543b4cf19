#pragma once

// Minimal SVG line charts with a log-scaled frequency axis.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bevsense/dataset_io.hpp"
#include "bevsense/error.hpp"

namespace bevsense {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::optional<double> marker_x;  // draws a circle at this x (must be one of x)
};

struct PlotOptions {
    std::string title;
    std::string x_label = "Frequency (Hz)";
    std::string y_label;
    bool log_y = false;
    int width = 900;
    int height = 540;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
}

}  // namespace detail

inline std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
    if (series.empty()) throw InvalidArgument("nothing to plot");
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size()) throw InvalidArgument("series '" + s.name + "' is empty or ragged");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0)) throw InvalidArgument("log axis needs positive x values");
            if (opt.log_y && !(s.y[i] > 0.0)) throw InvalidArgument("log y axis needs positive values");
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
    const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
    double y0 = ty(ymin), y1 = ty(ymax);
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double ml = 80, mr = 30, mt = 40, mb = 60;
    const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
    auto px = [&](double x) { return ml + (lx1 > lx0 ? (std::log10(x) - lx0) / (lx1 - lx0) : 0.5) * pw; };
    auto py = [&](double y) { return mt + ph - (ty(y) - y0) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << detail::xml_escape(opt.title) << "</text>\n";
    o << "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph << "\"/>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph << "\"/>\n";
    o << "</g>\n<g id=\"xticks\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
    for (int d = static_cast<int>(std::ceil(lx0 - 1e-9)); d <= static_cast<int>(std::floor(lx1 + 1e-9)); ++d) {
        const double x = px(std::pow(10.0, d));
        o << "<line x1=\"" << detail::fmt(x) << "\" y1=\"" << mt + ph << "\" x2=\"" << detail::fmt(x) << "\" y2=\""
          << mt + ph + 5 << "\" stroke=\"black\"/>";
        o << "<text x=\"" << detail::fmt(x) << "\" y=\"" << mt + ph + 18 << "\">1e" << d << "</text>\n";
    }
    o << "</g>\n";
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << detail::xml_escape(opt.x_label)
      << "</text>\n";
    o << "<text transform=\"translate(20," << mt + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << detail::xml_escape(opt.y_label) << (opt.log_y ? " (log)" : "") << "</text>\n";

    o << "<g id=\"series\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const double hue = 360.0 * static_cast<double>(k) / static_cast<double>(series.size());
        o << "<polyline data-name=\"" << detail::xml_escape(s.name) << "\" stroke=\"hsl(" << detail::fmt(hue)
          << ",70%,40%)\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            o << (i ? " " : "") << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.y[i]));
        o << "\"/>\n";
    }
    o << "</g>\n";
    for (const auto& s : series) {
        if (!s.marker_x) continue;
        const auto it = std::find(s.x.begin(), s.x.end(), *s.marker_x);
        if (it == s.x.end()) continue;
        const double yv = s.y[static_cast<std::size_t>(it - s.x.begin())];
        o << "<circle class=\"peak\" cx=\"" << detail::fmt(px(*s.marker_x)) << "\" cy=\"" << detail::fmt(py(yv))
          << "\" r=\"5\" fill=\"red\"/>\n";
        o << "<text x=\"" << detail::fmt(px(*s.marker_x) + 8) << "\" y=\"" << detail::fmt(py(yv) - 8)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(*s.marker_x) << " Hz</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Mean amplitude per class over the grid, one series per class in label order.
inline std::vector<PlotSeries> class_amplitude_series(const Dataset& d) {
    if (d.empty()) throw InvalidArgument("dataset is empty");
    const auto& grid = d.grid();
    std::vector<PlotSeries> out;
    for (const auto& label : d.labels()) {
        PlotSeries s{label, grid.points(), std::vector<double>(grid.size(), 0.0), std::nullopt};
        std::size_t n = 0;
        for (const auto& o : d.observations) {
            if (o.label != label) continue;
            ++n;
            for (std::size_t i = 0; i < grid.size(); ++i) s.y[i] += feature_value(o.spectrum.values()[i], FeatureKind::Amplitude);
        }
        for (auto& v : s.y) v /= static_cast<double>(n);
        out.push_back(std::move(s));
    }
    return out;
}

/// Long-format sidecar: series,frequency_hz,value
inline std::string series_csv(const std::vector<PlotSeries>& series, const std::string& value_name) {
    std::ostringstream o;
    o << "series,frequency_hz," << value_name << '\n';
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            o << detail::csv_quote(s.name) << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
    return o.str();
}

}  // namespace bevsense
