#include "wkbsplit/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wkbsplit {

namespace {

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick_label(int decade) {
    std::ostringstream os;
    os << "1e" << decade;
    return os.str();
}

}  // namespace

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<SvgSeries>& series) {
    const double W = 640, H = 480;
    const double ml = 64, mr = 24, mt = 36, mb = 48;

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool any = false;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (!(p[0] > 0) || !(p[1] > 0) || !std::isfinite(p[0]) ||
                !std::isfinite(p[1]))
                continue;
            double lx = std::log10(p[0]), ly = std::log10(p[1]);
            if (!any) {
                xmin = xmax = lx;
                ymin = ymax = ly;
                any = true;
            } else {
                xmin = std::min(xmin, lx);
                xmax = std::max(xmax, lx);
                ymin = std::min(ymin, ly);
                ymax = std::max(ymax, ly);
            }
        }
    if (!any) {
        xmin = ymin = -1;
        xmax = ymax = 1;
    }
    if (xmax - xmin < 1e-9) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-9) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double padx = 0.04 * (xmax - xmin), pady = 0.06 * (ymax - ymin);
    xmin -= padx;
    xmax += padx;
    ymin -= pady;
    ymax += pady;

    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"" << mt - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << escape(title) << "</text>\n";

    // decade grid
    svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int d = static_cast<int>(std::ceil(xmin)); d <= std::floor(xmax); ++d)
        svg << "<line x1=\"" << px(d) << "\" y1=\"" << py(ymin) << "\" x2=\""
            << px(d) << "\" y2=\"" << py(ymax) << "\"/>\n";
    for (int d = static_cast<int>(std::ceil(ymin)); d <= std::floor(ymax); ++d)
        svg << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(d) << "\" x2=\""
            << px(xmax) << "\" y2=\"" << py(d) << "\"/>\n";
    svg << "</g>\n";

    // frame
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
        << "\" height=\"" << H - mt - mb
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // tick labels
    svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int d = static_cast<int>(std::ceil(xmin)); d <= std::floor(xmax); ++d)
        svg << "<text x=\"" << px(d) << "\" y=\"" << H - mb + 16
            << "\" text-anchor=\"middle\">" << tick_label(d) << "</text>\n";
    for (int d = static_cast<int>(std::ceil(ymin)); d <= std::floor(ymax); ++d)
        svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(d) + 4
            << "\" text-anchor=\"end\">" << tick_label(d) << "</text>\n";
    svg << "</g>\n";

    svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(xlabel) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << (mt + H - mb) / 2 << ")\">"
        << escape(ylabel) << "</text>\n";

    // data
    int ci = 0;
    double ly_legend = mt + 16;
    for (const auto& s : series) {
        const char* color = palette[ci % 8];
        std::ostringstream pts;
        for (const auto& p : s.points) {
            if (!(p[0] > 0) || !(p[1] > 0) || !std::isfinite(p[0]) ||
                !std::isfinite(p[1]))
                continue;
            pts << px(std::log10(p[0])) << "," << py(std::log10(p[1])) << " ";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
        for (const auto& p : s.points) {
            if (!(p[0] > 0) || !(p[1] > 0) || !std::isfinite(p[0]) ||
                !std::isfinite(p[1]))
                continue;
            svg << "<circle cx=\"" << px(std::log10(p[0])) << "\" cy=\""
                << py(std::log10(p[1])) << "\" r=\"2.6\" fill=\"" << color
                << "\"/>\n";
        }
        svg << "<text x=\"" << W - mr - 8 << "\" y=\"" << ly_legend
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
            << "fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
        ly_legend += 16;
        ++ci;
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_loglog_svg: cannot open " + path);
    out << svg.str();
    if (!out) throw std::runtime_error("write_loglog_svg: write failed for " + path);
}

}  // namespace wkbsplit
