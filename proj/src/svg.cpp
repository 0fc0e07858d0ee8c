#include "gnnlab/experiments.hpp"
#include "gnnlab/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gnnlab {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

struct Series {
    std::string label;
    std::string colour;
    std::vector<std::pair<double, double>> points;
};

} // namespace

std::string trend_svg(const TrendReport& report) {
    std::vector<Series> series(2);
    series[0] = {"mean gap_loss", "#1f77b4", {}};
    series[1] = {report.bound_name + " / " + fmt(report.scale_factor), "#d62728", {}};
    for (const auto& pt : report.points) {
        if (std::isfinite(pt.mean_gap_loss)) series[0].points.emplace_back(pt.value, pt.mean_gap_loss);
        if (std::isfinite(pt.bound)) series[1].points.emplace_back(pt.value, pt.bound / report.scale_factor);
    }

    double x_lo = HUGE_VAL, x_hi = -HUGE_VAL, y_lo = HUGE_VAL, y_hi = -HUGE_VAL;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << to_string(report.kind)
        << " sweep (spearman rho = " << (std::isnan(report.spearman_rho) ? "n/a" : fmt(report.spearman_rho))
        << ")</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
        const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">" << fmt(xv)
            << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
            << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        if (!s.points.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"2\" points=\"";
            for (auto [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
            out << "\"/>\n";
            for (auto [x, y] : s.points)
                out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << s.colour
                    << "\"/>\n";
        }
        const double ly = kTop + 20 + 20 * static_cast<double>(k);
        out << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 30
            << "\" y2=\"" << ly << "\" stroke=\"" << s.colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_trend_svg(const TrendReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << trend_svg(report);
}

} // namespace gnnlab
