#include "svg.hpp"

#include "isoshell/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace isoshell::cli {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

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

// 1, 2 or 5 times a power of ten, giving roughly five intervals.
double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

std::string number(double v) {
    std::ostringstream s;
    s << std::setprecision(4) << (std::abs(v) < 1e-12 ? 0.0 : v);
    return s.str();
}

} // namespace

std::string render_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                        const std::vector<Series>& series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    y0 = std::min(y0, 0.0);
    x0 = std::min(x0, 0.0);
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const double xs = nice_step(x1 - x0), ys = nice_step(y1 - y0);
    x1 = std::ceil(x1 / xs) * xs;
    y1 = std::ceil(y1 / ys) * ys;
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << std::fixed << std::setprecision(2);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    for (double x = x0; x <= x1 + 1e-9 * xs; x += xs) {
        o << "<line x1=\"" << px(x) << "\" y1=\"" << kTop << "\" x2=\"" << px(x) << "\" y2=\"" << kTop + ph
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << px(x) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << number(x)
          << "</text>\n";
    }
    for (double y = y0; y <= y1 + 1e-9 * ys; y += ys) {
        o << "<line x1=\"" << kLeft << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << py(y)
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << number(y)
          << "</text>\n";
    }
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
      << "</text>\n";
    o << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(ylabel) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.markers) {
            for (std::size_t i = 0; i < n; ++i)
                o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"4\" fill=\"" << s.color
                  << "\"/>\n";
        } else if (n > 0) {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < n; ++i) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            o << "\"/>\n";
        }
        const double ly = kTop + 14 + 16 * k;
        o << "<rect x=\"" << kLeft + 10 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
          << "\"/>\n";
        o << "<text x=\"" << kLeft + 26 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                const std::string& ylabel, const std::vector<Series>& series) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << render_plot(title, xlabel, ylabel, series);
}

} // namespace isoshell::cli
