#include "isoshell/postprocess.hpp"

#include "isoshell/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace isoshell {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\"");
    const auto last = s.find_last_not_of(" \t\r\"");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

int column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

} // namespace

CompressionCurve parse_curve(const std::string& csv, const CurveMeta& meta) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::SchemaError, "empty curve file");
    const auto header = split(line);
    int cx = column(header, "strain"), cy = column(header, "stress");
    const bool raw = cx < 0 || cy < 0;
    if (raw) {
        cx = column(header, "displacement_mm");
        cy = column(header, "load_N");
        if (cx < 0 || cy < 0)
            throw Error(ErrorKind::SchemaError, "header needs strain,stress or displacement_mm,load_N columns");
        if (!(meta.height > 0.0) || !(meta.area > 0.0))
            throw Error(ErrorKind::SchemaError, "displacement/load data needs positive specimen height and area");
    }
    if (!(meta.relative_density > 0.0 && meta.relative_density < 1.0))
        throw Error(ErrorKind::SchemaError, "relative density must lie in (0, 1)");

    CompressionCurve c;
    c.meta = meta;
    int row = 1;
    int count = 0; // samples merged into the last entry
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (static_cast<int>(cells.size()) <= std::max(cx, cy))
            throw Error(ErrorKind::SchemaError, "row " + std::to_string(row) + " is missing a column");
        double x = 0.0, y = 0.0;
        try {
            std::size_t used = 0;
            x = std::stod(cells[cx], &used);
            if (used != cells[cx].size()) throw std::invalid_argument("trailing");
            y = std::stod(cells[cy], &used);
            if (used != cells[cy].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaError, "row " + std::to_string(row) + " has a non-numeric value");
        }
        if (raw) {
            x /= meta.height;
            y /= meta.area;
        }
        if (!c.strain.empty() && x == c.strain.back()) {
            // running mean of repeated strains
            ++count;
            c.stress.back() += (y - c.stress.back()) / count;
            continue;
        }
        if (!c.strain.empty() && x < c.strain.back() &&
            (c.warnings.empty() || c.warnings.back().rfind("NonMonotoneSegment", 0) != 0))
            c.warnings.push_back("NonMonotoneSegment: strain decreases at row " + std::to_string(row));
        if (x < 0.0) throw Error(ErrorKind::SchemaError, "negative strain at row " + std::to_string(row));
        c.strain.push_back(x);
        c.stress.push_back(y);
        count = 1;
    }
    if (c.strain.size() < 2) throw Error(ErrorKind::SchemaError, "curve needs at least two samples");
    return c;
}

CompressionCurve load_curve(const std::filesystem::path& path, const CurveMeta& meta) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_curve(ss.str(), meta);
}

SlopeEstimate fit_slope(std::span<const double> strain, std::span<const double> stress, std::size_t first,
                        std::size_t last) {
    if (last > strain.size() || last < first + 2) throw Error(ErrorKind::InsufficientRange, "slope fit needs two samples");
    const double n = static_cast<double>(last - first);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        mx += strain[i];
        my += stress[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        sxx += (strain[i] - mx) * (strain[i] - mx);
        sxy += (strain[i] - mx) * (stress[i] - my);
        syy += (stress[i] - my) * (stress[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::InsufficientRange, "slope fit window has no strain range");
    SlopeEstimate s;
    s.value = sxy / sxx;
    s.r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    const auto [lo, hi] = std::minmax_element(strain.begin() + first, strain.begin() + last);
    s.window_lo = *lo;
    s.window_hi = *hi;
    return s;
}

SlopeEstimate unload_slope(const CompressionCurve& curve, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fit fraction must lie in (0, 1]");
    const auto& s = curve.stress;
    std::vector<SlopeEstimate> fits;
    std::size_t i = 0;
    while (i + 1 < s.size()) {
        if (!(s[i + 1] < s[i])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j + 1 < s.size() && s[j + 1] < s[j]) ++j;
        const std::size_t len = j - i + 1;
        if (len >= 3) {
            const std::size_t trim = static_cast<std::size_t>(std::floor(0.5 * (1.0 - fraction) * len));
            std::size_t a = i + trim, b = j + 1 - trim;
            if (b < a + 2) {
                a = i;
                b = j + 1;
            }
            fits.push_back(fit_slope(curve.strain, s, a, b));
        }
        i = j;
    }
    if (fits.empty()) throw Error(ErrorKind::InsufficientRange, "no unload segment (3+ samples of decreasing stress)");
    SlopeEstimate out;
    out.window_lo = fits.front().window_lo;
    out.window_hi = fits.front().window_hi;
    for (const auto& f : fits) {
        out.value += f.value / fits.size();
        out.r2 += f.r2 / fits.size();
        out.window_lo = std::min(out.window_lo, f.window_lo);
        out.window_hi = std::max(out.window_hi, f.window_hi);
    }
    return out;
}

double corrected_modulus(double k_ms, double k_m, double height, double area) {
    if (!(k_ms > 0.0) || !(height > 0.0) || !(area > 0.0))
        throw Error(ErrorKind::InvalidArgument, "slope, height and area must be positive");
    if (std::isinf(k_m)) return k_ms;
    const double den = height * k_m - area * k_ms;
    if (!(den > 0.0)) {
        std::ostringstream msg;
        msg << "machine stiffness " << k_m << " N/mm is not above the series limit " << area * k_ms / height;
        throw Error(ErrorKind::InconsistentStiffness, msg.str());
    }
    return height * k_m * k_ms / den;
}

double integrate(std::span<const double> x, std::span<const double> y, double a, double b) {
    if (x.size() < 2 || a < x.front() || b > x.back() || b < a)
        throw Error(ErrorKind::InsufficientRange, "integration interval outside the sampled strain range");
    auto at = [&](double t) {
        const auto it = std::upper_bound(x.begin(), x.end(), t);
        const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - x.begin()), 1, x.size() - 1);
        const double w = x[k] == x[k - 1] ? 0.0 : (t - x[k - 1]) / (x[k] - x[k - 1]);
        return y[k - 1] + w * (y[k] - y[k - 1]);
    };
    double sum = 0.0, px = a, py = at(a);
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] <= a) continue;
        if (x[k] >= b) break;
        sum += 0.5 * (py + y[k]) * (x[k] - px);
        px = x[k];
        py = y[k];
    }
    sum += 0.5 * (py + at(b)) * (b - px);
    return sum;
}

CompressionCurve loading_envelope(const CompressionCurve& curve) {
    CompressionCurve out;
    out.meta = curve.meta;
    out.warnings = curve.warnings;
    for (std::size_t i = 0; i < curve.strain.size(); ++i)
        if (out.strain.empty() || curve.strain[i] > out.strain.back()) {
            out.strain.push_back(curve.strain[i]);
            out.stress.push_back(curve.stress[i]);
        }
    if (out.strain.size() < 2) throw Error(ErrorKind::InsufficientRange, "loading envelope has fewer than two samples");
    return out;
}

double plateau_stress(const CompressionCurve& input) {
    const auto curve = loading_envelope(input);
    if (curve.strain.front() > 0.2 || curve.strain.back() < 0.4)
        throw Error(ErrorKind::InsufficientRange, "curve does not cover the strain range [0.2, 0.4]");
    return 5.0 * integrate(curve.strain, curve.stress, 0.2, 0.4) / curve.meta.relative_density;
}

Efficiency efficiency_and_densification(const CompressionCurve& input) {
    const auto curve = loading_envelope(input);
    const auto& e = curve.strain;
    const auto& s = curve.stress;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i] > 0.0)) throw Error(ErrorKind::ZeroStress, "stress is not positive at sample " + std::to_string(i));
    Efficiency out;
    out.strain = e;
    out.stress = s;
    out.absorbed.resize(e.size());
    out.eta.resize(e.size());
    // the integral starts at zero strain; a first sample above zero is joined to the origin
    double w = e.front() > 0.0 ? 0.5 * s.front() * e.front() : 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (i > 0) w += 0.5 * (s[i] + s[i - 1]) * (e[i] - e[i - 1]);
        out.absorbed[i] = w;
        out.eta[i] = s[i] > 0.0 ? w / s[i] : 0.0;
    }
    for (std::size_t i = 1; i < e.size(); ++i)
        if (out.eta[i] > out.eta[out.densification_index]) out.densification_index = i;
    out.densification_strain = e[out.densification_index];
    return out;
}

double specific_energy_absorption(const CompressionCurve& input, double densification_strain) {
    const auto curve = loading_envelope(input);
    if (!(densification_strain >= 0.0) || densification_strain > curve.strain.back())
        throw Error(ErrorKind::InsufficientRange, "densification strain lies outside the curve");
    double w = 0.0;
    if (curve.strain.front() > 0.0) {
        const double e0 = curve.strain.front();
        if (densification_strain <= e0)
            return 0.5 * curve.stress.front() * densification_strain * densification_strain / e0 /
                   curve.meta.relative_density;
        w = 0.5 * curve.stress.front() * e0;
        w += integrate(curve.strain, curve.stress, e0, densification_strain);
    } else {
        w = integrate(curve.strain, curve.stress, 0.0, densification_strain);
    }
    return w / curve.meta.relative_density;
}

AnisotropySummary anisotropy_summary(const std::map<std::string, DirectionReport>& reports) {
    if (reports.size() < 2) throw Error(ErrorKind::InvalidArgument, "anisotropy needs at least two directions");
    auto ratio = [&](double DirectionReport::*field) {
        Ratio r;
        double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
        for (const auto& [label, rep] : reports) {
            if (rep.*field > hi) {
                hi = rep.*field;
                r.max_label = label;
            }
            if (rep.*field < lo) {
                lo = rep.*field;
                r.min_label = label;
            }
        }
        if (!(lo > 0.0)) throw Error(ErrorKind::InvalidArgument, "ratios need positive values");
        r.value = hi / lo;
        return r;
    };
    return {ratio(&DirectionReport::modulus), ratio(&DirectionReport::plateau), ratio(&DirectionReport::sea)};
}

} // namespace isoshell
