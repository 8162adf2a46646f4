#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace isoshell {

struct CurveMeta {
    double height = 0.0; // specimen height h, mm
    double area = 0.0;   // end-face area A0, mm^2
    double relative_density = 0.0;
    std::string direction;
};

/// Engineering stress-strain samples in file order.
struct CompressionCurve {
    std::vector<double> strain;
    std::vector<double> stress; // MPa
    CurveMeta meta;
    std::vector<std::string> warnings;
};

/// CSV with a header row holding either (strain, stress) or (displacement_mm,
/// load_N); the latter is converted with e = d / h and s = P / A0. Consecutive
/// samples at the same strain are averaged. Throws SchemaError.
CompressionCurve load_curve(const std::filesystem::path& path, const CurveMeta& meta);

/// Same ingestion from in-memory text.
CompressionCurve parse_curve(const std::string& csv, const CurveMeta& meta);

struct SlopeEstimate {
    double value = 0.0; // MPa
    double window_lo = 0.0, window_hi = 0.0;
    double r2 = 0.0;
};

/// Least-squares slope of stress against strain over samples [first, last).
SlopeEstimate fit_slope(std::span<const double> strain, std::span<const double> stress, std::size_t first,
                        std::size_t last);

/// Unload segments are maximal runs of decreasing stress (at least 3 samples);
/// each is fitted over its middle `fraction` and the slopes are averaged.
/// Throws InsufficientRange when no segment is found.
SlopeEstimate unload_slope(const CompressionCurve& curve, double fraction = 0.6);

inline constexpr double kRigidMachine = std::numeric_limits<double>::infinity();

/// E = h k_m k_ms / (h k_m - A0 k_ms), machine stiffness k_m in N/mm.
/// Throws InconsistentStiffness when h k_m <= A0 k_ms.
double corrected_modulus(double k_ms, double k_m, double height, double area);

/// Samples that reach a new maximum strain; unload/reload loops are dropped.
/// The energy measures below are evaluated on this envelope.
CompressionCurve loading_envelope(const CompressionCurve& curve);

/// (5 / rho) * integral of stress over strain [0.2, 0.4]. Throws InsufficientRange.
double plateau_stress(const CompressionCurve& curve);

struct Efficiency {
    std::vector<double> strain, stress; // loading envelope
    std::vector<double> eta;       // per sample
    std::vector<double> absorbed;  // running integral of stress, per sample
    double densification_strain = 0.0;
    std::size_t densification_index = 0;
};

/// eta(e) = (1 / s(e)) * integral_0^e s. Densification strain = first argmax.
/// Throws ZeroStress when any sample after the first has s <= 0.
Efficiency efficiency_and_densification(const CompressionCurve& curve);

/// (1 / rho) * integral_0^{e_d} s. Throws InsufficientRange.
double specific_energy_absorption(const CompressionCurve& curve, double densification_strain);

struct DirectionReport {
    double modulus = 0.0;
    double plateau = 0.0;
    double sea = 0.0;
};

struct Ratio {
    double value = 1.0;
    std::string max_label, min_label;
};

struct AnisotropySummary {
    Ratio modulus, plateau, sea;
};

/// Max/min ratios across direction labels. Throws InvalidArgument for fewer than two.
AnisotropySummary anisotropy_summary(const std::map<std::string, DirectionReport>& reports);

/// Trapezoidal integral of y(x) over [a, b] with linear interpolation at the ends.
double integrate(std::span<const double> x, std::span<const double> y, double a, double b);

} // namespace isoshell
