#pragma once

#include "isoshell/fea.hpp"

#include <array>
#include <string>

namespace isoshell {

/// Cubic elasticity constants of the lattice (MPa) and the analysis-box volume (mm^3).
struct ElasticConstants {
    double c11 = 0.0, c12 = 0.0, c44 = 0.0;
    double volume = 0.0;

    /// c11 + 2 c12 > 0, c11 - c12 > 0, c44 > 0.
    bool stable() const { return c11 + 2 * c12 > 0 && c11 - c12 > 0 && c44 > 0; }
    /// 6x6 Voigt stiffness, engineering shear strains.
    Eigen::Matrix<double, 6, 6> matrix() const;
};

struct HomogenizationResult {
    ElasticConstants constants;
    std::array<LoadCaseSolution, 3> solutions; // U, T, S
    double relative_density = 0.0;
    double cross_check_residual = 0.0; // c11 + 2 c12 from the T case against the U stresses
    double hill_residual = 0.0;        // max relative end-face vs volume-average stress mismatch
    std::vector<std::string> warnings;
};

/// Relative tolerance of the hydrostatic cross-check.
inline constexpr double kCrossCheckTolerance = 1e-5;

/// Solves U, T and S on an eighth-cell mesh and converts the energies:
/// c11 = 2 e_U / V, c12 = (e_T / 3 - e_U) / V, c44 = 2 e_S / V.
/// Throws ConsistencyFailure when the cross-check exceeds kCrossCheckTolerance.
HomogenizationResult run_homogenization(const TriMesh& mesh, std::span<const double> thickness, const Material& mat);

/// Constants from the three strain energies alone.
ElasticConstants constants_from_energies(double e_u, double e_t, double e_s, double volume);

/// Zener index 2 c44 / (c11 - c12). Throws DegenerateConstants when c11 ~ c12.
double zener(const ElasticConstants& c);

struct ModuliReport {
    double zener = 0.0;
    double poisson = 0.0;
    double youngs = 0.0, shear = 0.0, bulk = 0.0; // MPa
    double youngs_normalized = 0.0, shear_normalized = 0.0, bulk_normalized = 0.0; // over rho * E_s
    double relative_density = 0.0;
    ElasticConstants constants;
};

/// Cubic closed forms: K = (c11 + 2 c12)/3, E = (c11 - c12)(c11 + 2 c12)/(c11 + c12),
/// nu = c12/(c11 + c12), G = c44. Throws UnstableTensor.
ModuliReport engineering_moduli(const ElasticConstants& c, double relative_density, const Material& mat);

/// Young's modulus along the unit direction n. Throws UnstableTensor.
double directional_young(const ElasticConstants& c, const Vec3& n);

struct HsBounds {
    double youngs = 0.0, shear = 0.0, bulk = 0.0;
};

/// Two-phase solid/void Hashin-Shtrikman upper bounds at solid fraction rho.
HsBounds hs_upper_bounds(double relative_density, const Material& mat);

std::string to_json(const ModuliReport& r, int indent = 2);
std::string csv_header();
std::string csv_row(const ModuliReport& r);

} // namespace isoshell
