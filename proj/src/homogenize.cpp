#include "isoshell/homogenize.hpp"

#include "isoshell/error.hpp"
#include "isoshell/mesher.hpp"

#include <json.hpp>

#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

namespace isoshell {

Eigen::Matrix<double, 6, 6> ElasticConstants::matrix() const {
    Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) c(i, j) = i == j ? c11 : c12;
        c(3 + i, 3 + i) = c44;
    }
    return c;
}

ElasticConstants constants_from_energies(double e_u, double e_t, double e_s, double volume) {
    if (!(volume > 0.0)) throw Error(ErrorKind::InvalidArgument, "analysis volume must be positive");
    ElasticConstants c;
    c.c11 = 2.0 * e_u / volume;
    c.c12 = (e_t / 3.0 - e_u) / volume;
    c.c44 = 2.0 * e_s / volume;
    c.volume = volume;
    return c;
}

namespace {

double hill_residual(const LoadCaseSolution& s, double c11) {
    const double scale = s.sigma_macro.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double r = 0.0;
    for (int i = 0; i < 6; ++i)
        if (std::abs(s.sigma_macro(i)) > 1e-8 * std::abs(c11))
            r = std::max(r, std::abs(s.sigma_macro(i) - s.sigma_micro_avg(i)) / scale);
    return r;
}

} // namespace

HomogenizationResult run_homogenization(const TriMesh& mesh, std::span<const double> thickness, const Material& mat) {
    // U and T share the prescribed pattern (one factorization); S runs alongside
    std::array<ConstraintSet, 2> normal = {build_constraints(mesh, LoadCase::of(LoadKind::U)),
                                           build_constraints(mesh, LoadCase::of(LoadKind::T))};
    const ConstraintSet shear = build_constraints(mesh, LoadCase::of(LoadKind::S));
    auto shear_job = std::async(std::launch::async, [&] { return assemble_and_solve(mesh, thickness, mat, shear); });
    std::vector<LoadCaseSolution> ut;
    try {
        ut = assemble_and_solve(mesh, thickness, mat, std::span<const ConstraintSet>(normal));
    } catch (...) {
        shear_job.wait();
        throw;
    }

    HomogenizationResult r;
    r.solutions = {std::move(ut[0]), std::move(ut[1]), shear_job.get()};
    const auto& [u, t, s] = r.solutions;
    r.constants = constants_from_energies(u.e_total, t.e_total, s.e_total, mesh.box_volume());
    r.relative_density = relative_density(mesh, thickness);

    const double bulk3 = r.constants.c11 + 2.0 * r.constants.c12;
    const double from_u = u.sigma_macro(0) + 2.0 * u.sigma_macro(1);
    r.cross_check_residual = std::max(std::abs(t.sigma_macro(0) - from_u), std::abs(t.sigma_macro(0) - bulk3)) /
                             std::abs(bulk3);
    for (const auto& sol : r.solutions) {
        r.hill_residual = std::max(r.hill_residual, hill_residual(sol, r.constants.c11));
        r.warnings.insert(r.warnings.end(), sol.warnings.begin(), sol.warnings.end());
    }
    if (!(r.cross_check_residual < kCrossCheckTolerance)) {
        std::ostringstream msg;
        msg << "hydrostatic cross-check residual " << r.cross_check_residual << " exceeds " << kCrossCheckTolerance;
        throw Error(ErrorKind::ConsistencyFailure, msg.str());
    }
    if (!r.constants.stable()) r.warnings.push_back("UnstableTensor: homogenized constants violate cubic stability");
    return r;
}

double zener(const ElasticConstants& c) {
    const double d = c.c11 - c.c12;
    if (!(std::abs(d) >= 1e-12 * std::abs(c.c11)) || d == 0.0)
        throw Error(ErrorKind::DegenerateConstants, "c11 equals c12; the Zener index is undefined");
    return 2.0 * c.c44 / d;
}

namespace {

void require_stable(const ElasticConstants& c) {
    if (!c.stable()) {
        std::ostringstream msg;
        msg << "constants (c11 " << c.c11 << ", c12 " << c.c12 << ", c44 " << c.c44 << ") are not positive definite";
        throw Error(ErrorKind::UnstableTensor, msg.str());
    }
}

} // namespace

ModuliReport engineering_moduli(const ElasticConstants& c, double relative_density, const Material& mat) {
    require_stable(c);
    mat.validate();
    if (!(relative_density > 0.0)) throw Error(ErrorKind::InvalidArgument, "relative density must be positive");
    ModuliReport r;
    r.constants = c;
    r.relative_density = relative_density;
    r.zener = zener(c);
    r.poisson = c.c12 / (c.c11 + c.c12);
    r.youngs = (c.c11 - c.c12) * (c.c11 + 2.0 * c.c12) / (c.c11 + c.c12);
    r.shear = c.c44;
    r.bulk = (c.c11 + 2.0 * c.c12) / 3.0;
    const double scale = relative_density * mat.youngs;
    r.youngs_normalized = r.youngs / scale;
    r.shear_normalized = r.shear / scale;
    r.bulk_normalized = r.bulk / scale;
    return r;
}

double directional_young(const ElasticConstants& c, const Vec3& n) {
    require_stable(c);
    const double len = n.norm();
    if (!(std::abs(len - 1.0) < 1e-9)) throw Error(ErrorKind::InvalidArgument, "direction must be a unit vector");
    const double det = (c.c11 - c.c12) * (c.c11 + 2.0 * c.c12);
    const double s11 = (c.c11 + c.c12) / det;
    const double s12 = -c.c12 / det;
    const double s44 = 1.0 / c.c44;
    const double a = n.x() * n.x(), b = n.y() * n.y(), d = n.z() * n.z();
    const double inv = s11 - 2.0 * (s11 - s12 - 0.5 * s44) * (a * b + b * d + d * a);
    return 1.0 / inv;
}

HsBounds hs_upper_bounds(double rho, const Material& mat) {
    mat.validate();
    if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidArgument, "relative density must lie in (0, 1]");
    const double ks = mat.bulk_modulus(), gs = mat.shear_modulus();
    HsBounds b;
    b.bulk = 4.0 * gs * ks * rho / (4.0 * gs + 3.0 * ks * (1.0 - rho));
    // void inclusion: G = Gs + (1 - rho) / (-1/Gs + 6 (Ks + 2 Gs) rho / (5 Gs (3 Ks + 4 Gs)))
    b.shear = gs + (1.0 - rho) / (-1.0 / gs + 6.0 * (ks + 2.0 * gs) * rho / (5.0 * gs * (3.0 * ks + 4.0 * gs)));
    b.youngs = 9.0 * b.bulk * b.shear / (3.0 * b.bulk + b.shear);
    return b;
}

std::string to_json(const ModuliReport& r, int indent) {
    nlohmann::ordered_json j;
    j["relative_density"] = r.relative_density;
    j["c11"] = r.constants.c11;
    j["c12"] = r.constants.c12;
    j["c44"] = r.constants.c44;
    j["zener"] = r.zener;
    j["poisson"] = r.poisson;
    j["E"] = r.youngs;
    j["G"] = r.shear;
    j["K"] = r.bulk;
    j["E_normalized"] = r.youngs_normalized;
    j["G_normalized"] = r.shear_normalized;
    j["K_normalized"] = r.bulk_normalized;
    return j.dump(indent);
}

std::string csv_header() { return "rho_bar,c11,c12,c44,zener,poisson,E,G,K,E_norm,G_norm,K_norm"; }

std::string csv_row(const ModuliReport& r) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << r.relative_density << ',' << r.constants.c11 << ',' << r.constants.c12 << ',' << r.constants.c44 << ','
        << r.zener << ',' << r.poisson << ',' << r.youngs << ',' << r.shear << ',' << r.bulk << ','
        << r.youngs_normalized << ',' << r.shear_normalized << ',' << r.bulk_normalized;
    return out.str();
}

} // namespace isoshell
