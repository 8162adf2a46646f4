#include "isoshell/error.hpp"
#include "isoshell/homogenize.hpp"
#include "isoshell/mesher.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <random>

using namespace isoshell;

namespace {

const Material steel{190e3, 0.3};

TriMesh eighth(const std::string& preset, int resolution) {
    CellSpec spec;
    spec.size = 2.0;
    spec.domain = Domain::Eighth;
    MeshingOptions opt;
    opt.resolution = resolution;
    return build_cell_mesh(make_preset(preset, spec.size), spec, opt);
}

const TriMesh& coarse_iwp() {
    static const TriMesh m = eighth("iwp", 12);
    return m;
}

std::vector<double> uniform(const TriMesh& m, double t = 2.0 / 50) { return std::vector<double>(m.num_triangles(), t); }

using Tensor4 = std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3>;

constexpr int kVoigt[3][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}};

// Compliance as a full fourth-order tensor (engineering-shear Voigt -> tensor factors).
Tensor4 compliance_tensor(const ElasticConstants& c) {
    const Eigen::Matrix<double, 6, 6> s = c.matrix().inverse();
    Tensor4 t{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const int a = kVoigt[i][j], b = kVoigt[k][l];
                    const double f = (a >= 3 ? 0.5 : 1.0) * (b >= 3 ? 0.5 : 1.0);
                    t[i][j][k][l] = f * s(a, b);
                }
    return t;
}

// Rotate the compliance so n becomes the first axis, then E = 1 / S'_1111.
double rotated_young(const ElasticConstants& c, const Vec3& n, std::mt19937& rng) {
    const Tensor4 s = compliance_tensor(c);
    std::normal_distribution<double> g;
    Vec3 helper(g(rng), g(rng), g(rng));
    const Vec3 e2 = (helper - helper.dot(n) * n).normalized();
    Eigen::Matrix3d r;
    r.row(0) = n;
    r.row(1) = e2;
    r.row(2) = n.cross(e2);
    double s1111 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) s1111 += r(0, i) * r(0, j) * r(0, k) * r(0, l) * s[i][j][k][l];
    return 1.0 / s1111;
}

} // namespace

TEST(Zener, IsotropicAndDegenerate) {
    EXPECT_DOUBLE_EQ(zener({2.0, 1.0, 0.5, 1.0}), 1.0);
    try {
        zener({1.0, 1.0, 0.5, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateConstants);
    }
}

TEST(Zener, ReferenceConstants) {
    const double c11 = 3.0, c12 = 1.2;
    const ElasticConstants c{c11, c12, 0.827 * (c11 - c12) / 2.0, 1.0};
    EXPECT_NEAR(zener(c), 0.827, 1e-12);
}

TEST(Moduli, IsotropicRoundTrip) {
    const double e = 1.0, nu = 0.3;
    const double lambda = e * nu / ((1 + nu) * (1 - 2 * nu)), mu = e / (2 * (1 + nu));
    const ElasticConstants c{lambda + 2 * mu, lambda, mu, 1.0};
    EXPECT_NEAR(c.c11, 1.34615, 1e-5);
    EXPECT_NEAR(c.c12, 0.57692, 1e-5);
    EXPECT_NEAR(c.c44, 0.38462, 1e-5);
    const auto r = engineering_moduli(c, 1.0, Material{1.0, 0.3});
    EXPECT_NEAR(r.youngs, 1.0, 1e-12);
    EXPECT_NEAR(r.poisson, 0.3, 1e-12);
    EXPECT_NEAR(r.bulk, 0.83333333333333, 1e-12);
    EXPECT_NEAR(r.zener, 1.0, 1e-12);
}

TEST(Moduli, UnstableConstantsAreRejected) {
    for (const ElasticConstants& c : {ElasticConstants{1.0, 2.0, 1.0, 1.0}, ElasticConstants{1.0, -0.6, 1.0, 1.0},
                                      ElasticConstants{2.0, 1.0, -1.0, 1.0}}) {
        try {
            engineering_moduli(c, 0.1, steel);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::UnstableTensor);
        }
        EXPECT_THROW(directional_young(c, Vec3::UnitX()), Error);
    }
}

TEST(DirectionalYoung, IsotropicTensorIsDirectionIndependent) {
    const double lambda = 0.3 / (1.3 * 0.4), mu = 1.0 / 2.6;
    const ElasticConstants c{lambda + 2 * mu, lambda, mu, 1.0};
    const double e100 = directional_young(c, Vec3(1, 0, 0));
    EXPECT_NEAR(directional_young(c, Vec3(1, 1, 0).normalized()), e100, 1e-12);
    EXPECT_NEAR(directional_young(c, Vec3(1, 1, 1).normalized()), e100, 1e-12);
}

TEST(DirectionalYoung, MatchesTensorRotationOracle) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        const double c12 = 0.1 + u(rng);
        const ElasticConstants c{c12 + 0.2 + 2 * u(rng), c12, 0.1 + u(rng), 1.0};
        const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
        const double e = directional_young(c, n);
        EXPECT_NEAR(e, rotated_young(c, n, rng), 1e-10 * e);
    }
}

TEST(DirectionalYoung, AxisValueIsUniaxialModulus) {
    const ElasticConstants c{5.0, 2.0, 1.0, 1.0};
    const auto r = engineering_moduli(c, 1.0, Material{1.0, 0.3});
    EXPECT_NEAR(directional_young(c, Vec3::UnitY()), r.youngs, 1e-12);
}

TEST(HsBounds, DiluteLimitTriplet) {
    const auto b = hs_upper_bounds(1e-4, steel);
    const double s = 1e-4 * steel.youngs;
    EXPECT_NEAR(b.youngs / s, 0.499, 0.002);
    EXPECT_NEAR(b.shear / s, 0.202, 0.002);
    EXPECT_NEAR(b.bulk / s, 0.317, 0.002);
}

TEST(HsBounds, SolidLimitAndMonotone) {
    const auto b = hs_upper_bounds(1.0, steel);
    EXPECT_NEAR(b.youngs, steel.youngs, 1e-9 * steel.youngs);
    EXPECT_NEAR(b.shear, steel.shear_modulus(), 1e-9 * steel.youngs);
    EXPECT_NEAR(b.bulk, steel.bulk_modulus(), 1e-9 * steel.youngs);
    HsBounds prev = hs_upper_bounds(1e-3, steel);
    for (int i = 2; i <= 1000; ++i) {
        const HsBounds cur = hs_upper_bounds(i * 1e-3, steel);
        EXPECT_GT(cur.bulk, prev.bulk);
        EXPECT_GT(cur.shear, prev.shear);
        EXPECT_GT(cur.youngs, prev.youngs);
        prev = cur;
    }
    EXPECT_THROW(hs_upper_bounds(0.0, steel), Error);
}

TEST(Homogenization, EnergyFormulas) {
    const auto c = constants_from_energies(2.0, 12.0, 0.5, 2.0);
    EXPECT_DOUBLE_EQ(c.c11, 2.0);
    EXPECT_DOUBLE_EQ(c.c12, 1.0);
    EXPECT_DOUBLE_EQ(c.c44, 0.5);
}

TEST(Homogenization, SelfConsistencyOnCoarseIwp) {
    const auto& m = coarse_iwp();
    const auto r = run_homogenization(m, uniform(m), steel);
    EXPECT_LT(r.cross_check_residual, 1e-5);
    EXPECT_LT(r.hill_residual, 1e-5);
    EXPECT_EQ(r.solutions[0].kind, LoadKind::U);
    EXPECT_EQ(r.solutions[1].kind, LoadKind::T);
    EXPECT_EQ(r.solutions[2].kind, LoadKind::S);
    EXPECT_TRUE(r.constants.stable());
    // c11 and c12 read directly off the U stresses agree with the energy route
    EXPECT_NEAR(r.solutions[0].sigma_macro(0), r.constants.c11, 1e-8 * r.constants.c11);
    EXPECT_NEAR(r.solutions[0].sigma_macro(1), r.constants.c12, 1e-6 * r.constants.c11);
    EXPECT_NEAR(r.solutions[2].sigma_macro(3), r.constants.c44, 1e-8 * r.constants.c44);
}

TEST(Homogenization, ScalesLinearlyWithYoungsModulus) {
    const auto& m = coarse_iwp();
    const auto a = run_homogenization(m, uniform(m), steel);
    const auto b = run_homogenization(m, uniform(m), Material{10 * steel.youngs, steel.poisson});
    EXPECT_NEAR(b.constants.c11, 10 * a.constants.c11, 1e-10 * b.constants.c11);
    EXPECT_NEAR(b.constants.c12, 10 * a.constants.c12, 1e-10 * b.constants.c11);
    EXPECT_NEAR(b.constants.c44, 10 * a.constants.c44, 1e-10 * b.constants.c44);
    const auto ra = engineering_moduli(a.constants, a.relative_density, steel);
    const auto rb = engineering_moduli(b.constants, b.relative_density, Material{10 * steel.youngs, steel.poisson});
    EXPECT_NEAR(ra.bulk_normalized, rb.bulk_normalized, 1e-12);
    EXPECT_NEAR(ra.zener, rb.zener, 1e-12);
}

TEST(Homogenization, ThickerShellIsStiffer) {
    const auto& m = coarse_iwp();
    const auto a = run_homogenization(m, uniform(m, 0.04), steel);
    const auto b = run_homogenization(m, uniform(m, 0.08), steel);
    EXPECT_GT(b.constants.c11, a.constants.c11);
    EXPECT_GT(b.constants.c44, a.constants.c44);
}

TEST(Homogenization, NormalizedModuliInvariantUnderCellSize) {
    CellSpec spec;
    spec.domain = Domain::Eighth;
    MeshingOptions opt;
    opt.resolution = 12;
    std::vector<ModuliReport> reports;
    for (double d : {2.0, 5.0}) {
        spec.size = d;
        const TriMesh m = build_cell_mesh(make_preset("iwp", d), spec, opt);
        const auto r = run_homogenization(m, uniform(m, d / 50), steel);
        reports.push_back(engineering_moduli(r.constants, r.relative_density, steel));
    }
    EXPECT_NEAR(reports[0].bulk_normalized, reports[1].bulk_normalized, 1e-3 * reports[0].bulk_normalized);
    EXPECT_NEAR(reports[0].zener, reports[1].zener, 1e-3 * reports[0].zener);
}

TEST(Homogenization, BulkModulusStaysBelowHsBound) {
    for (const std::string preset : {"iwp", "frd", "n"}) {
        const TriMesh m = eighth(preset, 16);
        const auto r = run_homogenization(m, uniform(m), steel);
        const auto rep = engineering_moduli(r.constants, r.relative_density, steel);
        const auto hs = hs_upper_bounds(r.relative_density, steel);
        EXPECT_LE(rep.bulk_normalized, hs.bulk / (r.relative_density * steel.youngs) + 0.01) << preset;
        EXPECT_LT(r.hill_residual, 1e-5) << preset;
        EXPECT_LT(r.cross_check_residual, 1e-5) << preset;
    }
}

TEST(Report, JsonAndCsvCarryAllFields) {
    const ElasticConstants c{5.0, 2.0, 1.0, 1.0};
    const auto r = engineering_moduli(c, 0.1, Material{100.0, 0.3});
    const std::string j = to_json(r);
    for (const char* key : {"zener", "poisson", "E_normalized", "G_normalized", "K_normalized", "c44"})
        EXPECT_NE(j.find(key), std::string::npos) << key;
    const std::string row = csv_row(r), header = csv_header();
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}
