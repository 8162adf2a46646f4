#include "isoshell/error.hpp"
#include "isoshell/shell_element.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <random>

using namespace isoshell;

namespace {

const Material steel{190e3, 0.3};

Eigen::Matrix<double, 3, 2> coords(double x2, double x3, double y3) {
    Eigen::Matrix<double, 3, 2> xy;
    xy << 0, 0, x2, 0, x3, y3;
    return xy;
}

template <int N>
int count_small_eigenvalues(const Eigen::Matrix<double, N, N>& k, double rel) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(k);
    const auto ev = es.eigenvalues();
    EXPECT_GT(ev.minCoeff(), -1e-9 * ev.maxCoeff());
    int n = 0;
    for (int i = 0; i < N; ++i)
        if (std::abs(ev(i)) < rel * ev.maxCoeff()) ++n;
    return n;
}

Matrix18 rigid_modes_global(const Vec3& a, const Vec3& b, const Vec3& c, int mode) {
    // 6 infinitesimal rigid motions: 3 translations, 3 rotations about the origin
    Vector18 u = Vector18::Zero();
    const Vec3 pts[3] = {a, b, c};
    for (int n = 0; n < 3; ++n) {
        if (mode < 3) {
            u(6 * n + mode) = 1.0;
        } else {
            const Vec3 w = Vec3::Unit(mode - 3);
            u.segment<3>(6 * n) = w.cross(pts[n]);
            u.segment<3>(6 * n + 3) = w;
        }
    }
    Matrix18 m = Matrix18::Zero();
    m.col(0) = u;
    return m;
}

} // namespace

TEST(ShellElement, ThicknessScalingIsExact) {
    const Vec3 a(0.1, 0.2, 0.3), b(1.0, 0.4, 0.2), c(0.3, 1.1, 0.7);
    const auto k1 = element_stiffness(a, b, c, 0.05, steel);
    const auto k2 = element_stiffness(a, b, c, 0.10, steel);
    for (int i = 0; i < 18; ++i)
        for (int j = 0; j < 18; ++j) {
            EXPECT_DOUBLE_EQ(k2.membrane(i, j), 2.0 * k1.membrane(i, j));
            EXPECT_DOUBLE_EQ(k2.bending(i, j), 8.0 * k1.bending(i, j));
        }
}

TEST(ShellElement, MembraneOfRightTriangleHasRankThree) {
    const auto km = membrane_local(coords(1, 0, 1), 0.1, steel);
    EXPECT_TRUE(km.isApprox(km.transpose(), 1e-14));
    EXPECT_EQ(count_small_eigenvalues<6>(km, 1e-10), 3);
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(km);
    EXPECT_EQ(lu.rank(), 3);
}

TEST(ShellElement, BendingBlockHasThreeZeroEnergyModes) {
    for (const auto& xy : {coords(1, 0, 1), coords(2.0, 0.7, 1.3), coords(1.0, 1.6, 0.4)}) {
        const auto kb = dkt_bending_local(xy, 0.1, steel);
        EXPECT_TRUE(kb.isApprox(kb.transpose(), 1e-14));
        EXPECT_EQ(count_small_eigenvalues<9>(kb, 1e-10), 3);
    }
}

TEST(ShellElement, DktPassesConstantCurvaturePatch) {
    // w = p x^2 + q x y + r y^2 + s x + t y + c: DKT reproduces the exact curvature field,
    // so the element energy equals 1/2 k^T D k A
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 0.07;
    const double dr = steel.youngs * h * h * h / (12 * (1 - steel.poisson * steel.poisson));
    Eigen::Matrix3d d;
    d << 1, steel.poisson, 0, steel.poisson, 1, 0, 0, 0, 0.5 * (1 - steel.poisson);
    d *= dr;
    for (int trial = 0; trial < 20; ++trial) {
        const auto xy = coords(1.0 + 0.5 * std::abs(u(rng)), 0.8 * u(rng), 0.5 + std::abs(u(rng)));
        const double p = u(rng), q = u(rng), r = u(rng), s = u(rng), t = u(rng), c0 = u(rng);
        Eigen::Matrix<double, 9, 1> dofs;
        for (int n = 0; n < 3; ++n) {
            const double x = xy(n, 0), y = xy(n, 1);
            dofs(3 * n) = p * x * x + q * x * y + r * y * y + s * x + t * y + c0;
            dofs(3 * n + 1) = q * x + 2 * r * y + t;    // rx = dw/dy
            dofs(3 * n + 2) = -(2 * p * x + q * y + s); // ry = -dw/dx
        }
        const Eigen::Vector3d kappa(2 * p, 2 * r, 2 * q);
        const double area = 0.5 * xy(1, 0) * xy(2, 1);
        const double exact = 0.5 * kappa.dot(d * kappa) * area;
        const auto kb = dkt_bending_local(xy, h, steel);
        EXPECT_NEAR(0.5 * dofs.dot(kb * dofs), exact, 1e-10 * exact);
    }
}

TEST(ShellElement, CstReproducesConstantStrainEnergy) {
    const auto xy = coords(1.3, 0.4, 0.9);
    const double ex = 0.01, ey = -0.004, gxy = 0.006;
    Eigen::Matrix<double, 6, 1> uv;
    for (int n = 0; n < 3; ++n) {
        const double x = xy(n, 0), y = xy(n, 1);
        uv(2 * n) = ex * x + 0.5 * gxy * y;
        uv(2 * n + 1) = ey * y + 0.5 * gxy * x;
    }
    const double h = 0.05, nu = steel.poisson;
    const Eigen::Vector3d sigma = membrane_stress_local(xy, uv, steel);
    const double f = steel.youngs / (1 - nu * nu);
    EXPECT_NEAR(sigma(0), f * (ex + nu * ey), 1e-9);
    EXPECT_NEAR(sigma(1), f * (ey + nu * ex), 1e-9);
    EXPECT_NEAR(sigma(2), f * 0.5 * (1 - nu) * gxy, 1e-9);
    const double area = 0.5 * 1.3 * 0.9;
    const double exact = 0.5 * h * area * sigma.dot(Eigen::Vector3d(ex, ey, gxy));
    const auto km = membrane_local(xy, h, steel);
    EXPECT_NEAR(0.5 * uv.dot(km * uv), exact, 1e-12 * exact);
}

TEST(ShellElement, GlobalElementHasSixRigidModes) {
    const Vec3 a(0.1, 0.2, 0.3), b(1.0, 0.4, 0.2), c(0.3, 1.1, 0.7);
    const auto k = element_stiffness(a, b, c, 0.05, steel).total();
    EXPECT_EQ(count_small_eigenvalues<18>(k, 1e-12), 6);
    for (int mode = 0; mode < 6; ++mode) {
        const Vector18 u = rigid_modes_global(a, b, c, mode).col(0);
        EXPECT_LT((k * u).norm(), 1e-9 * k.norm() * u.norm()) << mode;
    }
}

TEST(ShellElement, DrillingPenaltyIsSmall) {
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0.2, 0.9, 0);
    const auto k = element_stiffness(a, b, c, 0.04, steel);
    double max_rot = 0.0;
    for (int n = 0; n < 3; ++n)
        for (int r = 3; r < 5; ++r) max_rot = std::max(max_rot, k.bending(6 * n + r, 6 * n + r));
    for (int n = 0; n < 3; ++n) {
        EXPECT_GT(k.bending(6 * n + 5, 6 * n + 5), 0.0);
        EXPECT_LE(k.bending(6 * n + 5, 6 * n + 5), 1e-6 * max_rot * (1 + 1e-12));
    }
}

TEST(ShellElement, DegenerateInputsThrow) {
    const Vec3 a(0, 0, 0), b(1, 0, 0);
    try {
        element_stiffness(a, b, Vec3(2, 0, 0), 0.1, steel);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateElement);
    }
    EXPECT_THROW(element_stiffness(a, b, Vec3(0, 1, 0), 0.0, steel), Error);
    EXPECT_THROW(element_stiffness(a, b, Vec3(0, 1, 0), -1.0, steel), Error);
}

TEST(Material, Validation) {
    EXPECT_NO_THROW(steel.validate());
    EXPECT_THROW((Material{-1.0, 0.3}.validate()), Error);
    EXPECT_THROW((Material{1.0, 0.5}.validate()), Error);
    EXPECT_NEAR(steel.shear_modulus(), 190e3 / 2.6, 1e-9);
}
