#include "isoshell/error.hpp"
#include "isoshell/implicit_surface.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace isoshell;

TEST(ImplicitSurface, IwpAtOriginIsThree) {
    const auto iwp = make_preset("iwp", 2.0 * M_PI);
    EXPECT_DOUBLE_EQ(evaluate_implicit(iwp, Vec3::Zero()), 3.0);
}

TEST(ImplicitSurface, UnknownPresetThrows) {
    try {
        make_preset("gyroid-ish", 1.0);
        FAIL() << "expected an exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}

TEST(ImplicitSurface, PresetsAreInvariantUnderCubicGroup) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto ops = cubic_symmetry_operations();
    ASSERT_EQ(ops.size(), 48u);
    for (const auto& name : preset_names()) {
        const auto s = make_preset(name, 2.0);
        for (int i = 0; i < 50; ++i) {
            const Vec3 p(u(rng), u(rng), u(rng));
            const double f0 = s(p);
            for (const auto& m : ops) EXPECT_NEAR(s(m * p), f0, 1e-12) << name;
        }
    }
}

TEST(ImplicitSurface, PresetsArePeriodicAndMirrorSymmetricAboutHalfCell) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const double d = 5.0;
    for (const auto& name : preset_names()) {
        const auto s = make_preset(name, d);
        for (int i = 0; i < 100; ++i) {
            const Vec3 p(u(rng), u(rng), u(rng));
            for (int a = 0; a < 3; ++a) {
                Vec3 q = p;
                q[a] += d;
                EXPECT_NEAR(s(q), s(p), 1e-12);
                Vec3 r = p;
                r[a] = d - p[a]; // reflection about the plane x_a = D/2
                EXPECT_NEAR(s(r), s(p), 1e-12);
            }
        }
    }
}

// Bisection oracle on the preset formula: finds a root on [a, b] when the ends differ in sign.
static bool bisect_root(const ImplicitSurface& s, const Vec3& a, const Vec3& b, Vec3& root) {
    double fa = s(a), fb = s(b);
    if (fa * fb > 0.0) return false;
    Vec3 lo = a, hi = b;
    for (int i = 0; i < 200; ++i) {
        const Vec3 mid = 0.5 * (lo + hi);
        const double fm = s(mid);
        if ((fm < 0.0) == (fa < 0.0)) {
            lo = mid;
            fa = fm;
        } else {
            hi = mid;
        }
    }
    root = 0.5 * (lo + hi);
    return true;
}

TEST(ImplicitSurface, IwpCrossesZeroAlongCellEdge) {
    const double d = 2.0;
    const auto iwp = make_preset("iwp", d);
    Vec3 root;
    ASSERT_TRUE(bisect_root(iwp, Vec3::Zero(), Vec3(d / 2, 0, 0), root));
    EXPECT_NEAR(iwp(root), 0.0, 1e-12);
    EXPECT_GT(root.x(), 0.0);
    EXPECT_LT(root.x(), d / 2);
}

TEST(ImplicitSurface, IwpIsConstantAlongBodyDiagonal) {
    // 6 cos^2 s - 3 cos 2s == 3 identically, so the diagonal never meets the surface.
    const double d = 2.0;
    const auto iwp = make_preset("iwp", d);
    for (int i = 0; i <= 20; ++i) {
        const double t = 0.5 * d * i / 20.0;
        EXPECT_NEAR(iwp(Vec3(t, t, t)), 3.0, 1e-12);
    }
}

TEST(ImplicitSurface, NeoviusAndFrdChangeSignInsideEighthCell) {
    const double d = 2.0;
    for (const char* name : {"n", "frd"}) {
        const auto s = make_preset(name, d);
        Vec3 root;
        const bool found = bisect_root(s, Vec3::Zero(), Vec3::Constant(d / 2), root) ||
                           bisect_root(s, Vec3::Zero(), Vec3(d / 2, 0, 0), root);
        EXPECT_TRUE(found) << name;
    }
}

TEST(ImplicitSurface, PlaneIsAffine) {
    const auto plane = make_plane(0.5, 2.0);
    EXPECT_DOUBLE_EQ(plane(Vec3(0.3, 0.7, 0.5)), 0.0);
    EXPECT_DOUBLE_EQ(plane(Vec3(0.3, 0.7, 0.75)), 0.25);
}
