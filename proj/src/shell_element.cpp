#include "isoshell/shell_element.hpp"

#include "isoshell/error.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>

namespace isoshell {

void Material::validate() const {
    if (!(youngs > 0.0)) throw Error(ErrorKind::InvalidArgument, "Young's modulus must be positive");
    if (!(poisson > -1.0 && poisson < 0.5)) throw Error(ErrorKind::InvalidArgument, "Poisson's ratio must lie in (-1, 0.5)");
}

namespace {

using Coords = Eigen::Matrix<double, 3, 2>;

Eigen::Matrix3d plane_stress(const Material& mat, double rigidity) {
    const double nu = mat.poisson;
    Eigen::Matrix3d d;
    d << 1, nu, 0, nu, 1, 0, 0, 0, 0.5 * (1 - nu);
    return rigidity * d;
}

// Gradients of the area coordinates: dL_i/dx = beta_i / 2A, dL_i/dy = gamma_i / 2A.
struct AreaGradients {
    std::array<double, 3> beta, gamma;
    double area2;
};

AreaGradients area_gradients(const Coords& xy) {
    AreaGradients g{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        g.beta[i] = xy(j, 1) - xy(k, 1);
        g.gamma[i] = xy(k, 0) - xy(j, 0);
    }
    g.area2 = (xy(1, 0) - xy(0, 0)) * (xy(2, 1) - xy(0, 1)) - (xy(2, 0) - xy(0, 0)) * (xy(1, 1) - xy(0, 1));
    return g;
}

Eigen::Matrix<double, 3, 6> membrane_b(const AreaGradients& g) {
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
        b(0, 2 * i) = g.beta[i];
        b(1, 2 * i + 1) = g.gamma[i];
        b(2, 2 * i) = g.gamma[i];
        b(2, 2 * i + 1) = g.beta[i];
    }
    return b / g.area2;
}

void check_triangle(const Coords& xy, double thickness) {
    const double a2 = area_gradients(xy).area2;
    double longest = 0.0;
    for (int i = 0; i < 3; ++i) longest = std::max(longest, (xy.row(i) - xy.row((i + 1) % 3)).squaredNorm());
    if (!(a2 > 1e-14 * longest) || !std::isfinite(a2))
        throw Error(ErrorKind::DegenerateElement, "triangle has (near) zero area");
    if (!(thickness > 0.0) || !std::isfinite(thickness))
        throw Error(ErrorKind::DegenerateElement, "shell thickness must be positive");
}

} // namespace

Eigen::Matrix3d element_frame(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e1 = (b - a).normalized();
    const Vec3 n = (b - a).cross(c - a).normalized();
    const Vec3 e2 = n.cross(e1);
    Eigen::Matrix3d r;
    r.row(0) = e1;
    r.row(1) = e2;
    r.row(2) = n;
    return r;
}

Coords local_coordinates(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Eigen::Matrix3d r = element_frame(a, b, c);
    Coords xy;
    xy.row(0).setZero();
    const Vec3 pb = r * (b - a), pc = r * (c - a);
    xy(1, 0) = pb.x();
    xy(1, 1) = 0.0;
    xy(2, 0) = pc.x();
    xy(2, 1) = pc.y();
    return xy;
}

Eigen::Matrix<double, 6, 6> membrane_local(const Coords& xy, double thickness, const Material& mat) {
    const AreaGradients g = area_gradients(xy);
    const auto b = membrane_b(g);
    const Eigen::Matrix3d d = plane_stress(mat, mat.youngs * thickness / (1 - mat.poisson * mat.poisson));
    return 0.5 * g.area2 * b.transpose() * d * b;
}

Eigen::Vector3d membrane_stress_local(const Coords& xy, const Eigen::Matrix<double, 6, 1>& uv, const Material& mat) {
    const auto b = membrane_b(area_gradients(xy));
    return plane_stress(mat, mat.youngs / (1 - mat.poisson * mat.poisson)) * (b * uv);
}

Eigen::Matrix<double, 9, 9> dkt_bending_local(const Coords& xy, double thickness, const Material& mat) {
    const AreaGradients g = area_gradients(xy);
    // side coefficients for the mid-side nodes 4 (side 2-3), 5 (side 3-1), 6 (side 1-2)
    std::array<double, 3> a{}, b{}, c{}, d{}, e{};
    for (int s = 0; s < 3; ++s) {
        const int i = (s + 1) % 3, j = (s + 2) % 3;
        const double x = xy(i, 0) - xy(j, 0), y = xy(i, 1) - xy(j, 1);
        const double l2 = x * x + y * y;
        a[s] = -x / l2;
        b[s] = 0.75 * x * y / l2;
        c[s] = (0.25 * x * x - 0.5 * y * y) / l2;
        d[s] = -y / l2;
        e[s] = (0.25 * y * y - 0.5 * x * x) / l2;
    }
    // Hx = sum_k N_k cx[k], Hy = sum_k N_k cy[k] (rotation fields of the DKT)
    using Row9 = Eigen::Matrix<double, 1, 9>;
    std::array<Row9, 6> cx, cy;
    for (auto& r : cx) r.setZero();
    for (auto& r : cy) r.setZero();
    for (int n = 0; n < 3; ++n) {
        cx[n](3 * n + 2) = 1.0;
        cy[n](3 * n + 1) = -1.0;
    }
    for (int s = 0; s < 3; ++s) {
        // side s joins corners i = s+1 and j = s+2 (mod 3)
        const int i = (s + 1) % 3, j = (s + 2) % 3;
        Row9& hx = cx[3 + s];
        Row9& hy = cy[3 + s];
        hx(3 * i) = 1.5 * a[s];
        hx(3 * j) = -1.5 * a[s];
        hy(3 * i) = 1.5 * d[s];
        hy(3 * j) = -1.5 * d[s];
        for (int corner : {i, j}) {
            hx(3 * corner + 1) = b[s];
            hx(3 * corner + 2) = -c[s];
            hy(3 * corner + 1) = e[s];
            hy(3 * corner + 2) = -b[s];
        }
    }
    const double rigidity =
        mat.youngs * thickness * thickness * thickness / (12.0 * (1 - mat.poisson * mat.poisson));
    const Eigen::Matrix3d dmat = plane_stress(mat, rigidity);
    Eigen::Matrix<double, 9, 9> k = Eigen::Matrix<double, 9, 9>::Zero();
    // curvatures are linear, so the mid-side rule integrates the quadratic integrand exactly
    const std::array<std::array<double, 3>, 3> points = {{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
    for (const auto& l : points) {
        std::array<double, 6> dndx{}, dndy{};
        std::array<double, 3> lx{}, ly{};
        for (int i = 0; i < 3; ++i) {
            lx[i] = g.beta[i] / g.area2;
            ly[i] = g.gamma[i] / g.area2;
        }
        for (int i = 0; i < 3; ++i) {
            dndx[i] = (4 * l[i] - 1) * lx[i];
            dndy[i] = (4 * l[i] - 1) * ly[i];
        }
        for (int s = 0; s < 3; ++s) {
            const int i = (s + 1) % 3, j = (s + 2) % 3;
            dndx[3 + s] = 4 * (l[i] * lx[j] + l[j] * lx[i]);
            dndy[3 + s] = 4 * (l[i] * ly[j] + l[j] * ly[i]);
        }
        Eigen::Matrix<double, 3, 9> bb = Eigen::Matrix<double, 3, 9>::Zero();
        for (int n = 0; n < 6; ++n) {
            bb.row(0) += dndx[n] * cx[n];
            bb.row(1) += dndy[n] * cy[n];
            bb.row(2) += dndy[n] * cx[n] + dndx[n] * cy[n];
        }
        k += (g.area2 / 6.0) * bb.transpose() * dmat * bb;
    }
    return 0.5 * (k + k.transpose());
}

ElementStiffness element_stiffness(const Vec3& pa, const Vec3& pb, const Vec3& pc, double thickness,
                                   const Material& mat) {
    const Coords xy = local_coordinates(pa, pb, pc);
    check_triangle(xy, thickness);
    const auto km = membrane_local(xy, thickness, mat);
    const auto kb = dkt_bending_local(xy, thickness, mat);

    Matrix18 membrane = Matrix18::Zero(), bending = Matrix18::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) membrane(6 * i + p, 6 * j + q) = km(2 * i + p, 2 * j + q);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) bending(6 * i + 2 + p, 6 * j + 2 + q) = kb(3 * i + p, 3 * j + q);
        }

    // drilling penalty: k * sum_i (rz_i - omega)^2 with omega the CST in-plane rotation
    double rot_diag = 0.0;
    for (int i = 0; i < 3; ++i) rot_diag = std::max({rot_diag, kb(3 * i + 1, 3 * i + 1), kb(3 * i + 2, 3 * i + 2)});
    const double kd = kDrillingFactor * rot_diag;
    const AreaGradients g = area_gradients(xy);
    Vector18 omega = Vector18::Zero();
    for (int i = 0; i < 3; ++i) {
        omega(6 * i) = -0.5 * g.gamma[i] / g.area2;   // -u,y / 2
        omega(6 * i + 1) = 0.5 * g.beta[i] / g.area2; // v,x / 2
    }
    for (int i = 0; i < 3; ++i) {
        Vector18 row = -omega;
        row(6 * i + 5) += 1.0;
        bending += kd * row * row.transpose();
    }

    const Eigen::Matrix3d r = element_frame(pa, pb, pc);
    Matrix18 t = Matrix18::Zero();
    for (int blk = 0; blk < 6; ++blk) t.block<3, 3>(3 * blk, 3 * blk) = r;
    ElementStiffness out;
    out.membrane = t.transpose() * membrane * t;
    out.bending = t.transpose() * bending * t;
    out.membrane = 0.5 * (out.membrane + out.membrane.transpose()).eval();
    out.bending = 0.5 * (out.bending + out.bending.transpose()).eval();
    return out;
}

} // namespace isoshell
