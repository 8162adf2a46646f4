#pragma once

#include "isoshell/implicit_surface.hpp"

#include <Eigen/Core>

namespace isoshell {

/// Isotropic constituent. Units: MPa.
struct Material {
    double youngs = 190e3;
    double poisson = 0.3;

    void validate() const;
    double shear_modulus() const { return youngs / (2.0 * (1.0 + poisson)); }
    double bulk_modulus() const { return youngs / (3.0 * (1.0 - 2.0 * poisson)); }
};

using Matrix18 = Eigen::Matrix<double, 18, 18>;
using Vector18 = Eigen::Matrix<double, 18, 1>;

/// Relative weight of the drilling penalty against the largest rotational
/// diagonal entry of the element's bending block.
inline constexpr double kDrillingFactor = 1e-6;

/// Global element matrices. DOFs are node-major: (ux, uy, uz, rx, ry, rz) per corner.
/// `membrane` scales with thickness, `bending` (plate bending plus the drilling
/// penalty) with thickness cubed, so K = membrane + bending exactly.
struct ElementStiffness {
    Matrix18 membrane;
    Matrix18 bending;

    Matrix18 total() const { return membrane + bending; }
};

/// Orthonormal element frame: rows are e1 (along edge 0->1), e2 = n x e1, n.
Eigen::Matrix3d element_frame(const Vec3& a, const Vec3& b, const Vec3& c);

/// In-plane corner coordinates in the element frame (corner 0 at the origin).
Eigen::Matrix<double, 3, 2> local_coordinates(const Vec3& a, const Vec3& b, const Vec3& c);

/// Constant-strain membrane on local DOFs (u0, v0, u1, v1, u2, v2).
Eigen::Matrix<double, 6, 6> membrane_local(const Eigen::Matrix<double, 3, 2>& xy, double thickness,
                                           const Material& mat);

/// Discrete Kirchhoff triangle on local DOFs (w, rx, ry) per corner, with
/// rx = dw/dy and ry = -dw/dx.
Eigen::Matrix<double, 9, 9> dkt_bending_local(const Eigen::Matrix<double, 3, 2>& xy, double thickness,
                                              const Material& mat);

/// Membrane and bending stiffness in global coordinates. Throws DegenerateElement.
ElementStiffness element_stiffness(const Vec3& a, const Vec3& b, const Vec3& c, double thickness,
                                   const Material& mat);

/// Constant CST stress (s_xx, s_yy, s_xy) in the element frame for local
/// in-plane displacements (u0, v0, u1, v1, u2, v2).
Eigen::Vector3d membrane_stress_local(const Eigen::Matrix<double, 3, 2>& xy, const Eigen::Matrix<double, 6, 1>& uv,
                                      const Material& mat);

} // namespace isoshell
