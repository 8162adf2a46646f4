#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>
#include <string_view>
#include <vector>

namespace isoshell {

using Vec3 = Eigen::Vector3d;

enum class Trig { Cos, Sin };

/// One factor trig(k * 2*pi * x_axis / D) of a Fourier product term.
struct TrigFactor {
    Trig fn = Trig::Cos;
    int axis = 0; // 0 = x, 1 = y, 2 = z
    int multiple = 1;
};

struct FourierTerm {
    double coefficient = 1.0;
    std::vector<TrigFactor> factors;
};

/// Periodic nodal surface: the zero level set of a finite trigonometric sum.
/// Coordinates are physical (mm); the period is the cell size D. The affine
/// part is zero for every periodic surface and only exists for test planes.
struct ImplicitSurface {
    std::string name;
    std::vector<FourierTerm> terms;
    double period = 1.0;
    Vec3 linear = Vec3::Zero();
    double constant = 0.0;

    double operator()(const Vec3& p) const;
};

/// Nodal approximations shipped with the library: "iwp", "frd", "n".
/// Throws Error(InvalidArgument) for anything else.
ImplicitSurface make_preset(std::string_view name, double period);

std::vector<std::string> preset_names();

/// Plane z = height (used for testing the mesher against analytic areas).
ImplicitSurface make_plane(double height, double period);

double evaluate_implicit(const ImplicitSurface& surface, const Vec3& p);

/// The 48 signed axis permutations of the cubic point group.
std::vector<Eigen::Matrix3d> cubic_symmetry_operations();

} // namespace isoshell
