#pragma once

#include "isoshell/implicit_surface.hpp"
#include "isoshell/tri_mesh.hpp"

#include <Eigen/Core>

#include <span>

namespace isoshell {

/// Resolutions below this are rejected as under-resolved.
inline constexpr int kMinResolution = 8;

/// Vertex weld tolerance (mm) for mirror and tile operations.
inline constexpr double kWeldTolerance = 1e-9;

struct MeshingOptions {
    int resolution = 48;           // grid cells along the half cell D/2
    double collapse_fraction = 0.2; // edges shorter than this * grid spacing are collapsed
    double sliver_angle = 10.0;     // degrees; triangles with a smaller angle lose their shortest edge
};

/// Triangulates the zero set of `surface` inside the fundamental tetrahedron
/// {0 <= x <= y <= z <= D/2}. Planes: "x0" (x = 0), "xy" (x = y), "yz" (y = z), "zL" (z = D/2).
TriMesh mesh_fundamental_unit(const ImplicitSurface& surface, const CellSpec& spec,
                              const MeshingOptions& options = {});

/// Exact isometry p -> linear * p + shift where linear is a signed permutation.
struct Isometry {
    Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
    Vec3 shift = Vec3::Zero();

    Vec3 apply(const Vec3& p) const;
    bool reverses_orientation() const { return linear.determinant() < 0.0; }
};

/// Appends the mirror image of `mesh` under `reflection` and welds the seam.
TriMesh reflect_and_weld(const TriMesh& mesh, const Isometry& reflection);

/// Fundamental -> eighth cell (six axis-permutation copies, domain_map filled)
/// or eighth -> unit cell (eight sign-flip copies). Fundamental -> unit does both.
TriMesh mirror_expand(const TriMesh& mesh, Domain target);

/// Translated copies of a unit cell on an nx x ny x nz grid, welded.
TriMesh tile(const TriMesh& unit_cell, int nx, int ny, int nz);

/// Full pipeline for a CellSpec: fundamental mesh then expansion to spec.domain.
TriMesh build_cell_mesh(const ImplicitSurface& surface, const CellSpec& spec,
                        const MeshingOptions& options = {});

/// sum(thickness_i * area_i) / box volume.
double relative_density(const TriMesh& mesh, std::span<const double> thickness);

/// Per-triangle field of an expanded mesh pulled from the mesh it was expanded from.
std::vector<double> pull_back(const TriMesh& expanded, std::span<const double> source_field);

/// Collapses edges shorter than min_length (and the shortest edge of any triangle
/// with an angle below sliver_angle_deg) while keeping boundary vertices on their
/// planes and the surface edge-manifold. Returns the number of collapses.
int collapse_short_edges(TriMesh& mesh, double min_length, double sliver_angle_deg = 0.0);

/// Delaunay-style flips of interior edges between nearly coplanar faces.
/// Never creates an interior edge joining two vertices of one plane.
int flip_edges(TriMesh& mesh, double min_cos_dihedral);

} // namespace isoshell
