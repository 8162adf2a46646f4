#pragma once

#include "isoshell/mesh_io.hpp"
#include "isoshell/implicit_surface.hpp"
#include "isoshell/tri_mesh.hpp"

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace isoshell {

enum class Face : unsigned char { Top, Bottom, Lateral };

/// Closed solid produced by offsetting a mid-surface.
struct SolidMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    std::vector<Face> provenance; // per triangle

    double volume() const { return signed_volume(vertices, triangles); }
};

/// Mean of the incident element thicknesses at each vertex. Throws IsolatedVertex.
std::vector<double> nodal_thickness(const TriMesh& mesh, std::span<const double> thickness);

/// Area-weighted average of incident face normals, normalized.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

/// Top = p + n t/2, bottom = p - n t/2, joined by lateral quad strips along every
/// boundary loop. Offset boundary vertices are projected back onto their tagged
/// planes. Throws OpenBoundary for a boundary edge on no common plane and
/// SelfIntersection (listing triangle pairs) if the result intersects itself.
SolidMesh offset_shell(const TriMesh& mesh, std::span<const double> nodal_t);

/// As above with caller-supplied unit vertex normals.
SolidMesh offset_shell(const TriMesh& mesh, std::span<const double> nodal_t, std::span<const Vec3> normals);

/// Unit level-set gradient at each vertex (central differences), oriented to agree
/// with vertex_normals. Smoother than face averages on coarse or sliver-heavy meshes.
std::vector<Vec3> surface_normals(const TriMesh& mesh, const ImplicitSurface& surface);

/// Index pairs of non-adjacent triangles that intersect (empty when clean).
std::vector<std::pair<int, int>> self_intersections(std::span<const Vec3> vertices, std::span<const Tri> triangles,
                                                    std::size_t max_pairs = 16);

/// Number of edges whose degree is not exactly 2.
std::size_t non_manifold_edge_count(std::span<const Tri> triangles);

/// Writes the solid as STL; refuses (NotWatertight) if any edge degree differs from 2.
void export_solid(const SolidMesh& solid, const std::filesystem::path& path, StlFormat format = StlFormat::Binary);

struct SolidMetrics {
    double volume = 0.0;
    double shell_volume = 0.0; // sum of delta_i A_i
    double relative_density = 0.0;
    double min_thickness = 0.0, max_thickness = 0.0;
    std::size_t triangles = 0;
};

SolidMetrics solid_metrics(const SolidMesh& solid, const TriMesh& mid, std::span<const double> thickness);
void save_metrics(const SolidMetrics& m, const std::filesystem::path& path);

} // namespace isoshell
