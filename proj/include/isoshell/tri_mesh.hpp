#pragma once

#include "isoshell/implicit_surface.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace isoshell {

using Tri = std::array<int, 3>;

/// Oriented plane n . x = offset. Mesh boundaries are required to lie on tagged planes.
struct Plane {
    std::string name;
    Vec3 normal = Vec3::UnitX();
    double offset = 0.0;

    double distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Provenance of an eighth-cell triangle: the fundamental element it images and
/// which of the six permutation copies (1..6) it belongs to.
struct DomainTag {
    int source = -1;
    int copy = 0;
};

enum class Domain { Fundamental, Eighth, Unit, Tiled };

std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

struct CellSpec {
    double size = 2.0; // D, mm
    Domain domain = Domain::Eighth;
    std::array<int, 3> tiles = {1, 1, 1};

    double half() const { return 0.5 * size; }
    void validate() const;
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;

    std::vector<Plane> planes;
    std::vector<std::uint32_t> plane_tags; // bit p set => vertex lies on planes[p]

    // Filled by mirror_expand to the eighth cell.
    std::vector<DomainTag> domain_map;
    // Index of the triangle in the mesh this one was copied from (mirror/tile ops).
    std::vector<int> source_element;

    Vec3 box_min = Vec3::Zero();
    Vec3 box_max = Vec3::Zero();
    CellSpec cell;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }

    double box_volume() const { return (box_max - box_min).prod(); }
    bool on_plane(int vertex, int plane) const { return (plane_tags[vertex] >> plane) & 1u; }
    int plane_index(const std::string& name) const;
};

/// An undirected edge with its incident triangles.
struct EdgeInfo {
    int a = -1, b = -1;
    std::vector<int> faces;
};

double triangle_area(const TriMesh& m, int t);
Vec3 triangle_normal(const TriMesh& m, int t); // unit normal per winding
double total_area(const TriMesh& m);
std::vector<double> triangle_areas(const TriMesh& m);

/// Undirected edges sorted by (a, b) with a < b.
std::vector<EdgeInfo> build_edges(const TriMesh& m);

/// Vertices incident to at least one edge used by exactly one triangle.
std::vector<char> boundary_vertices(const TriMesh& m);

/// Sets plane_tags from vertex positions (|distance| < tol).
void retag_planes(TriMesh& m, double tol = 1e-9);

/// Box planes named xmin, xmax, ymin, ymax, zmin, zmax in that order.
std::vector<Plane> box_planes(const Vec3& lo, const Vec3& hi);

struct MeshCheck {
    bool edge_manifold = true;       // no edge with more than 2 faces
    bool boundary_on_planes = true;  // every boundary edge has both ends on a common plane
    bool consistent_orientation = true;
    double min_area = 0.0;
    int boundary_edges = 0;
    std::string message;
};

MeshCheck check_mesh(const TriMesh& m);

/// Merges vertices closer than tol, drops triangles that collapse, and renumbers
/// vertices in first-use order. Per-triangle maps are kept aligned.
void weld_vertices(TriMesh& m, double tol);

/// Removes unused vertices and renumbers in first-use order (canonical STL order).
void compact_vertices(TriMesh& m);

/// Closed-surface signed volume (divergence theorem).
double signed_volume(std::span<const Vec3> vertices, std::span<const Tri> triangles);

} // namespace isoshell
