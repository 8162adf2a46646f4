#include "isoshell/error.hpp"
#include "isoshell/mesh_io.hpp"
#include "isoshell/mesher.hpp"
#include "isoshell/thicken.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace isoshell;

namespace {

// n x n grid on the unit square at height z, boundary tagged on the box side planes.
TriMesh flat_square(int n, double z = 0.5) {
    TriMesh m;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) m.vertices.emplace_back(double(i) / n, double(j) / n, z);
    auto id = [&](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    m.box_min = Vec3::Zero();
    m.box_max = Vec3::Ones();
    m.planes = box_planes(m.box_min, m.box_max);
    retag_planes(m);
    return m;
}

TriMesh iwp(Domain d, int resolution, double size = 2.0) {
    CellSpec spec;
    spec.size = size;
    spec.domain = d;
    MeshingOptions opt;
    opt.resolution = resolution;
    return build_cell_mesh(make_preset("iwp", size), spec, opt);
}

double shell_volume(const TriMesh& m, std::span<const double> t) {
    const auto a = triangle_areas(m);
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) v += t[i] * a[i];
    return v;
}

} // namespace

TEST(NodalThickness, UniformAndMean) {
    const TriMesh m = flat_square(2);
    const std::vector<double> t(m.num_triangles(), 0.3);
    for (double v : nodal_thickness(m, t)) EXPECT_DOUBLE_EQ(v, 0.3);

    TriMesh fan;
    fan.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0)};
    fan.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
    const auto nt = nodal_thickness(fan, std::vector<double>{0.1, 0.2, 0.3});
    EXPECT_NEAR(nt[0], 0.2, 1e-15);
}

TEST(NodalThickness, StaysInsideElementRange) {
    const TriMesh m = flat_square(6);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.100, 0.250);
    std::vector<double> t(m.num_triangles());
    for (double& v : t) v = u(rng);
    for (double v : nodal_thickness(m, t)) {
        EXPECT_GE(v, 0.100);
        EXPECT_LE(v, 0.250);
    }
}

TEST(NodalThickness, IsolatedVertexThrows) {
    TriMesh m = flat_square(1);
    m.vertices.emplace_back(5, 5, 5);
    try {
        nodal_thickness(m, std::vector<double>(m.num_triangles(), 0.1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IsolatedVertex);
    }
}

TEST(OffsetShell, FlatSquareGivesSlab) {
    const TriMesh m = flat_square(4);
    const std::vector<double> t(m.num_vertices(), 0.05);
    const SolidMesh s = offset_shell(m, t);
    EXPECT_NEAR(s.volume(), 0.05, 1e-12);
    EXPECT_EQ(non_manifold_edge_count(s.triangles), 0u);
    const auto count = [&](Face f) { return std::count(s.provenance.begin(), s.provenance.end(), f); };
    EXPECT_EQ(count(Face::Top), 32);
    EXPECT_EQ(count(Face::Bottom), 32);
    EXPECT_EQ(count(Face::Lateral), 2 * 16);
}

TEST(OffsetShell, LinearThicknessGivesWedge) {
    const TriMesh m = flat_square(5);
    std::vector<double> t(m.num_vertices());
    for (std::size_t v = 0; v < t.size(); ++v) t[v] = 0.02 + 0.06 * m.vertices[v].x();
    // integral of (0.02 + 0.06 x) over the unit square
    EXPECT_NEAR(offset_shell(m, t).volume(), 0.05, 1e-12);
}

TEST(OffsetShell, CurvedPatchMatchesShellVolume) {
    const TriMesh m = iwp(Domain::Eighth, 24);
    const std::vector<double> t(m.num_triangles(), 2.0 / 50);
    const SolidMesh s = offset_shell(m, nodal_thickness(m, t));
    const double ref = shell_volume(m, t);
    EXPECT_NEAR(s.volume(), ref, 0.02 * ref);
    EXPECT_EQ(non_manifold_edge_count(s.triangles), 0u);
}

TEST(OffsetShell, ThickestAllowedShellStaysWatertight) {
    const TriMesh m = iwp(Domain::Unit, 16);
    const std::vector<double> t(m.num_triangles(), 2.0 / 20);
    const SolidMesh s = offset_shell(m, nodal_thickness(m, t));
    EXPECT_EQ(non_manifold_edge_count(s.triangles), 0u);
    EXPECT_GT(s.volume(), 0.0);
    const double ref = shell_volume(m, t);
    EXPECT_NEAR(s.volume(), ref, 0.03 * ref);
    // outer faces sit on the box
    Vec3 lo = s.vertices[0], hi = lo;
    for (const auto& v : s.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    EXPECT_NEAR(lo.minCoeff(), -1.0, 1e-9);
    EXPECT_NEAR(hi.maxCoeff(), 1.0, 1e-9);
}

TEST(OffsetShell, OutwardOrientationAgreesWithRayParity) {
    const TriMesh m = flat_square(3);
    const SolidMesh s = offset_shell(m, std::vector<double>(m.num_vertices(), 0.2));
    EXPECT_GT(s.volume(), 0.0);
    // every top face normal points +z, every bottom face -z
    for (std::size_t i = 0; i < s.triangles.size(); ++i) {
        const Tri& t = s.triangles[i];
        const Vec3 n = (s.vertices[t[1]] - s.vertices[t[0]]).cross(s.vertices[t[2]] - s.vertices[t[0]]);
        const Vec3 c = (s.vertices[t[0]] + s.vertices[t[1]] + s.vertices[t[2]]) / 3.0;
        const Vec3 inward = Vec3(0.5, 0.5, 0.5) - c;
        EXPECT_LT(n.dot(inward), 0.0) << i;
    }
}

TEST(OffsetShell, OpenBoundaryOffPlanesIsRejected) {
    TriMesh m = flat_square(2);
    for (auto& tag : m.plane_tags) tag = 0;
    try {
        offset_shell(m, std::vector<double>(m.num_vertices(), 0.1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OpenBoundary);
    }
}

TEST(OffsetShell, FoldedOffsetIsDetected) {
    // a thickness larger than the curvature radius folds the inner offset
    const TriMesh m = iwp(Domain::Eighth, 12);
    const std::vector<double> t(m.num_vertices(), 1.2);
    try {
        offset_shell(m, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SelfIntersection);
        EXPECT_NE(std::string(e.what()).find("("), std::string::npos);
    }
}

TEST(SelfIntersections, CrossingTrianglesFound) {
    const std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                                 Vec3(0.2, 0.2, -1), Vec3(0.2, 0.2, 1), Vec3(0.9, 0.9, 0.5)};
    const std::vector<Tri> crossing = {{0, 1, 2}, {3, 4, 5}};
    EXPECT_EQ(self_intersections(v, crossing).size(), 1u);
    const std::vector<Vec3> apart = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                                     Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)};
    EXPECT_TRUE(self_intersections(apart, crossing).empty());
}

TEST(ExportSolid, RoundTripPreservesVolume) {
    const auto dir = std::filesystem::temp_directory_path() / "isoshell_thicken";
    std::filesystem::create_directories(dir);
    const TriMesh m = flat_square(3);
    const SolidMesh s = offset_shell(m, std::vector<double>(m.num_vertices(), 0.1));
    export_solid(s, dir / "slab.stl");
    const TriMesh back = load_stl(dir / "slab.stl");
    EXPECT_NEAR(signed_volume(back.vertices, back.triangles), s.volume(), 1e-6 * s.volume());

    SolidMesh open = s;
    open.triangles.pop_back();
    try {
        export_solid(open, dir / "open.stl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotWatertight);
    }
    std::filesystem::remove_all(dir);
}

TEST(ExportSolid, TiledCellsSpanSpecimenBox) {
    const auto dir = std::filesystem::temp_directory_path() / "isoshell_tiled";
    std::filesystem::create_directories(dir);
    const TriMesh unit = iwp(Domain::Unit, 8, 5.0);
    const TriMesh block = tile(unit, 5, 5, 5);
    const std::vector<double> t(block.num_triangles(), 5.0 / 50);
    const SolidMesh s = offset_shell(block, nodal_thickness(block, t));
    export_solid(s, dir / "block.stl");
    const TriMesh back = load_stl(dir / "block.stl");
    Vec3 lo = back.vertices[0], hi = lo;
    for (const auto& v : back.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    EXPECT_NEAR((hi - lo).x(), 25.0, 1e-4);
    EXPECT_NEAR((hi - lo).y(), 25.0, 1e-4);
    EXPECT_NEAR((hi - lo).z(), 25.0, 1e-4);
    std::filesystem::remove_all(dir);
}

TEST(Metrics, VolumeAndDensity) {
    const TriMesh m = flat_square(2);
    const std::vector<double> t(m.num_triangles(), 0.1);
    const SolidMesh s = offset_shell(m, nodal_thickness(m, t));
    const auto mt = solid_metrics(s, m, t);
    EXPECT_NEAR(mt.volume, 0.1, 1e-12);
    EXPECT_NEAR(mt.shell_volume, 0.1, 1e-12);
    EXPECT_NEAR(mt.relative_density, 0.1, 1e-12);
    EXPECT_EQ(mt.min_thickness, 0.1);
}

TEST(SurfaceNormals, MatchPlaneAndFaceOrientation) {
    const TriMesh m = flat_square(4, 0.3);
    const auto n = surface_normals(m, make_plane(0.3, 1.0));
    const auto ref = vertex_normals(m);
    for (std::size_t v = 0; v < n.size(); ++v) {
        EXPECT_NEAR(n[v].norm(), 1.0, 1e-12);
        EXPECT_NEAR(n[v].dot(ref[v]), 1.0, 1e-9);
    }
}

TEST(SurfaceNormals, ThickFrdOffsetIsClean) {
    CellSpec spec;
    spec.size = 2.0;
    spec.domain = Domain::Eighth;
    MeshingOptions opt;
    opt.resolution = 48;
    const ImplicitSurface s = make_preset("frd", 2.0);
    const TriMesh unit = mirror_expand(build_cell_mesh(s, spec, opt), Domain::Unit);
    const std::vector<double> t(unit.num_vertices(), 2.0 / 20);
    const SolidMesh solid = offset_shell(unit, t, surface_normals(unit, s));
    EXPECT_EQ(non_manifold_edge_count(solid.triangles), 0u);
}
