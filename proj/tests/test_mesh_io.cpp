#include "isoshell/error.hpp"
#include "isoshell/mesh_io.hpp"
#include "isoshell/mesher.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace isoshell;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path p = fs::temp_directory_path() / ("isoshell_io_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

TriMesh two_triangles() {
    TriMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1.1, 0, 0), Vec3(1.1, 0.7, 0.3), Vec3(0, 0.7, 0.3)};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

// Closed cube [0, d]^3 with outward winding.
TriMesh cube(double d) {
    TriMesh m;
    for (int i = 0; i < 8; ++i) m.vertices.emplace_back(d * (i & 1), d * (i >> 1 & 1), d * (i >> 2 & 1));
    m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                   {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    return m;
}

void expect_same_mesh(const TriMesh& a, const TriMesh& b) {
    ASSERT_EQ(a.num_triangles(), b.num_triangles());
    ASSERT_EQ(a.num_vertices(), b.num_vertices());
    for (std::size_t t = 0; t < a.num_triangles(); ++t) EXPECT_EQ(a.triangles[t], b.triangles[t]);
    for (std::size_t v = 0; v < a.num_vertices(); ++v)
        for (int k = 0; k < 3; ++k)
            EXPECT_EQ(b.vertices[v][k], static_cast<double>(static_cast<float>(a.vertices[v][k])));
}

} // namespace

TEST(StlIo, BinaryAndAsciiRoundTrip) {
    const fs::path dir = temp_dir();
    const TriMesh m = two_triangles();
    for (auto fmt : {StlFormat::Binary, StlFormat::Ascii}) {
        const fs::path p = dir / (fmt == StlFormat::Binary ? "two_bin.stl" : "two_ascii.stl");
        save_stl(m, p, fmt);
        expect_same_mesh(m, load_stl(p));
    }
    EXPECT_EQ(fs::file_size(dir / "two_bin.stl"), 84u + 2 * 50u);
}

TEST(StlIo, TruncatedBinaryReportsOffset) {
    const fs::path dir = temp_dir();
    const fs::path p = dir / "trunc.stl";
    save_stl(two_triangles(), p);
    fs::resize_file(p, 84 + 50 + 20);
    try {
        load_stl(p);
        FAIL() << "expected MalformedFile";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MalformedFile);
        EXPECT_NE(std::string(e.what()).find("byte 134"), std::string::npos) << e.what();
    }
    fs::resize_file(p, 40);
    EXPECT_THROW(load_stl(p), Error);
}

TEST(StlIo, BadAsciiTokenReportsOffset) {
    const fs::path p = temp_dir() / "bad.stl";
    std::ofstream(p) << "solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0 zero\n";
    try {
        load_stl(p);
        FAIL() << "expected MalformedFile";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MalformedFile);
        EXPECT_NE(std::string(e.what()).find("byte 49"), std::string::npos) << e.what();
    }
}

TEST(StlIo, CubeAreaAndVolume) {
    const double d = 2.0;
    const fs::path p = temp_dir() / "cube.stl";
    save_stl(cube(d), p);
    const TriMesh c = load_stl(p);
    EXPECT_EQ(c.num_triangles(), 12u);
    EXPECT_EQ(c.num_vertices(), 8u);
    EXPECT_NEAR(total_area(c), 6 * d * d, 1e-6);
    EXPECT_NEAR(signed_volume(c.vertices, c.triangles), d * d * d, 1e-6);
}

TEST(StlIo, SidecarRestoresMetadata) {
    CellSpec spec;
    spec.size = 2.0;
    spec.domain = Domain::Eighth;
    MeshingOptions o;
    o.resolution = 12;
    const TriMesh e = build_cell_mesh(make_preset("iwp", 2.0), spec, o);
    const fs::path p = temp_dir() / "iwp_eighth.stl";
    save_mesh(e, p);
    ASSERT_TRUE(fs::exists(sidecar_path(p)));
    const TriMesh r = load_mesh(p);
    expect_same_mesh(e, r);
    EXPECT_EQ(r.plane_tags, e.plane_tags);
    EXPECT_EQ(r.source_element, e.source_element);
    ASSERT_EQ(r.domain_map.size(), e.domain_map.size());
    for (std::size_t t = 0; t < r.domain_map.size(); ++t) {
        EXPECT_EQ(r.domain_map[t].source, e.domain_map[t].source);
        EXPECT_EQ(r.domain_map[t].copy, e.domain_map[t].copy);
    }
    EXPECT_EQ(r.cell.domain, Domain::Eighth);
    EXPECT_EQ(r.planes.size(), 6u);
    EXPECT_EQ(r.box_max, e.box_max);
}

TEST(StlIo, SidecarCountMismatchIsMalformed) {
    const fs::path dir = temp_dir();
    CellSpec spec;
    spec.domain = Domain::Eighth;
    MeshingOptions o;
    o.resolution = 8;
    const TriMesh e = build_cell_mesh(make_preset("iwp", 2.0), spec, o);
    save_mesh(e, dir / "a.stl");
    save_stl(two_triangles(), dir / "b.stl");
    TriMesh b = load_stl(dir / "b.stl");
    EXPECT_THROW(apply_sidecar(b, sidecar_path(dir / "a.stl")), Error);
}
