#include "isoshell/tri_mesh.hpp"

#include "isoshell/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace isoshell {

std::string to_string(Domain d) {
    switch (d) {
        case Domain::Fundamental: return "fundamental";
        case Domain::Eighth: return "eighth";
        case Domain::Unit: return "unit";
        case Domain::Tiled: return "tiled";
    }
    return "eighth";
}

Domain domain_from_string(const std::string& s) {
    if (s == "fundamental") return Domain::Fundamental;
    if (s == "eighth") return Domain::Eighth;
    if (s == "unit") return Domain::Unit;
    if (s == "tiled") return Domain::Tiled;
    throw Error(ErrorKind::InvalidArgument, "unknown analysis domain '" + s + "'");
}

void CellSpec::validate() const {
    if (!(size > 0.0)) throw Error(ErrorKind::InvalidArgument, "cell size must be positive");
    for (int n : tiles)
        if (n < 1) throw Error(ErrorKind::InvalidArgument, "tile counts must be >= 1");
}

int TriMesh::plane_index(const std::string& name) const {
    for (std::size_t i = 0; i < planes.size(); ++i)
        if (planes[i].name == name) return static_cast<int>(i);
    return -1;
}

double triangle_area(const TriMesh& m, int t) {
    const auto& tri = m.triangles[t];
    const Vec3& a = m.vertices[tri[0]];
    return 0.5 * (m.vertices[tri[1]] - a).cross(m.vertices[tri[2]] - a).norm();
}

Vec3 triangle_normal(const TriMesh& m, int t) {
    const auto& tri = m.triangles[t];
    const Vec3& a = m.vertices[tri[0]];
    return (m.vertices[tri[1]] - a).cross(m.vertices[tri[2]] - a).normalized();
}

std::vector<double> triangle_areas(const TriMesh& m) {
    std::vector<double> out(m.num_triangles());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = triangle_area(m, static_cast<int>(t));
    return out;
}

double total_area(const TriMesh& m) {
    double a = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) a += triangle_area(m, static_cast<int>(t));
    return a;
}

std::vector<EdgeInfo> build_edges(const TriMesh& m) {
    std::vector<std::array<int, 3>> half; // (lo, hi, face)
    half.reserve(3 * m.num_triangles());
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            half.push_back({std::min(a, b), std::max(a, b), static_cast<int>(t)});
        }
    }
    std::sort(half.begin(), half.end());
    std::vector<EdgeInfo> edges;
    for (std::size_t i = 0; i < half.size();) {
        EdgeInfo e{half[i][0], half[i][1], {}};
        std::size_t j = i;
        while (j < half.size() && half[j][0] == e.a && half[j][1] == e.b) e.faces.push_back(half[j++][2]);
        edges.push_back(std::move(e));
        i = j;
    }
    return edges;
}

std::vector<char> boundary_vertices(const TriMesh& m) {
    std::vector<char> on(m.num_vertices(), 0);
    for (const auto& e : build_edges(m))
        if (e.faces.size() == 1) on[e.a] = on[e.b] = 1;
    return on;
}

void retag_planes(TriMesh& m, double tol) {
    m.plane_tags.assign(m.num_vertices(), 0u);
    for (std::size_t v = 0; v < m.num_vertices(); ++v)
        for (std::size_t p = 0; p < m.planes.size(); ++p)
            if (std::abs(m.planes[p].distance(m.vertices[v])) < tol) m.plane_tags[v] |= 1u << p;
}

std::vector<Plane> box_planes(const Vec3& lo, const Vec3& hi) {
    static const char* names[3][2] = {{"xmin", "xmax"}, {"ymin", "ymax"}, {"zmin", "zmax"}};
    std::vector<Plane> planes;
    for (int a = 0; a < 3; ++a) {
        planes.push_back({names[a][0], Vec3::Unit(a), lo[a]});
        planes.push_back({names[a][1], Vec3::Unit(a), hi[a]});
    }
    return planes;
}

MeshCheck check_mesh(const TriMesh& m) {
    MeshCheck c;
    std::ostringstream msg;
    c.min_area = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
        c.min_area = std::min(c.min_area, triangle_area(m, static_cast<int>(t)));
    for (const auto& e : build_edges(m)) {
        if (e.faces.size() > 2) {
            c.edge_manifold = false;
            msg << "edge (" << e.a << "," << e.b << ") has " << e.faces.size() << " faces; ";
        } else if (e.faces.size() == 1) {
            ++c.boundary_edges;
            std::uint32_t common = m.plane_tags.empty() ? 0u : (m.plane_tags[e.a] & m.plane_tags[e.b]);
            if (common == 0u) {
                c.boundary_on_planes = false;
                msg << "boundary edge (" << e.a << "," << e.b << ") on no tagged plane; ";
            }
        } else {
            // consistent orientation: the shared edge is traversed in opposite directions
            auto dir = [&](int f) {
                const auto& t = m.triangles[f];
                for (int k = 0; k < 3; ++k)
                    if (t[k] == e.a && t[(k + 1) % 3] == e.b) return 1;
                return -1;
            };
            if (dir(e.faces[0]) == dir(e.faces[1])) c.consistent_orientation = false;
        }
    }
    c.message = msg.str();
    return c;
}

namespace {

struct CellKey {
    long long x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
    }
};

} // namespace

void weld_vertices(TriMesh& m, double tol) {
    const double cell = std::max(tol, 1e-300) * 4.0;
    std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
    std::vector<int> remap(m.num_vertices(), -1);
    std::vector<int> reps;
    auto key_of = [&](const Vec3& p) {
        return CellKey{static_cast<long long>(std::floor(p.x() / cell)),
                       static_cast<long long>(std::floor(p.y() / cell)),
                       static_cast<long long>(std::floor(p.z() / cell))};
    };
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
        const Vec3& p = m.vertices[v];
        const CellKey k = key_of(p);
        int found = -1;
        for (long long dx = -1; dx <= 1 && found < 0; ++dx)
            for (long long dy = -1; dy <= 1 && found < 0; ++dy)
                for (long long dz = -1; dz <= 1 && found < 0; ++dz) {
                    auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == grid.end()) continue;
                    for (int r : it->second)
                        if ((m.vertices[r] - p).norm() <= tol) {
                            found = r;
                            break;
                        }
                }
        if (found < 0) {
            grid[k].push_back(static_cast<int>(v));
            remap[v] = static_cast<int>(v);
        } else {
            remap[v] = found;
            if (!m.plane_tags.empty()) m.plane_tags[found] |= m.plane_tags[v];
        }
    }
    std::vector<Tri> tris;
    std::vector<DomainTag> dmap;
    std::vector<int> src;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        Tri tri = m.triangles[t];
        for (int& i : tri) i = remap[i];
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
        tris.push_back(tri);
        if (!m.domain_map.empty()) dmap.push_back(m.domain_map[t]);
        if (!m.source_element.empty()) src.push_back(m.source_element[t]);
    }
    m.triangles = std::move(tris);
    m.domain_map = std::move(dmap);
    m.source_element = std::move(src);
    compact_vertices(m);
}

void compact_vertices(TriMesh& m) {
    std::vector<int> order(m.num_vertices(), -1);
    std::vector<Vec3> verts;
    std::vector<std::uint32_t> tags;
    verts.reserve(m.num_vertices());
    for (auto& tri : m.triangles)
        for (int& i : tri) {
            if (order[i] < 0) {
                order[i] = static_cast<int>(verts.size());
                verts.push_back(m.vertices[i]);
                if (!m.plane_tags.empty()) tags.push_back(m.plane_tags[i]);
            }
            i = order[i];
        }
    m.vertices = std::move(verts);
    m.plane_tags = std::move(tags);
}

double signed_volume(std::span<const Vec3> vertices, std::span<const Tri> triangles) {
    double v = 0.0;
    for (const auto& t : triangles)
        v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
    return v / 6.0;
}

} // namespace isoshell
