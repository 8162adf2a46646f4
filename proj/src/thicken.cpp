#include "isoshell/thicken.hpp"

#include "isoshell/error.hpp"
#include "isoshell/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace isoshell {

std::vector<double> nodal_thickness(const TriMesh& mesh, std::span<const double> thickness) {
    if (thickness.size() != mesh.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "thickness field size does not match triangle count");
    std::vector<double> sum(mesh.num_vertices(), 0.0);
    std::vector<int> count(mesh.num_vertices(), 0);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        for (int v : mesh.triangles[t]) {
            sum[v] += thickness[t];
            ++count[v];
        }
    for (std::size_t v = 0; v < sum.size(); ++v) {
        if (count[v] == 0) throw Error(ErrorKind::IsolatedVertex, "vertex " + std::to_string(v) + " has no elements");
        sum[v] /= count[v];
    }
    return sum;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
    std::vector<Vec3> n(mesh.num_vertices(), Vec3::Zero());
    for (const Tri& t : mesh.triangles) {
        // cross product length is twice the area: area weighting for free
        const Vec3 w = (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (int v : t) n[v] += w;
    }
    for (auto& v : n) {
        const double len = v.norm();
        if (len > 0.0) v /= len;
    }
    return n;
}

std::size_t non_manifold_edge_count(std::span<const Tri> triangles) {
    std::map<std::pair<int, int>, int> degree;
    for (const Tri& t : triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            ++degree[{std::min(a, b), std::max(a, b)}];
        }
    return static_cast<std::size_t>(std::count_if(degree.begin(), degree.end(), [](const auto& e) { return e.second != 2; }));
}

namespace {

// Segment pq against triangle abc, interiors only.
bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c, double eps) {
    const Vec3 n = (b - a).cross(c - a);
    const double nn = n.norm();
    if (nn == 0.0) return false;
    const double dp = n.dot(p - a) / nn, dq = n.dot(q - a) / nn;
    if ((dp > -eps && dq > -eps) || (dp < eps && dq < eps)) return false;
    const Vec3 x = p + (dp / (dp - dq)) * (q - p);
    // barycentric sign tests
    const double s0 = n.dot((b - a).cross(x - a)), s1 = n.dot((c - b).cross(x - b)), s2 = n.dot((a - c).cross(x - c));
    const double tol = eps * nn;
    return s0 > tol && s1 > tol && s2 > tol;
}

bool triangles_intersect(const std::array<Vec3, 3>& u, const std::array<Vec3, 3>& v, double eps) {
    for (int k = 0; k < 3; ++k) {
        if (segment_hits_triangle(u[k], u[(k + 1) % 3], v[0], v[1], v[2], eps)) return true;
        if (segment_hits_triangle(v[k], v[(k + 1) % 3], u[0], u[1], u[2], eps)) return true;
    }
    return false;
}

} // namespace

std::vector<std::pair<int, int>> self_intersections(std::span<const Vec3> vertices, std::span<const Tri> triangles,
                                                    std::size_t max_pairs) {
    std::vector<std::pair<int, int>> hits;
    if (triangles.empty()) return hits;
    double edge = 0.0;
    Vec3 lo = vertices[triangles[0][0]], hi = lo;
    for (const Tri& t : triangles)
        for (int k = 0; k < 3; ++k) {
            edge += (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm();
            lo = lo.cwiseMin(vertices[t[k]]);
            hi = hi.cwiseMax(vertices[t[k]]);
        }
    edge /= 3.0 * static_cast<double>(triangles.size());
    // at most 2^20 cells per axis so a cell packs into 60 bits
    const double cell = std::max({edge, (hi - lo).maxCoeff() / (1 << 20), 1e-12});
    const double eps = 1e-10 * (hi - lo).norm();

    using Cell = Eigen::Vector3i;
    auto cell_of = [&](const Vec3& p) { return Cell(((p - lo) / cell).array().floor().cast<int>()); };
    auto pack = [](const Cell& c) {
        return (static_cast<std::uint64_t>(c.x()) << 40) | (static_cast<std::uint64_t>(c.y()) << 20) |
               static_cast<std::uint64_t>(c.z());
    };
    std::vector<std::pair<Cell, Cell>> boxes(triangles.size());
    std::vector<std::pair<Vec3, Vec3>> extent(triangles.size());
    std::vector<std::pair<std::uint64_t, int>> entries;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        Vec3 a = vertices[triangles[t][0]], b = a;
        for (int v : triangles[t]) {
            a = a.cwiseMin(vertices[v]);
            b = b.cwiseMax(vertices[v]);
        }
        boxes[t] = {cell_of(a), cell_of(b)};
        extent[t] = {a, b};
        for (int x = boxes[t].first.x(); x <= boxes[t].second.x(); ++x)
            for (int y = boxes[t].first.y(); y <= boxes[t].second.y(); ++y)
                for (int z = boxes[t].first.z(); z <= boxes[t].second.z(); ++z)
                    entries.emplace_back(pack(Cell(x, y, z)), static_cast<int>(t));
    }
    std::sort(entries.begin(), entries.end());
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < entries.size(); ++k)
        if (k == 0 || entries[k].first != entries[k - 1].first) starts.push_back(k);
    starts.push_back(entries.size());

    const std::size_t ncells = starts.size() - 1;
    std::vector<std::vector<std::pair<int, int>>> found(ncells);
    parallel_for(ncells, [&](std::size_t c) {
        const std::uint64_t key = entries[starts[c]].first;
        for (std::size_t p = starts[c]; p < starts[c + 1]; ++p)
            for (std::size_t q = p + 1; q < starts[c + 1]; ++q) {
                const int i = std::min(entries[p].second, entries[q].second);
                const int j = std::max(entries[p].second, entries[q].second);
                // test each pair once, in the first cell both boxes share
                if (pack(boxes[i].first.cwiseMax(boxes[j].first)) != key) continue;
                if ((extent[i].first.array() > extent[j].second.array() + eps).any() ||
                    (extent[j].first.array() > extent[i].second.array() + eps).any())
                    continue;
                const Tri &ti = triangles[i], &tj = triangles[j];
                bool shared = false;
                for (int a : ti)
                    for (int b : tj) shared |= a == b;
                if (shared) continue;
                const std::array<Vec3, 3> u = {vertices[ti[0]], vertices[ti[1]], vertices[ti[2]]};
                const std::array<Vec3, 3> v = {vertices[tj[0]], vertices[tj[1]], vertices[tj[2]]};
                if (triangles_intersect(u, v, eps)) found[c].emplace_back(i, j);
            }
    });
    for (auto& f : found)
        for (const auto& pr : f) hits.push_back(pr);
    std::sort(hits.begin(), hits.end());
    if (hits.size() > max_pairs) hits.resize(max_pairs);
    return hits;
}

std::vector<Vec3> surface_normals(const TriMesh& mesh, const ImplicitSurface& surface) {
    auto normals = vertex_normals(mesh);
    const double h = 1e-6 * surface.period;
    for (std::size_t v = 0; v < normals.size(); ++v) {
        const Vec3& p = mesh.vertices[v];
        Vec3 g;
        for (int k = 0; k < 3; ++k) {
            Vec3 a = p, b = p;
            a[k] += h;
            b[k] -= h;
            g[k] = (surface(a) - surface(b)) / (2.0 * h);
        }
        const double len = g.norm();
        if (!(len > 0.0)) continue;
        g /= len;
        normals[v] = g.dot(normals[v]) < 0.0 ? Vec3(-g) : g;
    }
    return normals;
}

SolidMesh offset_shell(const TriMesh& mesh, std::span<const double> nodal_t) {
    const auto normals = vertex_normals(mesh);
    return offset_shell(mesh, nodal_t, normals);
}

SolidMesh offset_shell(const TriMesh& mesh, std::span<const double> nodal_t, std::span<const Vec3> normals) {
    const std::size_t nv = mesh.num_vertices();
    if (normals.size() != nv) throw Error(ErrorKind::InvalidArgument, "normal count does not match vertex count");
    if (nodal_t.size() != nv) throw Error(ErrorKind::InvalidArgument, "nodal thickness size does not match vertex count");
    for (double t : nodal_t)
        if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "nodal thickness must be positive");
    const bool tagged = mesh.plane_tags.size() == nv;

    // boundary edges, directed as they appear in their single face
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> uses;
    for (const Tri& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            uses[{std::min(a, b), std::max(a, b)}].push_back({a, b});
        }
    std::vector<std::pair<int, int>> boundary;
    for (const auto& [key, dirs] : uses) {
        if (dirs.size() > 2) throw Error(ErrorKind::NonManifold, "mid-surface has an edge with more than two faces");
        if (dirs.size() != 1) continue;
        const auto [a, b] = dirs.front();
        if (!tagged || (mesh.plane_tags[a] & mesh.plane_tags[b]) == 0u) {
            std::ostringstream msg;
            msg << "boundary edge (" << a << ", " << b << ") lies on no tagged plane";
            throw Error(ErrorKind::OpenBoundary, msg.str());
        }
        boundary.push_back({a, b});
    }

    SolidMesh solid;
    solid.vertices.resize(2 * nv);
    for (std::size_t v = 0; v < nv; ++v) {
        Vec3 top = mesh.vertices[v] + 0.5 * nodal_t[v] * normals[v];
        Vec3 bottom = mesh.vertices[v] - 0.5 * nodal_t[v] * normals[v];
        if (tagged)
            for (std::size_t p = 0; p < mesh.planes.size(); ++p)
                if (mesh.on_plane(static_cast<int>(v), static_cast<int>(p))) {
                    const Plane& pl = mesh.planes[p];
                    top -= pl.distance(top) * pl.normal;
                    bottom -= pl.distance(bottom) * pl.normal;
                }
        solid.vertices[v] = top;
        solid.vertices[nv + v] = bottom;
    }
    const int off = static_cast<int>(nv);
    for (const Tri& t : mesh.triangles) {
        solid.triangles.push_back(t);
        solid.provenance.push_back(Face::Top);
    }
    for (const Tri& t : mesh.triangles) {
        solid.triangles.push_back({t[0] + off, t[2] + off, t[1] + off});
        solid.provenance.push_back(Face::Bottom);
    }
    for (const auto& [a, b] : boundary) {
        solid.triangles.push_back({b, a, a + off});
        solid.triangles.push_back({b, a + off, b + off});
        solid.provenance.push_back(Face::Lateral);
        solid.provenance.push_back(Face::Lateral);
    }

    const auto hits = self_intersections(solid.vertices, solid.triangles);
    if (!hits.empty()) {
        std::ostringstream msg;
        msg << "offset solid intersects itself; triangle pairs:";
        for (const auto& [i, j] : hits) msg << " (" << i << ", " << j << ")";
        throw Error(ErrorKind::SelfIntersection, msg.str());
    }
    return solid;
}

void export_solid(const SolidMesh& solid, const std::filesystem::path& path, StlFormat format) {
    const std::size_t bad = non_manifold_edge_count(solid.triangles);
    if (bad != 0)
        throw Error(ErrorKind::NotWatertight, std::to_string(bad) + " edges are not shared by exactly two triangles");
    save_stl(solid.vertices, solid.triangles, path, format, "isoshell solid");
}

SolidMetrics solid_metrics(const SolidMesh& solid, const TriMesh& mid, std::span<const double> thickness) {
    SolidMetrics m;
    m.volume = solid.volume();
    const auto areas = triangle_areas(mid);
    for (std::size_t i = 0; i < areas.size(); ++i) m.shell_volume += thickness[i] * areas[i];
    if (mid.box_volume() > 0.0) m.relative_density = m.volume / mid.box_volume();
    if (!thickness.empty()) {
        const auto [lo, hi] = std::minmax_element(thickness.begin(), thickness.end());
        m.min_thickness = *lo;
        m.max_thickness = *hi;
    }
    m.triangles = solid.triangles.size();
    return m;
}

void save_metrics(const SolidMetrics& m, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["volume_mm3"] = m.volume;
    j["shell_volume_mm3"] = m.shell_volume;
    j["relative_density"] = m.relative_density;
    j["min_thickness_mm"] = m.min_thickness;
    j["max_thickness_mm"] = m.max_thickness;
    j["triangles"] = m.triangles;
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace isoshell
