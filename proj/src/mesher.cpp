#include "isoshell/mesher.hpp"

#include "isoshell/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <unordered_map>

namespace isoshell {

namespace {

constexpr std::array<std::array<int, 3>, 6> kPermutations = {
    {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}}};

std::vector<Plane> fundamental_planes(double half) {
    const double s = std::numbers::sqrt2 / 2.0;
    return {
        {"x0", Vec3(1, 0, 0), 0.0},
        {"xy", Vec3(s, -s, 0), 0.0},
        {"yz", Vec3(0, s, -s), 0.0},
        {"zL", Vec3(0, 0, 1), half},
    };
}

// Marching tetrahedra over the Kuhn subdivision of a regular grid. The fundamental
// tetrahedron is an exact union of Kuhn tetrahedra, so no clipping is needed and
// intersection points on the bounding planes are exact.
class KuhnMarcher {
public:
    static constexpr double kZeroGuard = 1e-13; // relative to max |f| on the grid
    static constexpr double kRootTolerance = 1e-12;

    KuhnMarcher(const ImplicitSurface& f, double half, int n) : f_(f), n_(n), half_(half) {
        const int m = n + 1;
        values_.assign(static_cast<std::size_t>(m) * m * m, 0.0);
        for (int k = 0; k <= n; ++k)
            for (int j = 0; j <= k; ++j)
                for (int i = 0; i <= j; ++i) values_[id(i, j, k)] = f(position(i, j, k));
        // nodes exactly on the surface would spawn coincident vertices
        double scale = 0.0;
        for (double v : values_) scale = std::max(scale, std::abs(v));
        const double guard = kZeroGuard * scale;
        for (double& v : values_)
            if (std::abs(v) < guard) v = guard;
        root_tolerance_ = kRootTolerance * scale;
    }

    TriMesh run() {
        for (int k = 0; k < n_; ++k)
            for (int j = 0; j <= k; ++j)
                for (int i = 0; i <= j; ++i) march_cube(i, j, k);
        mesh_.planes = fundamental_planes(half_);
        return std::move(mesh_);
    }

private:
    using Node = std::array<int, 3>;

    int id(int i, int j, int k) const { return i + (n_ + 1) * (j + (n_ + 1) * k); }
    int id(const Node& g) const { return id(g[0], g[1], g[2]); }

    double coord(int i) const {
        if (i == 0) return 0.0;
        if (i == n_) return half_;
        return half_ * static_cast<double>(i) / n_;
    }
    Vec3 position(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
    Vec3 position(const Node& g) const { return position(g[0], g[1], g[2]); }

    void march_cube(int i, int j, int k) {
        for (const auto& p : kPermutations) {
            // Kuhn tetrahedron: corner, then unit steps along p[0], p[1], p[2].
            std::array<Node, 4> t;
            t[0] = {i, j, k};
            for (int s = 0; s < 3; ++s) {
                t[s + 1] = t[s];
                ++t[s + 1][p[s]];
            }
            // 4 * centroid, exact in integers; inside iff strictly x < y < z.
            std::array<int, 3> c4{};
            for (const auto& g : t)
                for (int a = 0; a < 3; ++a) c4[a] += g[a];
            if (!(c4[0] < c4[1] && c4[1] < c4[2])) continue;
            march_tet(t);
        }
    }

    int edge_vertex(const Node& a, const Node& b) {
        const int ia = id(a), ib = id(b);
        const auto key = (static_cast<std::uint64_t>(std::min(ia, ib)) << 32) |
                         static_cast<std::uint32_t>(std::max(ia, ib));
        if (auto it = edge_vertices_.find(key); it != edge_vertices_.end()) return it->second;
        // canonical direction so the crossing does not depend on visiting order
        const bool swap = ia > ib;
        const Vec3 pa = position(swap ? b : a), pb = position(swap ? a : b);
        const Vec3 p = crossing(pa, pb, values_[swap ? ib : ia], values_[swap ? ia : ib]);
        std::uint32_t tags = 0;
        if (a[0] == 0 && b[0] == 0) tags |= 1u << 0;
        if (a[0] == a[1] && b[0] == b[1]) tags |= 1u << 1;
        if (a[1] == a[2] && b[1] == b[2]) tags |= 1u << 2;
        if (a[2] == n_ && b[2] == n_) tags |= 1u << 3;
        const int v = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back(p);
        mesh_.plane_tags.push_back(tags);
        edge_vertices_.emplace(key, v);
        return v;
    }

    // Zero of f on the segment by Illinois false position, starting from the linear
    // interpolant. Linear interpolation alone leaves vertices off the surface by
    // O(h^2), which shows up as normal noise between short neighbouring edges.
    Vec3 crossing(const Vec3& pa, const Vec3& pb, double fa, double fb) const {
        double lo = 0.0, hi = 1.0, flo = fa, fhi = fb;
        double s = flo / (flo - fhi);
        int side = 0;
        for (int it = 0; it < 60; ++it) {
            const double fs = f_(pa + s * (pb - pa));
            if (std::abs(fs) <= root_tolerance_) break;
            if ((fs > 0.0) == (flo > 0.0)) {
                lo = s;
                flo = fs;
                if (side == -1) fhi *= 0.5;
                side = -1;
            } else {
                hi = s;
                fhi = fs;
                if (side == 1) flo *= 0.5;
                side = 1;
            }
            s = (flo * hi - fhi * lo) / (flo - fhi);
        }
        return pa + s * (pb - pa);
    }

    static std::array<long long, 3> sub(const Node& a, const Node& b) {
        return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
    }
    static long long det3(const std::array<long long, 3>& u, const std::array<long long, 3>& v,
                          const std::array<long long, 3>& w) {
        return u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
               u[2] * (v[0] * w[1] - v[1] * w[0]);
    }

    // Orientation is decided on integer grid coordinates so that sliver and
    // zero-area triangles still get the winding of their neighbours: normals
    // point toward the positive side of the field.
    void march_tet(const std::array<Node, 4>& t) {
        std::array<int, 4> pos{}, neg{};
        int np = 0, nn = 0;
        for (int q = 0; q < 4; ++q) {
            if (values_[id(t[q])] >= 0.0)
                pos[np++] = q;
            else
                neg[nn++] = q;
        }
        if (np == 0 || nn == 0) return;
        if (np == 1 || nn == 1) {
            const bool lone_pos = (np == 1);
            const int s = lone_pos ? pos[0] : neg[0];
            const auto& o = lone_pos ? neg : pos;
            const long long d = det3(sub(t[o[0]], t[s]), sub(t[o[1]], t[s]), sub(t[o[2]], t[s]));
            // det < 0 <=> the triangle normal points toward the lone vertex
            const bool keep = lone_pos ? (d < 0) : (d > 0);
            const int v0 = edge_vertex(t[s], t[o[0]]);
            const int v1 = edge_vertex(t[s], t[o[1]]);
            const int v2 = edge_vertex(t[s], t[o[2]]);
            mesh_.triangles.push_back(keep ? Tri{v0, v1, v2} : Tri{v0, v2, v1});
        } else {
            const int a = pos[0], b = pos[1], c = neg[0], d = neg[1];
            // orientation of the midpoint parallelogram (ac, ad, bd, bc), times 4
            const auto dc = sub(t[d], t[c]);
            std::array<long long, 3> diag{}, up{};
            for (int k = 0; k < 3; ++k) {
                diag[k] = t[b][k] + t[d][k] - t[a][k] - t[c][k];
                up[k] = t[a][k] + t[b][k] - t[c][k] - t[d][k];
            }
            const bool keep = det3(dc, diag, up) > 0;
            const int ac = edge_vertex(t[a], t[c]), ad = edge_vertex(t[a], t[d]);
            const int bd = edge_vertex(t[b], t[d]), bc = edge_vertex(t[b], t[c]);
            if (keep) {
                mesh_.triangles.push_back({ac, ad, bd});
                mesh_.triangles.push_back({ac, bd, bc});
            } else {
                mesh_.triangles.push_back({ac, bd, ad});
                mesh_.triangles.push_back({ac, bc, bd});
            }
        }
    }

    const ImplicitSurface& f_;
    int n_;
    double half_;
    double root_tolerance_ = 0.0;
    std::vector<double> values_;
    std::unordered_map<std::uint64_t, int> edge_vertices_;
    TriMesh mesh_;
};

void require_valid(const TriMesh& m, ErrorKind kind, const char* what) {
    const MeshCheck c = check_mesh(m);
    if (!c.edge_manifold || !c.boundary_on_planes || !c.consistent_orientation)
        throw Error(kind, std::string(what) + ": " + c.message +
                              (c.consistent_orientation ? "" : "inconsistent orientation"));
}

} // namespace

Vec3 Isometry::apply(const Vec3& p) const {
    // signed permutation: gather exactly instead of a floating matrix product
    Vec3 out;
    for (int r = 0; r < 3; ++r) {
        double v = 0.0;
        for (int c = 0; c < 3; ++c)
            if (linear(r, c) != 0.0) v = linear(r, c) > 0 ? p[c] : -p[c];
        out[r] = v + shift[r];
    }
    return out;
}

int collapse_short_edges(TriMesh& m, double min_length, double sliver_angle_deg) {
    int total = 0;
    const bool have_tags = !m.plane_tags.empty();
    auto tag = [&](int v) { return have_tags ? m.plane_tags[v] : 0u; };
    for (int pass = 0; pass < 64; ++pass) {
        const std::size_t nv = m.num_vertices(), nt = m.num_triangles();
        std::vector<std::vector<int>> vf(nv);
        for (std::size_t t = 0; t < nt; ++t)
            for (int v : m.triangles[t]) vf[v].push_back(static_cast<int>(t));
        const auto edges = build_edges(m);
        std::vector<char> bnd(nv, 0);
        std::set<std::pair<int, int>> boundary_pairs;
        for (const auto& e : edges)
            if (e.faces.size() == 1) {
                bnd[e.a] = bnd[e.b] = 1;
                boundary_pairs.insert({e.a, e.b});
            }

        // short edges, plus the shortest edge of every sliver
        std::vector<char> sliver_edge(edges.size(), 0);
        if (sliver_angle_deg > 0.0) {
            const double cos_max = std::cos(sliver_angle_deg * std::numbers::pi / 180.0);
            std::vector<std::array<int, 3>> face_edges(nt, {-1, -1, -1});
            for (std::size_t i = 0; i < edges.size(); ++i)
                for (int f : edges[i].faces)
                    for (int& slot : face_edges[f])
                        if (slot < 0) {
                            slot = static_cast<int>(i);
                            break;
                        }
            for (std::size_t t = 0; t < nt; ++t) {
                const auto& tri = m.triangles[t];
                bool thin = false;
                for (int k = 0; k < 3; ++k) {
                    const Vec3 u = (m.vertices[tri[(k + 1) % 3]] - m.vertices[tri[k]]).normalized();
                    const Vec3 w = (m.vertices[tri[(k + 2) % 3]] - m.vertices[tri[k]]).normalized();
                    if (u.dot(w) > cos_max) thin = true;
                }
                if (!thin) continue;
                int best = -1;
                double best_len = std::numeric_limits<double>::infinity();
                for (int ei : face_edges[t]) {
                    const double len = (m.vertices[edges[ei].a] - m.vertices[edges[ei].b]).norm();
                    if (len < best_len) {
                        best_len = len;
                        best = ei;
                    }
                }
                if (best >= 0) sliver_edge[best] = 1;
            }
        }
        std::vector<std::pair<double, int>> candidates;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const double len = (m.vertices[edges[i].a] - m.vertices[edges[i].b]).norm();
            if (len < min_length || sliver_edge[i]) candidates.emplace_back(len, static_cast<int>(i));
        }
        if (candidates.empty()) break;
        std::sort(candidates.begin(), candidates.end());

        std::vector<char> dead(nt, 0), locked(nv, 0);
        int done = 0;
        for (const auto& [len, ei] : candidates) {
            const EdgeInfo& e = edges[ei];
            const int a = e.a, b = e.b;
            if (locked[a] || locked[b]) continue;
            if (e.faces.size() > 2) continue;
            const std::uint32_t ta = tag(a), tb = tag(b);
            int keep, rem;
            if ((tb & ~ta) == 0u) {
                keep = a;
                rem = b;
            } else if ((ta & ~tb) == 0u) {
                keep = b;
                rem = a;
            } else {
                continue;
            }
            if (ta == tb && bnd[rem] && !bnd[keep]) std::swap(keep, rem);
            const bool boundary_edge = e.faces.size() == 1;
            if (bnd[rem] && !bnd[keep]) continue;
            if (bnd[rem] && bnd[keep] && !boundary_edge) continue;

            // link condition
            std::set<int> na, nb, opp;
            for (int f : vf[a])
                if (!dead[f])
                    for (int v : m.triangles[f]) na.insert(v);
            for (int f : vf[b])
                if (!dead[f])
                    for (int v : m.triangles[f]) nb.insert(v);
            for (int f : e.faces)
                for (int v : m.triangles[f])
                    if (v != a && v != b) opp.insert(v);
            std::vector<int> common;
            std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
            std::erase_if(common, [&](int v) { return v == a || v == b; });
            if (common.size() != opp.size()) continue;
            // an interior chord between two vertices of one plane turns non-manifold when mirrored
            bool chord = false;
            for (int v : (rem == a ? na : nb))
                if (v != keep && v != rem && !opp.count(v) && (tag(v) & tag(keep)) != 0u &&
                    !boundary_pairs.count({std::min(v, rem), std::max(v, rem)}))
                    chord = true;
            if (chord) continue;

            // no face may flip or become degenerate
            Vec3 ref = Vec3::Zero();
            for (int f : vf[rem]) {
                if (dead[f]) continue;
                const auto& t = m.triangles[f];
                ref += (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
            }
            bool ok = true;
            for (int f : vf[rem]) {
                if (dead[f]) continue;
                auto t = m.triangles[f];
                if (std::find(t.begin(), t.end(), keep) != t.end()) continue;
                const Vec3 old_n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
                for (int& v : t)
                    if (v == rem) v = keep;
                const Vec3 new_n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
                if (new_n.norm() <= 0.0 || new_n.dot(ref) <= 0.0 ||
                    (old_n.norm() > 1e-3 * min_length * min_length && new_n.dot(old_n) <= 0.0)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;

            for (int f : vf[rem]) {
                if (dead[f]) continue;
                auto& t = m.triangles[f];
                if (std::find(t.begin(), t.end(), keep) != t.end()) {
                    dead[f] = 1;
                    continue;
                }
                for (int& v : t)
                    if (v == rem) v = keep;
                vf[keep].push_back(f);
            }
            for (int f : vf[keep])
                if (!dead[f])
                    for (int v : m.triangles[f]) locked[v] = 1;
            locked[rem] = 1;
            ++done;
        }
        if (done == 0) break;
        total += done;
        std::vector<Tri> tris;
        std::vector<DomainTag> dmap;
        std::vector<int> src;
        for (std::size_t t = 0; t < nt; ++t) {
            if (dead[t]) continue;
            tris.push_back(m.triangles[t]);
            if (!m.domain_map.empty()) dmap.push_back(m.domain_map[t]);
            if (!m.source_element.empty()) src.push_back(m.source_element[t]);
        }
        m.triangles = std::move(tris);
        m.domain_map = std::move(dmap);
        m.source_element = std::move(src);
        compact_vertices(m);
    }
    return total;
}

int flip_edges(TriMesh& m, double min_cos_dihedral) {
    const bool have_tags = !m.plane_tags.empty();
    auto tag = [&](int v) { return have_tags ? m.plane_tags[v] : 0u; };
    auto angle_at = [&](int apex, int p, int q) {
        const Vec3 u = (m.vertices[p] - m.vertices[apex]).normalized();
        const Vec3 w = (m.vertices[q] - m.vertices[apex]).normalized();
        return std::acos(std::clamp(u.dot(w), -1.0, 1.0));
    };
    auto face_normal = [&](const Tri& t) {
        return (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
    };
    int total = 0;
    for (int pass = 0; pass < 32; ++pass) {
        const auto edges = build_edges(m);
        std::set<std::pair<int, int>> existing;
        for (const auto& e : edges) existing.insert({e.a, e.b});
        std::vector<char> touched(m.num_triangles(), 0);
        int done = 0;
        for (const auto& e : edges) {
            if (e.faces.size() != 2) continue;
            const int f1 = e.faces[0], f2 = e.faces[1];
            if (touched[f1] || touched[f2]) continue;
            // orient: f1 holds a -> b, f2 holds b -> a
            int a = e.a, b = e.b;
            auto has_dir = [&](const Tri& t, int p, int q) {
                for (int k = 0; k < 3; ++k)
                    if (t[k] == p && t[(k + 1) % 3] == q) return true;
                return false;
            };
            int g1 = f1, g2 = f2;
            if (!has_dir(m.triangles[g1], a, b)) std::swap(a, b);
            if (!has_dir(m.triangles[g1], a, b) || !has_dir(m.triangles[g2], b, a)) continue;
            auto opposite = [](const Tri& t, int p, int q) {
                for (int v : t)
                    if (v != p && v != q) return v;
                return -1;
            };
            const int c = opposite(m.triangles[g1], a, b);
            const int d = opposite(m.triangles[g2], a, b);
            if (c == d || existing.count({std::min(c, d), std::max(c, d)})) continue;
            if ((tag(c) & tag(d)) != 0u) continue;
            if (angle_at(c, a, b) + angle_at(d, a, b) <= std::numbers::pi + 1e-9) continue;
            const Vec3 n1 = face_normal(m.triangles[g1]), n2 = face_normal(m.triangles[g2]);
            if (n1.norm() > 0 && n2.norm() > 0 && n1.normalized().dot(n2.normalized()) < min_cos_dihedral) continue;
            const Tri t1{a, d, c}, t2{d, b, c};
            const Vec3 ref = n1 + n2;
            const Vec3 m1 = face_normal(t1), m2 = face_normal(t2);
            if (m1.dot(ref) <= 0.0 || m2.dot(ref) <= 0.0) continue;
            if (m1.norm() > 0 && m2.norm() > 0 && m1.normalized().dot(m2.normalized()) < min_cos_dihedral) continue;
            m.triangles[g1] = t1;
            m.triangles[g2] = t2;
            touched[g1] = touched[g2] = 1;
            existing.insert({std::min(c, d), std::max(c, d)});
            ++done;
        }
        total += done;
        if (done == 0) break;
    }
    return total;
}

TriMesh mesh_fundamental_unit(const ImplicitSurface& surface, const CellSpec& spec,
                              const MeshingOptions& options) {
    spec.validate();
    if (options.resolution < kMinResolution)
        throw Error(ErrorKind::UnderResolved, "grid resolution " + std::to_string(options.resolution) +
                                                  " is below the minimum of " + std::to_string(kMinResolution));
    const double half = spec.half();
    KuhnMarcher marcher(surface, half, options.resolution);
    TriMesh mesh = marcher.run();
    if (mesh.triangles.empty()) throw Error(ErrorKind::EmptySurface, "no sign change inside the fundamental domain");

    const double h = half / options.resolution;
    for (int round = 0; round < 4; ++round) {
        const int collapsed = collapse_short_edges(mesh, options.collapse_fraction * h, options.sliver_angle);
        const int flipped = flip_edges(mesh, 0.8);
        if (collapsed == 0 && flipped == 0) break;
    }
    compact_vertices(mesh);
    if (mesh.triangles.empty()) throw Error(ErrorKind::EmptySurface, "surface vanished after cleanup");

    mesh.box_min = Vec3::Zero();
    mesh.box_max = Vec3::Constant(half);
    mesh.cell = spec;
    mesh.cell.domain = Domain::Fundamental;
    require_valid(mesh, ErrorKind::NonManifold, "fundamental mesh is invalid");
    return mesh;
}

TriMesh reflect_and_weld(const TriMesh& mesh, const Isometry& reflection) {
    TriMesh out = mesh;
    const int nv = static_cast<int>(mesh.num_vertices());
    for (const auto& v : mesh.vertices) out.vertices.push_back(reflection.apply(v));
    if (!mesh.plane_tags.empty()) out.plane_tags.insert(out.plane_tags.end(), mesh.plane_tags.begin(), mesh.plane_tags.end());
    const bool flip = reflection.reverses_orientation();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        Tri tri = mesh.triangles[t];
        for (int& i : tri) i += nv;
        if (flip) std::swap(tri[1], tri[2]);
        out.triangles.push_back(tri);
    }
    out.domain_map.clear();
    out.source_element.clear();
    for (int c = 0; c < 2; ++c)
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out.source_element.push_back(static_cast<int>(t));
    weld_vertices(out, kWeldTolerance);
    return out;
}

namespace {

TriMesh expand_copies(const TriMesh& mesh, const std::vector<Isometry>& ops, const Vec3& lo, const Vec3& hi,
                      bool record_domain_map) {
    TriMesh out;
    out.vertices.reserve(mesh.num_vertices() * ops.size());
    out.triangles.reserve(mesh.num_triangles() * ops.size());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const int base = static_cast<int>(out.vertices.size());
        for (const auto& v : mesh.vertices) out.vertices.push_back(ops[k].apply(v));
        const bool flip = ops[k].reverses_orientation();
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
            Tri tri = mesh.triangles[t];
            for (int& i : tri) i += base;
            if (flip) std::swap(tri[1], tri[2]);
            out.triangles.push_back(tri);
            out.source_element.push_back(static_cast<int>(t));
            if (record_domain_map) out.domain_map.push_back({static_cast<int>(t), static_cast<int>(k) + 1});
        }
    }
    out.box_min = lo;
    out.box_max = hi;
    out.cell = mesh.cell;
    weld_vertices(out, kWeldTolerance);
    out.planes = box_planes(lo, hi);
    retag_planes(out, kWeldTolerance);
    const MeshCheck c = check_mesh(out);
    if (!c.boundary_on_planes)
        throw Error(ErrorKind::WeldFailure, "mirror-plane vertices failed to pair: " + c.message);
    if (!c.edge_manifold || !c.consistent_orientation)
        throw Error(ErrorKind::WeldFailure, "expanded mesh is not manifold: " + c.message);
    return out;
}

TriMesh fundamental_to_eighth(const TriMesh& f) {
    std::vector<Isometry> ops;
    for (const auto& p : kPermutations) {
        Isometry iso;
        iso.linear.setZero();
        for (int r = 0; r < 3; ++r) iso.linear(r, p[r]) = 1.0;
        ops.push_back(iso);
    }
    const double half = f.cell.half();
    TriMesh out = expand_copies(f, ops, Vec3::Zero(), Vec3::Constant(half), true);
    out.cell.domain = Domain::Eighth;
    return out;
}

TriMesh eighth_to_unit(const TriMesh& e) {
    std::vector<Isometry> ops;
    for (int s = 0; s < 8; ++s) {
        Isometry iso;
        for (int a = 0; a < 3; ++a) iso.linear(a, a) = (s >> a & 1) ? -1.0 : 1.0;
        ops.push_back(iso);
    }
    const double half = e.cell.half();
    TriMesh out = expand_copies(e, ops, Vec3::Constant(-half), Vec3::Constant(half), false);
    out.cell.domain = Domain::Unit;
    return out;
}

} // namespace

TriMesh mirror_expand(const TriMesh& mesh, Domain target) {
    const Domain from = mesh.cell.domain;
    if (target == Domain::Eighth && from == Domain::Fundamental) return fundamental_to_eighth(mesh);
    if (target == Domain::Unit && from == Domain::Eighth) return eighth_to_unit(mesh);
    if (target == Domain::Unit && from == Domain::Fundamental) {
        const TriMesh eighth = fundamental_to_eighth(mesh);
        TriMesh unit = eighth_to_unit(eighth);
        for (int& s : unit.source_element) s = eighth.source_element[s];
        return unit;
    }
    throw Error(ErrorKind::InvalidArgument,
                "cannot mirror-expand a " + to_string(from) + " mesh to " + to_string(target));
}

TriMesh tile(const TriMesh& unit_cell, int nx, int ny, int nz) {
    if (unit_cell.cell.domain != Domain::Unit)
        throw Error(ErrorKind::InvalidArgument, "tile expects a unit-cell mesh");
    if (nx < 1 || ny < 1 || nz < 1) throw Error(ErrorKind::InvalidArgument, "tile counts must be >= 1");
    const double d = unit_cell.cell.size;
    std::vector<Isometry> ops;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                Isometry iso;
                iso.shift = Vec3(i * d, j * d, k * d);
                ops.push_back(iso);
            }
    const Vec3 lo = unit_cell.box_min;
    const Vec3 hi = lo + Vec3(nx * d, ny * d, nz * d);
    TriMesh out = expand_copies(unit_cell, ops, lo, hi, false);
    out.cell.domain = Domain::Tiled;
    out.cell.tiles = {nx, ny, nz};
    return out;
}

TriMesh build_cell_mesh(const ImplicitSurface& surface, const CellSpec& spec, const MeshingOptions& options) {
    TriMesh f = mesh_fundamental_unit(surface, spec, options);
    switch (spec.domain) {
        case Domain::Fundamental: return f;
        case Domain::Eighth: return mirror_expand(f, Domain::Eighth);
        case Domain::Unit: return mirror_expand(mirror_expand(f, Domain::Eighth), Domain::Unit);
        case Domain::Tiled: {
            TriMesh unit = mirror_expand(mirror_expand(f, Domain::Eighth), Domain::Unit);
            return tile(unit, spec.tiles[0], spec.tiles[1], spec.tiles[2]);
        }
    }
    return f;
}

double relative_density(const TriMesh& mesh, std::span<const double> thickness) {
    if (thickness.size() != mesh.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "thickness field size does not match triangle count");
    double solid = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        solid += thickness[t] * triangle_area(mesh, static_cast<int>(t));
    return solid / mesh.box_volume();
}

std::vector<double> pull_back(const TriMesh& expanded, std::span<const double> source_field) {
    if (expanded.source_element.size() != expanded.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "mesh carries no source-element map");
    std::vector<double> out(expanded.num_triangles());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const int s = expanded.source_element[t];
        if (s < 0 || static_cast<std::size_t>(s) >= source_field.size())
            throw Error(ErrorKind::InvalidArgument, "source field is smaller than the source mesh");
        out[t] = source_field[s];
    }
    return out;
}

} // namespace isoshell
