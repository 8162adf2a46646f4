#include "isoshell/fea.hpp"

#include "isoshell/error.hpp"
#include "isoshell/parallel.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <sstream>

namespace isoshell {

std::string to_string(LoadKind kind) {
    switch (kind) {
        case LoadKind::U: return "U";
        case LoadKind::T: return "T";
        case LoadKind::S: return "S";
    }
    return "?";
}

LoadCase LoadCase::of(LoadKind kind) {
    LoadCase c;
    c.kind = kind;
    switch (kind) {
        case LoadKind::U: c.strain(0) = 1.0; break;
        case LoadKind::T: c.strain.head<3>().setOnes(); break;
        case LoadKind::S: c.strain(3) = 1.0; break;
    }
    return c;
}

ConstraintSet::ConstraintSet(std::size_t num_nodes)
    : prescribed(kDofsPerNode * num_nodes, 0), value(Eigen::VectorXd::Zero(kDofsPerNode * num_nodes)) {}

std::size_t ConstraintSet::num_prescribed() const {
    std::size_t n = 0;
    for (char p : prescribed) n += p != 0;
    return n;
}

void ConstraintSet::prescribe(std::size_t dof, double v) {
    if (prescribed[dof]) {
        if (value(dof) != v) {
            std::ostringstream msg;
            msg << "DOF " << dof << " (node " << dof / kDofsPerNode << ", component " << dof % kDofsPerNode
                << ") prescribed as both " << value(dof) << " and " << v;
            throw Error(ErrorKind::ConflictingConstraint, msg.str());
        }
        return;
    }
    prescribed[dof] = 1;
    value(dof) = v;
}

ConstraintSet ConstraintSet::scaled(double s) const {
    ConstraintSet c = *this;
    c.value *= s;
    return c;
}

namespace {

constexpr const char* kBoxPlaneNames[3][2] = {{"xmin", "xmax"}, {"ymin", "ymax"}, {"zmin", "zmax"}};

std::array<std::array<int, 2>, 3> box_plane_indices(const TriMesh& mesh) {
    std::array<std::array<int, 2>, 3> idx{};
    for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s) {
            idx[a][s] = mesh.plane_index(kBoxPlaneNames[a][s]);
            if (idx[a][s] < 0)
                throw Error(ErrorKind::InvalidArgument,
                            std::string("mesh has no '") + kBoxPlaneNames[a][s] + "' plane; expected an eighth-cell mesh");
        }
    return idx;
}

} // namespace

ConstraintSet build_constraints(const TriMesh& mesh, const LoadCase& load) {
    const auto planes = box_plane_indices(mesh);
    if (mesh.plane_tags.size() != mesh.num_vertices())
        throw Error(ErrorKind::UntaggedBoundary, "mesh carries no plane tags");
    std::uint32_t box_mask = 0;
    for (const auto& p : planes) box_mask |= (1u << p[0]) | (1u << p[1]);
    const auto bnd = boundary_vertices(mesh);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        if (bnd[v] && (mesh.plane_tags[v] & box_mask) == 0u)
            throw Error(ErrorKind::UntaggedBoundary, "boundary vertex " + std::to_string(v) + " lies on no box plane");

    const Vec3 extent = mesh.box_max - mesh.box_min;
    const Vector6& e = load.strain;
    ConstraintSet cs(mesh.num_vertices());
    cs.load = load;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const std::size_t base = kDofsPerNode * v;
        auto u = [&](int axis, double val) { cs.prescribe(base + axis, val); };
        auto rot = [&](int axis, double val) { cs.prescribe(base + 3 + axis, val); };
        auto symmetric = [&](int a) {
            u(a, 0.0);
            rot((a + 1) % 3, 0.0);
            rot((a + 2) % 3, 0.0);
        };
        auto antisymmetric = [&](int a) {
            u((a + 1) % 3, 0.0);
            u((a + 2) % 3, 0.0);
            rot(a, 0.0);
        };
        for (int a = 0; a < 3; ++a) {
            if (mesh.on_plane(static_cast<int>(v), planes[a][0])) {
                if (load.kind == LoadKind::S && a < 2)
                    antisymmetric(a);
                else
                    symmetric(a);
            }
            if (!mesh.on_plane(static_cast<int>(v), planes[a][1])) continue;
            if (load.kind != LoadKind::S) {
                u(a, e(a) * extent[a]);
                rot((a + 1) % 3, 0.0);
                rot((a + 2) % 3, 0.0);
            } else if (a == 0) {
                // u_y = gamma12 * x on the far x face
                u(1, e(3) * extent[0]);
                u(2, 0.0);
                rot(0, 0.0);
            } else if (a == 1) {
                u(0, 0.0);
                u(2, 0.0);
                rot(1, 0.0);
            } else {
                symmetric(2);
            }
        }
    }
    return cs;
}

namespace {

void check_inputs(const TriMesh& mesh, std::span<const double> thickness, const Material& mat) {
    mat.validate();
    if (thickness.size() != mesh.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "thickness field size does not match triangle count");
}

std::array<int, 18> element_dofs(const Tri& t) {
    std::array<int, 18> d{};
    for (int n = 0; n < 3; ++n)
        for (int k = 0; k < kDofsPerNode; ++k) d[kDofsPerNode * n + k] = kDofsPerNode * t[n] + k;
    return d;
}

Vector18 gather(const Eigen::VectorXd& u, const std::array<int, 18>& dofs) {
    Vector18 ue;
    for (int i = 0; i < 18; ++i) ue(i) = u(dofs[i]);
    return ue;
}

Vector6 voigt(const Eigen::Matrix3d& s) {
    Vector6 v;
    v << s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(1, 2), s(0, 2);
    return v;
}

// Per-element quantities after a solve; summed in element order for determinism.
struct ElementResult {
    double e_membrane = 0.0, e_bending = 0.0;
    Vector18 force;
    Eigen::Matrix3d stress_volume; // integral of stress over the element volume
};

ElementResult element_result(const TriMesh& mesh, std::size_t t, double thickness, const Material& mat,
                             const Eigen::VectorXd& u) {
    const Tri& tri = mesh.triangles[t];
    const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]], &c = mesh.vertices[tri[2]];
    const ElementStiffness k = element_stiffness(a, b, c, thickness, mat);
    const Vector18 ue = gather(u, element_dofs(tri));
    const Vector18 fm = k.membrane * ue, fb = k.bending * ue;
    ElementResult r;
    r.e_membrane = 0.5 * ue.dot(fm);
    r.e_bending = 0.5 * ue.dot(fb);
    r.force = fm + fb;

    // membrane: constant CST stress times the element volume
    const Eigen::Matrix3d frame = element_frame(a, b, c);
    const auto xy = local_coordinates(a, b, c);
    Eigen::Matrix<double, 6, 1> uv;
    for (int n = 0; n < 3; ++n) {
        const Vec3 ul = frame * ue.segment<3>(kDofsPerNode * n);
        uv(2 * n) = ul.x();
        uv(2 * n + 1) = ul.y();
    }
    const Eigen::Vector3d s = membrane_stress_local(xy, uv, mat);
    Eigen::Matrix2d s2;
    s2 << s(0), s(2), s(2), s(1);
    const Eigen::Matrix<double, 2, 3> r2 = frame.topRows<2>();
    const double area = 0.5 * (b - a).cross(c - a).norm();
    r.stress_volume = thickness * area * (r2.transpose() * s2 * r2);
    // bending and drilling: virial of the nodal forces
    const Vec3* pts[3] = {&a, &b, &c};
    for (int n = 0; n < 3; ++n) r.stress_volume += *pts[n] * fb.segment<3>(kDofsPerNode * n).transpose();
    return r;
}

class ReducedSystem {
public:
    ReducedSystem(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                  const std::vector<char>& prescribed)
        : mesh_(mesh), prescribed_(prescribed) {
        const std::size_t ndof = prescribed.size();
        free_index_.assign(ndof, -1);
        int nf = 0;
        for (std::size_t d = 0; d < ndof; ++d)
            if (!prescribed[d]) free_index_[d] = nf++;
        nfree_ = nf;

        elements_.resize(mesh.num_triangles());
        parallel_for(mesh.num_triangles(), [&](std::size_t t) {
            const Tri& tri = mesh.triangles[t];
            elements_[t] =
                element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], thickness[t], mat)
                    .total();
        });

        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(mesh.num_triangles() * 171);
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
            const auto dofs = element_dofs(mesh.triangles[t]);
            for (int i = 0; i < 18; ++i) {
                const int fi = free_index_[dofs[i]];
                if (fi < 0) continue;
                for (int j = 0; j < 18; ++j) {
                    const int fj = free_index_[dofs[j]];
                    if (fj >= 0 && fi >= fj) trips.emplace_back(fi, fj, elements_[t](i, j));
                }
            }
        }
        Eigen::SparseMatrix<double> k(nfree_, nfree_);
        k.setFromTriplets(trips.begin(), trips.end());
        trips.clear();
        trips.shrink_to_fit();

        if (nfree_ > 0) {
            solver_.compute(k);
            if (solver_.info() != Eigen::Success)
                throw Error(ErrorKind::SingularSystem, "sparse LDL^T factorization failed");
            const Eigen::VectorXd d = solver_.vectorD();
            const double dmax = d.cwiseAbs().maxCoeff();
            const double dmin = d.minCoeff();
            if (!(dmin > kSingularPivot * dmax)) {
                std::ostringstream msg;
                msg << "reduced stiffness is not positive definite (pivot range " << dmin << " .. " << dmax
                    << "); the structure is under-constrained";
                throw Error(ErrorKind::SingularSystem, msg.str());
            }
            pivot_ratio_ = dmax / dmin;
        }
    }

    Eigen::VectorXd solve(const ConstraintSet& cs) const {
        // rhs = -K_FP u_P, from the element matrices
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree_);
        for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
            const auto dofs = element_dofs(mesh_.triangles[t]);
            Vector18 up = Vector18::Zero();
            bool any = false;
            for (int j = 0; j < 18; ++j)
                if (prescribed_[dofs[j]] && cs.value(dofs[j]) != 0.0) {
                    up(j) = cs.value(dofs[j]);
                    any = true;
                }
            if (!any) continue;
            const Vector18 f = elements_[t] * up;
            for (int i = 0; i < 18; ++i)
                if (free_index_[dofs[i]] >= 0) rhs(free_index_[dofs[i]]) -= f(i);
        }
        Eigen::VectorXd u = cs.value;
        if (nfree_ > 0) {
            const Eigen::VectorXd uf = solver_.solve(rhs);
            for (std::size_t d = 0; d < free_index_.size(); ++d)
                if (free_index_[d] >= 0) u(d) = uf(free_index_[d]);
        }
        return u;
    }

    double pivot_ratio() const { return pivot_ratio_; }

private:
    static constexpr double kSingularPivot = 1e-15;

    const TriMesh& mesh_;
    std::vector<char> prescribed_;
    std::vector<int> free_index_;
    int nfree_ = 0;
    std::vector<Matrix18> elements_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> solver_;
    double pivot_ratio_ = 1.0;
};

LoadCaseSolution finish_solution(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                                 const ConstraintSet& cs, Eigen::VectorXd u, double pivot_ratio) {
    const std::size_t nt = mesh.num_triangles();
    std::vector<ElementResult> results(nt);
    parallel_for(nt, [&](std::size_t t) { results[t] = element_result(mesh, t, thickness[t], mat, u); });

    LoadCaseSolution sol;
    sol.kind = cs.load.kind;
    sol.e_membrane.resize(nt);
    sol.e_bending.resize(nt);
    Eigen::VectorXd internal = Eigen::VectorXd::Zero(u.size());
    Eigen::Matrix3d stress = Eigen::Matrix3d::Zero();
    for (std::size_t t = 0; t < nt; ++t) {
        sol.e_membrane[t] = results[t].e_membrane;
        sol.e_bending[t] = results[t].e_bending;
        sol.e_total += results[t].e_membrane + results[t].e_bending;
        const auto dofs = element_dofs(mesh.triangles[t]);
        for (int i = 0; i < 18; ++i) internal(dofs[i]) += results[t].force(i);
        stress += results[t].stress_volume;
    }
    sol.reactions = Eigen::VectorXd::Zero(u.size());
    for (Eigen::Index d = 0; d < u.size(); ++d)
        if (cs.prescribed[d]) {
            sol.reactions(d) = internal(d);
            sol.external_work += 0.5 * internal(d) * cs.value(d);
        }
    sol.displacements = std::move(u);
    const Eigen::Matrix3d sym = 0.5 * (stress + stress.transpose()) / mesh.box_volume();
    sol.sigma_micro_avg = full_cell_projection(voigt(sym), sol.kind);
    sol.sigma_macro = macroscopic_stress(sol, mesh);
    sol.pivot_ratio = pivot_ratio;
    if (pivot_ratio > kIllConditioned) {
        std::ostringstream msg;
        msg << "IllConditioned: pivot ratio " << pivot_ratio << " exceeds " << kIllConditioned;
        sol.warnings.push_back(msg.str());
    }
    return sol;
}

} // namespace

std::vector<LoadCaseSolution> assemble_and_solve(const TriMesh& mesh, std::span<const double> thickness,
                                                 const Material& mat, std::span<const ConstraintSet> cases) {
    check_inputs(mesh, thickness, mat);
    for (const auto& cs : cases)
        if (cs.num_dofs() != kDofsPerNode * mesh.num_vertices())
            throw Error(ErrorKind::InvalidArgument, "constraint set does not match the mesh");
    std::vector<LoadCaseSolution> out(cases.size());
    std::vector<char> done(cases.size(), 0);
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (done[i]) continue;
        if (cases[i].num_prescribed() == 0)
            throw Error(ErrorKind::SingularSystem, "no prescribed DOFs; the structure floats");
        const ReducedSystem system(mesh, thickness, mat, cases[i].prescribed);
        for (std::size_t j = i; j < cases.size(); ++j) {
            if (done[j] || !cases[j].same_pattern(cases[i])) continue;
            out[j] = finish_solution(mesh, thickness, mat, cases[j], system.solve(cases[j]), system.pivot_ratio());
            done[j] = 1;
        }
    }
    return out;
}

LoadCaseSolution assemble_and_solve(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                                    const ConstraintSet& constraints) {
    return assemble_and_solve(mesh, thickness, mat, std::span<const ConstraintSet>(&constraints, 1)).front();
}

Vector6 macroscopic_stress(const LoadCaseSolution& solution, const TriMesh& mesh) {
    const auto planes = box_plane_indices(mesh);
    const Vec3 extent = mesh.box_max - mesh.box_min;
    Eigen::Matrix3d face = Eigen::Matrix3d::Zero(); // face(a, b): force b on the far face normal to a
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        for (int a = 0; a < 3; ++a)
            if (mesh.on_plane(static_cast<int>(v), planes[a][1]))
                for (int b = 0; b < 3; ++b) face(a, b) += solution.reactions(kDofsPerNode * v + b);
    for (int a = 0; a < 3; ++a) face.row(a) /= extent[(a + 1) % 3] * extent[(a + 2) % 3];
    return full_cell_projection(voigt(0.5 * (face + face.transpose())), solution.kind);
}

Vector6 full_cell_projection(const Vector6& eighth, LoadKind kind) {
    Vector6 out = Vector6::Zero();
    if (kind == LoadKind::S)
        out(3) = eighth(3);
    else
        out.head<3>() = eighth.head<3>();
    return out;
}

Vector6 microscopic_stress(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                           const Eigen::VectorXd& displacements, LoadKind kind) {
    check_inputs(mesh, thickness, mat);
    std::vector<ElementResult> results(mesh.num_triangles());
    parallel_for(mesh.num_triangles(),
                 [&](std::size_t t) { results[t] = element_result(mesh, t, thickness[t], mat, displacements); });
    Eigen::Matrix3d stress = Eigen::Matrix3d::Zero();
    for (const auto& r : results) stress += r.stress_volume;
    return full_cell_projection(voigt(0.5 * (stress + stress.transpose()) / mesh.box_volume()), kind);
}

void element_energies(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                      const Eigen::VectorXd& displacements, std::vector<double>& membrane,
                      std::vector<double>& bending) {
    check_inputs(mesh, thickness, mat);
    membrane.assign(mesh.num_triangles(), 0.0);
    bending.assign(mesh.num_triangles(), 0.0);
    parallel_for(mesh.num_triangles(), [&](std::size_t t) {
        const auto r = element_result(mesh, t, thickness[t], mat, displacements);
        membrane[t] = r.e_membrane;
        bending[t] = r.e_bending;
    });
}

} // namespace isoshell
