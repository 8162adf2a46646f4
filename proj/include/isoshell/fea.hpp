#pragma once

#include "isoshell/shell_element.hpp"
#include "isoshell/tri_mesh.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace isoshell {

/// Voigt order used throughout: (11, 22, 33, 12, 23, 13), engineering shear strains.
using Vector6 = Eigen::Matrix<double, 6, 1>;

enum class LoadKind { U, T, S };

std::string to_string(LoadKind kind);

/// Unit macroscopic strain: U = e11, T = e11 + e22 + e33, S = gamma12.
struct LoadCase {
    LoadKind kind = LoadKind::U;
    Vector6 strain = Vector6::Zero();

    static LoadCase of(LoadKind kind);
};

inline constexpr int kDofsPerNode = 6; // ux, uy, uz, rx, ry, rz

/// Per-DOF prescriptions; DOFs not prescribed are free.
struct ConstraintSet {
    LoadCase load;
    std::vector<char> prescribed;
    Eigen::VectorXd value;

    ConstraintSet() = default;
    explicit ConstraintSet(std::size_t num_nodes);

    std::size_t num_dofs() const { return prescribed.size(); }
    std::size_t num_prescribed() const;
    /// Throws ConflictingConstraint when the DOF already holds a different value.
    void prescribe(std::size_t dof, double v);
    ConstraintSet scaled(double s) const;
    bool same_pattern(const ConstraintSet& other) const { return prescribed == other.prescribed; }
};

/// Symmetry-reduced eighth-cell boundary conditions on the box planes
/// (xmin..zmax). Min faces are mirror planes, max faces carry the load.
/// Throws UntaggedBoundary if a boundary vertex lies on no box plane.
ConstraintSet build_constraints(const TriMesh& mesh, const LoadCase& load);

struct LoadCaseSolution {
    LoadKind kind = LoadKind::U;
    Eigen::VectorXd displacements; // kDofsPerNode per vertex
    Eigen::VectorXd reactions;     // internal force at prescribed DOFs, zero elsewhere
    std::vector<double> e_membrane;
    std::vector<double> e_bending; // includes the drilling penalty (same thickness scaling)
    double e_total = 0.0;
    double external_work = 0.0; // 1/2 sum(reaction * prescribed value)
    Vector6 sigma_macro = Vector6::Zero();
    Vector6 sigma_micro_avg = Vector6::Zero();
    double pivot_ratio = 0.0; // max/min LDL^T pivot, a cheap condition estimate
    std::vector<std::string> warnings;
};

/// Pivot ratio above which an IllConditioned warning is attached.
inline constexpr double kIllConditioned = 1e14;

/// Solves K u = 0 on free DOFs with prescribed DOFs eliminated, then fills
/// reactions, per-element energies and both stress averages.
/// Throws SingularSystem when the reduced stiffness is not positive definite.
LoadCaseSolution assemble_and_solve(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                                    const ConstraintSet& constraints);

/// Several cases at once; cases with the same prescribed pattern share one factorization.
std::vector<LoadCaseSolution> assemble_and_solve(const TriMesh& mesh, std::span<const double> thickness,
                                                 const Material& mat, std::span<const ConstraintSet> cases);

/// The eighth cell is mirror-symmetric about its min faces, so on the full cell
/// only the stress components that are even under those mirrors survive:
/// the normal stresses for U and T, sigma12 for S. Everything else is zeroed.
Vector6 full_cell_projection(const Vector6& eighth, LoadKind kind);

/// Reaction force sums on each max face divided by the full face area, projected
/// onto the full-cell components. Shear entries average the two faces carrying them.
Vector6 macroscopic_stress(const LoadCaseSolution& solution, const TriMesh& mesh);

/// Volume average of the shell stress: membrane stress resultants plus the
/// virial of the bending/drilling nodal forces, symmetrized and projected.
Vector6 microscopic_stress(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                           const Eigen::VectorXd& displacements, LoadKind kind);

/// Per-element (membrane, bending) strain energies of a displacement field.
void element_energies(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                      const Eigen::VectorXd& displacements, std::vector<double>& membrane,
                      std::vector<double>& bending);

} // namespace isoshell
