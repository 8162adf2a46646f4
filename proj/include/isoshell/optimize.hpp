#pragma once

#include "isoshell/homogenize.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace isoshell {

/// J = 1/2 (xi - 1)^2.
double objective(const ElasticConstants& c);

/// d e / d delta_i = (e_membrane[i] + 3 e_bending[i]) / delta_i for one load case.
/// Throws MissingEnergySplit when the solution carries no per-element energies.
std::vector<double> energy_sensitivity(const LoadCaseSolution& solution, std::span<const double> thickness);

/// dJ/d delta_i, chained through xi = 4 e_S / (3 e_U - e_T / 3).
/// `solutions` are the U, T, S cases in that order.
std::vector<double> sensitivity(std::span<const LoadCaseSolution> solutions,
                                std::span<const double> thickness);

/// Replaces every entry by the mean over its six permutation copies (same
/// fundamental source). Throws MissingDomainMap.
std::vector<double> symmetry_average(std::span<const double> field, const TriMesh& mesh);

struct ThicknessBounds {
    double min = 0.0, max = 0.0;

    void validate() const;
};

/// delta_i <- clamp(delta_i - dt grad_i, min, max).
std::vector<double> descent_step(std::span<const double> thickness, std::span<const double> grad, double dt,
                                 const ThicknessBounds& bounds);

/// Zeroes gradient entries that would push a clamped element further outside.
std::vector<double> project_gradient(std::span<const double> thickness, std::span<const double> grad,
                                     const ThicknessBounds& bounds);

struct OptimizerConfig {
    ThicknessBounds bounds;
    double move_limit = 0.02; // max step per iteration as a fraction of (max - min)
    int max_iterations = 500;
    double tolerance = 0.01;  // on |xi - 1|
    int checkpoint_every = 0; // 0 disables checkpoints
    std::filesystem::path checkpoint_path;

    void validate() const;
};

struct HistoryRow {
    int iteration = 0;
    double xi = 0.0, objective = 0.0, relative_density = 0.0;
    double dt = 0.0, grad_norm = 0.0;
    int clamped = 0;
    bool accepted = true;
};

struct OptimizationState {
    int iteration = 0;
    std::vector<double> thickness;
    double step_scale = 1.0; // halved when J rises, doubled back after two good steps
    int successes = 0;
    std::vector<HistoryRow> history;
};

struct OptimizationResult {
    OptimizationState state;
    HomogenizationResult homogenization; // at the returned thickness
    double xi = 0.0, objective = 0.0;
    bool converged = false;
    std::vector<std::string> warnings;
};

using ProgressCallback = std::function<void(const HistoryRow&)>;

/// Projected steepest descent on J with symmetry-averaged sensitivities. Starts
/// from t0 or from `resume`. A run that hits max_iterations returns the best
/// state seen with converged = false and a NonConvergence warning.
OptimizationResult optimize_isotropy(const TriMesh& mesh, std::span<const double> t0, const Material& mat,
                                     const OptimizerConfig& config, const OptimizationState* resume = nullptr,
                                     const ProgressCallback& progress = {});

/// Columns iter, xi, J, rho_bar, dt, grad_norm, n_clamped.
void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history);

void save_checkpoint(const std::filesystem::path& path, const OptimizationState& state);

/// Relative agreement required between analytic and finite-difference dJ/dt.
inline constexpr double kGradientTolerance = 1e-4;

struct GradientCheck {
    std::size_t element = 0;
    double analytic = 0.0, finite_difference = 0.0;
    double relative_error = 0.0;
};

/// Central differences of J on `count` distinct random elements (seeded), step
/// rel_step * t_i, compared against the raw (unaveraged) analytic gradient.
std::vector<GradientCheck> check_gradient(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                                          std::size_t count, unsigned seed = 1, double rel_step = 1e-5);
OptimizationState load_checkpoint(const std::filesystem::path& path);

} // namespace isoshell
