#include "isoshell/optimize.hpp"

#include "isoshell/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace isoshell {

double objective(const ElasticConstants& c) {
    const double d = zener(c) - 1.0;
    return 0.5 * d * d;
}

std::vector<double> energy_sensitivity(const LoadCaseSolution& solution, std::span<const double> thickness) {
    const std::size_t n = thickness.size();
    if (solution.e_membrane.size() != n || solution.e_bending.size() != n)
        throw Error(ErrorKind::MissingEnergySplit, "load case solution lacks per-element membrane/bending energies");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (solution.e_membrane[i] + 3.0 * solution.e_bending[i]) / thickness[i];
    return g;
}

std::vector<double> sensitivity(std::span<const LoadCaseSolution> solutions,
                                std::span<const double> thickness) {
    if (solutions.size() != 3) throw Error(ErrorKind::InvalidArgument, "expected the U, T and S solutions");
    const auto du = energy_sensitivity(solutions[0], thickness);
    const auto dt = energy_sensitivity(solutions[1], thickness);
    const auto ds = energy_sensitivity(solutions[2], thickness);
    const double eu = solutions[0].e_total, et = solutions[1].e_total, es = solutions[2].e_total;
    const double den = 3.0 * eu - et / 3.0;
    if (den == 0.0) throw Error(ErrorKind::DegenerateConstants, "c11 equals c12; the Zener index is undefined");
    const double xi = 4.0 * es / den;
    const double factor = xi - 1.0;
    std::vector<double> g(thickness.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double dxi = 4.0 * ds[i] / den - 4.0 * es * (3.0 * du[i] - dt[i] / 3.0) / (den * den);
        g[i] = factor * dxi;
    }
    return g;
}

std::vector<double> symmetry_average(std::span<const double> field, const TriMesh& mesh) {
    if (mesh.domain_map.size() != mesh.num_triangles() || field.size() != mesh.num_triangles())
        throw Error(ErrorKind::MissingDomainMap, "per-element field needs an eighth-cell mesh with a domain map");
    int sources = 0;
    for (const auto& d : mesh.domain_map) sources = std::max(sources, d.source + 1);
    std::vector<double> sum(sources, 0.0);
    std::vector<int> count(sources, 0);
    for (std::size_t i = 0; i < field.size(); ++i) {
        sum[mesh.domain_map[i].source] += field[i];
        ++count[mesh.domain_map[i].source];
    }
    std::vector<double> out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        const int s = mesh.domain_map[i].source;
        out[i] = sum[s] / count[s];
    }
    return out;
}

void ThicknessBounds::validate() const {
    if (!(min > 0.0) || !(max >= min))
        throw Error(ErrorKind::InvalidArgument, "thickness bounds must satisfy 0 < min <= max");
}

std::vector<double> descent_step(std::span<const double> thickness, std::span<const double> grad, double dt,
                                 const ThicknessBounds& bounds) {
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "step size must be positive");
    if (grad.size() != thickness.size()) throw Error(ErrorKind::InvalidArgument, "gradient size mismatch");
    std::vector<double> out(thickness.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(thickness[i] - dt * grad[i], bounds.min, bounds.max);
    return out;
}

std::vector<double> project_gradient(std::span<const double> thickness, std::span<const double> grad,
                                     const ThicknessBounds& bounds) {
    std::vector<double> out(grad.begin(), grad.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        if ((thickness[i] <= bounds.min && out[i] > 0.0) || (thickness[i] >= bounds.max && out[i] < 0.0)) out[i] = 0.0;
    return out;
}

void OptimizerConfig::validate() const {
    bounds.validate();
    if (!(move_limit > 0.0)) throw Error(ErrorKind::InvalidArgument, "move limit must be positive");
    if (max_iterations < 0) throw Error(ErrorKind::InvalidArgument, "max_iterations must be non-negative");
    if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    if (checkpoint_every > 0 && checkpoint_path.empty())
        throw Error(ErrorKind::InvalidArgument, "checkpoints requested without a checkpoint path");
}

namespace {

struct Evaluation {
    HomogenizationResult h;
    double xi = 0.0, j = 0.0;
};

Evaluation evaluate(const TriMesh& mesh, std::span<const double> t, const Material& mat) {
    Evaluation e;
    e.h = run_homogenization(mesh, t, mat);
    e.xi = zener(e.h.constants);
    e.j = objective(e.h.constants);
    return e;
}

int count_clamped(std::span<const double> t, const ThicknessBounds& b) {
    return static_cast<int>(std::count_if(t.begin(), t.end(), [&](double v) { return v <= b.min || v >= b.max; }));
}

// Steps below this fraction of the move limit mean the line search has stalled.
constexpr double kMinStepScale = 1e-6;

} // namespace

OptimizationResult optimize_isotropy(const TriMesh& mesh, std::span<const double> t0, const Material& mat,
                                     const OptimizerConfig& config, const OptimizationState* resume,
                                     const ProgressCallback& progress) {
    config.validate();
    if (mesh.domain_map.size() != mesh.num_triangles())
        throw Error(ErrorKind::MissingDomainMap, "optimization needs an eighth-cell mesh with a domain map");

    OptimizationState state;
    if (resume) {
        state = *resume;
    } else {
        state.thickness.assign(t0.begin(), t0.end());
        for (double v : state.thickness)
            if (v < config.bounds.min || v > config.bounds.max)
                throw Error(ErrorKind::InvalidArgument, "initial thickness lies outside the bounds");
    }
    if (state.thickness.size() != mesh.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "thickness field size does not match triangle count");

    OptimizationResult result;
    Evaluation current = evaluate(mesh, state.thickness, mat);
    const double span = config.bounds.max - config.bounds.min;
    auto record = [&](HistoryRow row) {
        state.history.push_back(row);
        if (progress) progress(row);
    };
    if (state.history.empty())
        record({state.iteration, current.xi, current.j, current.h.relative_density, 0.0, 0.0,
                count_clamped(state.thickness, config.bounds), true});

    while (std::abs(current.xi - 1.0) >= config.tolerance && state.iteration < config.max_iterations) {
        const auto raw = sensitivity(current.h.solutions, state.thickness);
        const auto grad = project_gradient(state.thickness, symmetry_average(raw, mesh), config.bounds);
        double gmax = 0.0, gnorm2 = 0.0;
        for (double g : grad) {
            gmax = std::max(gmax, std::abs(g));
            gnorm2 += g * g;
        }
        ++state.iteration;
        if (gmax == 0.0 || state.step_scale < kMinStepScale) {
            result.warnings.push_back("NonConvergence: descent stalled (zero projected gradient or vanishing step)");
            break;
        }
        const double dt = config.move_limit * state.step_scale * span / gmax;
        auto trial = descent_step(state.thickness, grad, dt, config.bounds);
        Evaluation next = evaluate(mesh, trial, mat);
        const bool accepted = next.j <= current.j;
        if (accepted) {
            state.thickness = std::move(trial);
            current = std::move(next);
            if (++state.successes >= 2) {
                state.step_scale = std::min(1.0, 2.0 * state.step_scale);
                state.successes = 0;
            }
        } else {
            state.step_scale *= 0.5;
            state.successes = 0;
        }
        record({state.iteration, current.xi, current.j, current.h.relative_density, dt, std::sqrt(gnorm2),
                count_clamped(state.thickness, config.bounds), accepted});
        if (config.checkpoint_every > 0 && state.iteration % config.checkpoint_every == 0)
            save_checkpoint(config.checkpoint_path, state);
    }

    result.converged = std::abs(current.xi - 1.0) < config.tolerance;
    if (!result.converged && state.iteration >= config.max_iterations) {
        std::ostringstream msg;
        msg << "NonConvergence: |xi - 1| = " << std::abs(current.xi - 1.0) << " after " << state.iteration
            << " iterations";
        result.warnings.push_back(msg.str());
    }
    const int clamped = count_clamped(state.thickness, config.bounds);
    if (clamped > 0.9 * static_cast<double>(state.thickness.size()))
        result.warnings.push_back("BoundsSaturated: more than 90% of elements sit on a thickness bound");
    if (config.checkpoint_every > 0) save_checkpoint(config.checkpoint_path, state);
    result.xi = current.xi;
    result.objective = current.j;
    result.homogenization = std::move(current.h);
    result.state = std::move(state);
    return result;
}

std::vector<GradientCheck> check_gradient(const TriMesh& mesh, std::span<const double> thickness, const Material& mat,
                                          std::size_t count, unsigned seed, double rel_step) {
    if (thickness.size() != mesh.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "thickness field size does not match triangle count");
    if (!(rel_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
    const auto base = run_homogenization(mesh, thickness, mat);
    const auto grad = sensitivity(base.solutions, thickness);
    std::vector<std::size_t> order(thickness.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), std::mt19937(seed));
    order.resize(std::min(count, order.size()));

    std::vector<double> t(thickness.begin(), thickness.end());
    auto j_at = [&](std::size_t i, double value) {
        const double keep = t[i];
        t[i] = value;
        const double j = objective(run_homogenization(mesh, t, mat).constants);
        t[i] = keep;
        return j;
    };
    std::vector<GradientCheck> out;
    for (std::size_t i : order) {
        const double h = rel_step * thickness[i];
        GradientCheck c;
        c.element = i;
        c.analytic = grad[i];
        c.finite_difference = (j_at(i, thickness[i] + h) - j_at(i, thickness[i] - h)) / (2.0 * h);
        const double scale = std::max(std::abs(c.analytic), std::numeric_limits<double>::min());
        c.relative_error = std::abs(c.analytic - c.finite_difference) / scale;
        out.push_back(c);
    }
    return out;
}

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << "iter,xi,J,rho_bar,dt,grad_norm,n_clamped\n" << std::setprecision(17);
    for (const auto& r : history)
        out << r.iteration << ',' << r.xi << ',' << r.objective << ',' << r.relative_density << ',' << r.dt << ','
            << r.grad_norm << ',' << r.clamped << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const OptimizationState& state) {
    nlohmann::ordered_json j;
    j["iteration"] = state.iteration;
    j["step_scale"] = state.step_scale;
    j["successes"] = state.successes;
    j["thickness"] = state.thickness;
    auto& h = j["history"] = nlohmann::ordered_json::array();
    for (const auto& r : state.history)
        h.push_back({r.iteration, r.xi, r.objective, r.relative_density, r.dt, r.grad_norm, r.clamped, r.accepted});
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
        // max_digits10 through the default dump keeps doubles bit-exact
        out << j.dump();
    }
    std::filesystem::rename(tmp, path);
}

OptimizationState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    try {
        const auto j = nlohmann::json::parse(in);
        OptimizationState s;
        s.iteration = j.at("iteration").get<int>();
        s.step_scale = j.at("step_scale").get<double>();
        s.successes = j.at("successes").get<int>();
        s.thickness = j.at("thickness").get<std::vector<double>>();
        for (const auto& r : j.at("history")) {
            HistoryRow row;
            row.iteration = r.at(0).get<int>();
            row.xi = r.at(1).get<double>();
            row.objective = r.at(2).get<double>();
            row.relative_density = r.at(3).get<double>();
            row.dt = r.at(4).get<double>();
            row.grad_norm = r.at(5).get<double>();
            row.clamped = r.at(6).get<int>();
            row.accepted = r.at(7).get<bool>();
            s.history.push_back(row);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedFile, path.string() + ": " + e.what());
    }
}

} // namespace isoshell
