#include "isoshell/error.hpp"
#include "isoshell/mesher.hpp"
#include "isoshell/optimize.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

using namespace isoshell;

namespace {

const Material steel{190e3, 0.3};

const TriMesh& coarse_iwp() {
    static const TriMesh m = [] {
        CellSpec spec;
        spec.size = 2.0;
        spec.domain = Domain::Eighth;
        MeshingOptions opt;
        opt.resolution = 12;
        return build_cell_mesh(make_preset("iwp", 2.0), spec, opt);
    }();
    return m;
}

std::vector<double> uniform(const TriMesh& m, double t = 2.0 / 50) { return std::vector<double>(m.num_triangles(), t); }

double objective_at(const TriMesh& m, const std::vector<double>& t) {
    return objective(run_homogenization(m, t, steel).constants);
}

// A non-uniform, symmetric start so the gradient is not dominated by one pattern.
std::vector<double> wavy(const TriMesh& m) {
    std::vector<double> t(m.num_triangles());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.04 * (1.0 + 0.3 * std::sin(0.7 * m.domain_map[i].source));
    return t;
}

} // namespace

TEST(Sensitivity, PureMembraneElement) {
    LoadCaseSolution s;
    s.e_membrane = {2.0, 0.0};
    s.e_bending = {0.0, 0.0};
    const std::vector<double> t = {0.5, 0.1};
    const auto g = energy_sensitivity(s, t);
    EXPECT_DOUBLE_EQ(g[0], 4.0);
    EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(Sensitivity, BendingCountsThreeTimes) {
    LoadCaseSolution s;
    s.e_membrane = {1.0};
    s.e_bending = {1.0};
    const std::vector<double> t = {2.0};
    EXPECT_DOUBLE_EQ(energy_sensitivity(s, t)[0], 2.0);
}

TEST(Sensitivity, MissingSplitIsReported) {
    LoadCaseSolution s;
    const std::vector<double> t = {1.0, 1.0};
    try {
        energy_sensitivity(s, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingEnergySplit);
    }
}

TEST(Sensitivity, EnergyGradientMatchesFiniteDifferences) {
    const auto& m = coarse_iwp();
    ASSERT_LE(m.num_triangles(), 2000u);
    const auto t = wavy(m);
    const auto base = run_homogenization(m, t, steel);
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, m.num_triangles() - 1);
    for (int k = 0; k < 12; ++k) {
        const std::size_t i = pick(rng);
        const double h = 1e-5 * t[i];
        auto tp = t, tm = t;
        tp[i] += h;
        tm[i] -= h;
        const auto p = run_homogenization(m, tp, steel), q = run_homogenization(m, tm, steel);
        for (int c = 0; c < 3; ++c) {
            const auto& s = base.solutions[c];
            if (s.e_membrane[i] + s.e_bending[i] < 1e-12 * s.e_total) continue;
            const double fd = (p.solutions[c].e_total - q.solutions[c].e_total) / (2 * h);
            const double an = energy_sensitivity(s, t)[i];
            EXPECT_NEAR(an, fd, 1e-4 * std::abs(an)) << "element " << i << " case " << c;
        }
    }
}

TEST(Sensitivity, ObjectiveGradientMatchesFiniteDifferences) {
    const auto& m = coarse_iwp();
    const auto t = wavy(m);
    const auto base = run_homogenization(m, t, steel);
    const auto g = sensitivity(base.solutions, t);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, m.num_triangles() - 1);
    int checked = 0;
    for (int k = 0; k < 50; ++k) {
        const std::size_t i = pick(rng);
        const double h = 1e-5 * t[i];
        auto tp = t, tm = t;
        tp[i] += h;
        tm[i] -= h;
        const double fd = (objective_at(m, tp) - objective_at(m, tm)) / (2 * h);
        EXPECT_NEAR(g[i], fd, 1e-4 * std::abs(g[i])) << "element " << i;
        ++checked;
    }
    EXPECT_EQ(checked, 50);
}

TEST(Sensitivity, LibraryCheckPicksDistinctElements) {
    const auto& m = coarse_iwp();
    const auto t = wavy(m);
    const auto checks = check_gradient(m, t, steel, 6, 3);
    ASSERT_EQ(checks.size(), 6u);
    std::set<std::size_t> seen;
    for (const auto& c : checks) {
        seen.insert(c.element);
        EXPECT_LT(c.relative_error, kGradientTolerance) << "element " << c.element;
    }
    EXPECT_EQ(seen.size(), 6u);
}

TEST(SymmetryAverage, MeanOverCopies) {
    const auto& m = coarse_iwp();
    std::vector<double> f(m.num_triangles());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = m.domain_map[i].copy;
    for (double v : symmetry_average(f, m)) EXPECT_DOUBLE_EQ(v, 3.5);
    const auto same = symmetry_average(uniform(m, 0.25), m);
    for (double v : same) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(SymmetryAverage, RequiresDomainMap) {
    TriMesh m = coarse_iwp();
    m.domain_map.clear();
    try {
        symmetry_average(uniform(m), m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingDomainMap);
    }
}

TEST(DescentStep, ZeroGradientAndClamping) {
    const ThicknessBounds b{0.02, 0.1};
    const std::vector<double> t = {0.05, 0.03, 0.09};
    const std::vector<double> zero(3, 0.0);
    EXPECT_EQ(descent_step(t, zero, 1.0, b), t);
    const auto s = descent_step(t, std::vector<double>{0.0, 1.0, -1.0}, 0.05, b);
    EXPECT_EQ(s[1], 0.02);
    EXPECT_EQ(s[2], 0.1);
    EXPECT_THROW(descent_step(t, zero, 0.0, b), Error);
}

TEST(DescentStep, ProjectionDropsInfeasibleDirections) {
    const ThicknessBounds b{0.02, 0.1};
    const std::vector<double> t = {0.02, 0.1, 0.02, 0.05};
    const auto g = project_gradient(t, std::vector<double>{1.0, -1.0, -1.0, 1.0}, b);
    EXPECT_EQ(g, (std::vector<double>{0.0, 0.0, -1.0, 1.0}));
}

TEST(DescentStep, SmallStepLowersObjective) {
    const auto& m = coarse_iwp();
    const auto t = uniform(m);
    const ThicknessBounds b{0.02, 0.1};
    const auto base = run_homogenization(m, t, steel);
    const double j0 = objective(base.constants);
    const auto g = symmetry_average(sensitivity(base.solutions, t), m);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    double dt = 0.02 * (b.max - b.min) / gmax;
    double j1 = j0;
    for (int halving = 0; halving < 20 && j1 >= j0; ++halving, dt *= 0.5) {
        const auto next = descent_step(t, g, dt, b);
        ASSERT_TRUE(std::all_of(next.begin(), next.end(), [&](double v) { return v > b.min && v < b.max; }));
        j1 = objective_at(m, next);
    }
    EXPECT_LT(j1, j0);
}

TEST(Optimizer, AlreadyIsotropicReturnsImmediately) {
    const auto& m = coarse_iwp();
    OptimizerConfig cfg;
    cfg.bounds = {0.02, 0.1};
    cfg.tolerance = 0.5; // uniform IWP sits well inside this
    const auto r = optimize_isotropy(m, uniform(m), steel, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.state.iteration, 0);
    EXPECT_EQ(r.state.history.size(), 1u);
}

TEST(Optimizer, KeepsSymmetryBoundsAndObjectiveDefinition) {
    const auto& m = coarse_iwp();
    OptimizerConfig cfg;
    cfg.bounds = {0.01, 0.1};
    cfg.max_iterations = 10;
    cfg.tolerance = 1e-9; // force all ten iterations
    const auto r = optimize_isotropy(m, uniform(m), steel, cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.state.iteration, 10);
    EXPECT_FALSE(r.warnings.empty());
    std::map<int, std::pair<double, double>> range;
    for (std::size_t i = 0; i < m.num_triangles(); ++i) {
        const double v = r.state.thickness[i];
        EXPECT_GE(v, cfg.bounds.min);
        EXPECT_LE(v, cfg.bounds.max);
        auto [it, fresh] = range.try_emplace(m.domain_map[i].source, v, v);
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
    }
    for (const auto& [source, mm] : range) EXPECT_EQ(mm.first, mm.second) << source;
    const double j = 0.5 * std::pow(zener(r.homogenization.constants) - 1.0, 2);
    EXPECT_NEAR(j, r.objective, 1e-14);
    // accepted steps never raise J
    double last = r.state.history.front().objective;
    for (const auto& row : r.state.history) {
        EXPECT_LE(row.objective, last);
        last = row.objective;
    }
    EXPECT_LT(r.objective, r.state.history.front().objective);
}

TEST(Optimizer, ConvergesOnCoarseIwp) {
    const auto& m = coarse_iwp();
    OptimizerConfig cfg;
    cfg.bounds = {0.02, 0.1};
    const auto r = optimize_isotropy(m, uniform(m), steel, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(std::abs(r.xi - 1.0), 0.01);
}

TEST(Optimizer, ResumeReproducesUninterruptedRun) {
    const auto& m = coarse_iwp();
    const auto dir = std::filesystem::temp_directory_path() / "isoshell_opt_resume";
    std::filesystem::create_directories(dir);
    OptimizerConfig cfg;
    cfg.bounds = {0.01, 0.1};
    cfg.tolerance = 1e-9;
    cfg.max_iterations = 6;
    const auto full = optimize_isotropy(m, uniform(m), steel, cfg);

    cfg.max_iterations = 3;
    cfg.checkpoint_every = 3;
    cfg.checkpoint_path = dir / "state.json";
    optimize_isotropy(m, uniform(m), steel, cfg);
    const auto saved = load_checkpoint(cfg.checkpoint_path);
    EXPECT_EQ(saved.iteration, 3);
    cfg.max_iterations = 6;
    cfg.checkpoint_every = 0;
    const auto resumed = optimize_isotropy(m, {}, steel, cfg, &saved);
    EXPECT_EQ(resumed.state.thickness, full.state.thickness);
    EXPECT_EQ(resumed.xi, full.xi);
    EXPECT_EQ(resumed.state.history.size(), full.state.history.size());

    write_history_csv(dir / "history.csv", resumed.state.history);
    std::ifstream in(dir / "history.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "iter,xi,J,rho_bar,dt,grad_norm,n_clamped");
    std::filesystem::remove_all(dir);
}

TEST(Optimizer, RejectsBadConfiguration) {
    const auto& m = coarse_iwp();
    OptimizerConfig cfg;
    cfg.bounds = {0.05, 0.02};
    EXPECT_THROW(optimize_isotropy(m, uniform(m), steel, cfg), Error);
    cfg.bounds = {0.05, 0.1};
    EXPECT_THROW(optimize_isotropy(m, uniform(m, 0.04), steel, cfg), Error); // start outside bounds
}
