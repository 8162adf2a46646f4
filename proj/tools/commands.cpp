#include "commands.hpp"

#include "svg.hpp"

#include "isoshell/error.hpp"
#include "isoshell/homogenize.hpp"
#include "isoshell/mesh_io.hpp"
#include "isoshell/postprocess.hpp"
#include "isoshell/thicken.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace isoshell::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) throw Error(ErrorKind::Io, std::string(what) + " not found: " + path);
}

TriMesh eighth_cell(const RunConfig& c, const std::string& mesh_path) {
    if (!mesh_path.empty()) {
        require_file(mesh_path, "mesh file");
        return load_mesh(mesh_path);
    }
    CellSpec spec = c.cell;
    spec.domain = Domain::Eighth;
    return build_cell_mesh(c.make_surface(), spec, c.meshing);
}

std::vector<double> thickness_for(const RunConfig& c, const TriMesh& mesh, const std::string& path) {
    if (path.empty()) return std::vector<double>(mesh.num_triangles(), c.initial_thickness());
    require_file(path, "thickness file");
    auto t = read_thickness(path);
    if (t.size() != mesh.num_triangles())
        throw Error(ErrorKind::InvalidArgument, "thickness file has " + std::to_string(t.size()) +
                                                    " entries for a mesh with " +
                                                    std::to_string(mesh.num_triangles()) + " triangles");
    return t;
}

json moduli_json(const RunConfig& c, const TriMesh& mesh, const HomogenizationResult& h, bool hill) {
    const auto report = engineering_moduli(h.constants, h.relative_density, c.material);
    const auto hs = hs_upper_bounds(h.relative_density, c.material);
    const double scale = h.relative_density * c.material.youngs;
    json j;
    j["surface"] = c.surface_name();
    j["resolution"] = c.meshing.resolution;
    j["triangles"] = mesh.num_triangles();
    j["material"] = {{"youngs", c.material.youngs}, {"poisson", c.material.poisson}};
    j["moduli"] = json::parse(to_json(report));
    j["hs_upper_bounds_normalized"] = {{"E", hs.youngs / scale}, {"G", hs.shear / scale}, {"K", hs.bulk / scale}};
    j["checks"] = {{"cross_check_residual", h.cross_check_residual}};
    if (hill) j["checks"]["hill_residual"] = h.hill_residual;
    j["warnings"] = h.warnings;
    return j;
}

void write_moduli(const RunConfig& c, const json& j, const HomogenizationResult& h) {
    write_json(c.output / "moduli.json", j);
    std::ofstream csv(c.output / "moduli.csv");
    if (!csv) throw Error(ErrorKind::Io, "cannot write moduli.csv");
    csv << csv_header() << '\n' << csv_row(engineering_moduli(h.constants, h.relative_density, c.material)) << '\n';
}

void print_moduli(const json& j) {
    const auto& m = j.at("moduli");
    std::printf("rho_bar %.6g  zener %.6g  E/rhoEs %.6g  G/rhoEs %.6g  K/rhoEs %.6g\n",
                m.at("relative_density").get<double>(), m.at("zener").get<double>(),
                m.at("E_normalized").get<double>(), m.at("G_normalized").get<double>(),
                m.at("K_normalized").get<double>());
}

std::vector<double> to_vector(const Vector6& v) { return {v.data(), v.data() + 6}; }

} // namespace

void write_thickness(const fs::path& path, std::span<const double> t) {
    write_json(path, json{{"thickness", std::vector<double>(t.begin(), t.end())}});
}

std::vector<double> read_thickness(const fs::path& path) {
    const auto j = read_json(path);
    try {
        return j.at("thickness").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
    }
}

int cmd_mesh(const RunConfig& c, const MeshArgs& a) {
    write_resolved(c, "mesh");
    const TriMesh m = build_cell_mesh(c.make_surface(), c.cell, c.meshing);
    const auto stl = c.output / (c.surface_name() + "_" + to_string(c.cell.domain) + ".stl");
    save_mesh(m, stl, a.ascii ? StlFormat::Ascii : StlFormat::Binary);
    const Vec3 extent = m.box_max - m.box_min;
    std::printf("%s: %zu triangles, %zu vertices, area %.6g mm^2, box %.6g x %.6g x %.6g mm\n", stl.string().c_str(),
                m.num_triangles(), m.num_vertices(), total_area(m), extent.x(), extent.y(), extent.z());
    return 0;
}

int cmd_homog(const RunConfig& c, const HomogArgs& a) {
    const TriMesh mesh = eighth_cell(c, a.mesh);
    const auto t = thickness_for(c, mesh, a.thickness);
    write_resolved(c, "homog");
    const auto h = run_homogenization(mesh, t, c.material);
    const json j = moduli_json(c, mesh, h, a.check_hill);
    write_moduli(c, j, h);
    print_moduli(j);
    std::printf("cross-check residual %.3e", h.cross_check_residual);
    if (a.check_hill) std::printf("  hill residual %.3e", h.hill_residual);
    std::printf("\n");
    for (const auto& w : h.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (a.dump_solution) {
        json cases = json::array();
        for (const auto& s : h.solutions) {
            cases.push_back({{"kind", to_string(s.kind)},
                             {"e_total", s.e_total},
                             {"external_work", s.external_work},
                             {"sigma_macro", to_vector(s.sigma_macro)},
                             {"sigma_micro", to_vector(s.sigma_micro_avg)},
                             {"e_membrane", s.e_membrane},
                             {"e_bending", s.e_bending},
                             {"displacements", std::vector<double>(s.displacements.data(),
                                                                   s.displacements.data() + s.displacements.size())}});
        }
        write_json(c.output / "solution.json", json{{"dofs_per_node", kDofsPerNode}, {"cases", cases}});
    }
    return 0;
}

int cmd_optimize(const RunConfig& c, const OptimizeArgs& a) {
    const TriMesh mesh = eighth_cell(c, "");
    std::optional<OptimizationState> resume;
    if (!a.resume.empty()) {
        require_file(a.resume, "checkpoint");
        resume = load_checkpoint(a.resume);
    }
    const auto t0 = resume ? resume->thickness : thickness_for(c, mesh, a.thickness);
    write_resolved(c, "optimize");

    if (a.fd_check > 0) {
        bool ok = true;
        for (const auto& g : check_gradient(mesh, t0, c.material, static_cast<std::size_t>(a.fd_check))) {
            std::printf("fd-check element %zu analytic %.9e fd %.9e rel %.2e\n", g.element, g.analytic,
                        g.finite_difference, g.relative_error);
            ok = ok && g.relative_error < kGradientTolerance;
        }
        if (!ok) {
            std::fprintf(stderr, "error: analytic gradient disagrees with finite differences beyond %.0e\n",
                         kGradientTolerance);
            return 1;
        }
    }

    const auto progress = [](const HistoryRow& r) {
        std::printf("iter %4d  xi %.6f  J %.3e  rho %.5f  dt %.3e  clamped %d%s\n", r.iteration, r.xi, r.objective,
                    r.relative_density, r.dt, r.clamped, r.accepted ? "" : "  (rejected)");
        std::fflush(stdout);
    };
    const auto result = optimize_isotropy(mesh, t0, c.material, c.optimizer(), resume ? &*resume : nullptr, progress);
    write_thickness(c.output / "thickness.json", result.state.thickness);
    write_history_csv(c.output / "history.csv", result.state.history);
    json j = moduli_json(c, mesh, result.homogenization, true);
    j["optimizer"] = {{"converged", result.converged}, {"iterations", result.state.iteration}, {"xi", result.xi}};
    for (const auto& w : result.warnings) j["warnings"].push_back(w);
    write_moduli(c, j, result.homogenization);
    print_moduli(j);
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    return result.converged ? 0 : 1;
}

int cmd_thicken(const RunConfig& c, const ThickenArgs& a) {
    const TriMesh eighth = eighth_cell(c, a.mesh);
    const auto t8 = thickness_for(c, eighth, a.thickness);
    write_resolved(c, "thicken");
    TriMesh mesh;
    std::vector<double> t;
    switch (c.cell.domain) {
        case Domain::Fundamental:
            throw Error(ErrorKind::InvalidArgument, "thicken works on eighth, unit or tiled domains");
        case Domain::Eighth:
            mesh = eighth;
            t = t8;
            break;
        case Domain::Unit:
        case Domain::Tiled:
            mesh = mirror_expand(eighth, Domain::Unit);
            t = pull_back(mesh, t8);
            if (c.cell.domain == Domain::Tiled) {
                TriMesh tiled = tile(mesh, c.cell.tiles[0], c.cell.tiles[1], c.cell.tiles[2]);
                t = pull_back(tiled, t);
                mesh = std::move(tiled);
            }
            break;
    }
    // level-set normals when the mesh comes from the configured surface
    const auto normals = a.mesh.empty() ? surface_normals(mesh, c.make_surface()) : vertex_normals(mesh);
    const SolidMesh solid = offset_shell(mesh, nodal_thickness(mesh, t), normals);
    const auto stl = c.output / "solid.stl";
    export_solid(solid, stl, a.ascii ? StlFormat::Ascii : StlFormat::Binary);
    const auto metrics = solid_metrics(solid, mesh, t);
    save_metrics(metrics, c.output / "solid.metrics.json");
    std::printf("%s: %zu triangles, volume %.6g mm^3 (shell estimate %.6g), rho_bar %.5f\n", stl.string().c_str(),
                metrics.triangles, metrics.volume, metrics.shell_volume, metrics.relative_density);
    return 0;
}

int cmd_post(RunConfig c, const PostArgs& a) {
    if (a.height) c.specimen_height = *a.height;
    if (a.area) c.specimen_area = *a.area;
    if (a.density) c.specimen_density = *a.density;
    if (a.machine_stiffness) c.machine_stiffness = *a.machine_stiffness;
    if (a.fit_fraction) c.fit_fraction = *a.fit_fraction;
    c.validate();
    if (!(c.specimen_density > 0.0 && c.specimen_density < 1.0))
        throw Error(ErrorKind::InvalidArgument, "post needs the relative density (--rho) in (0, 1)");
    if (!a.labels.empty() && a.labels.size() != a.files.size())
        throw Error(ErrorKind::InvalidArgument, "give one --label per curve file or none");
    for (const auto& f : a.files) require_file(f, "curve file");
    write_resolved(c, "post");

    json curves = json::array();
    std::map<std::string, DirectionReport> reports;
    bool all_moduli = true;
    for (std::size_t k = 0; k < a.files.size(); ++k) {
        const std::string label = a.labels.empty() ? fs::path(a.files[k]).stem().string() : a.labels[k];
        CurveMeta meta{c.specimen_height, c.specimen_area, c.specimen_density, label};
        const auto curve = load_curve(a.files[k], meta);
        const auto eff = efficiency_and_densification(curve);
        const double plateau = plateau_stress(curve);
        const double sea = specific_energy_absorption(curve, eff.densification_strain);
        json entry = {{"file", a.files[k]},
                      {"direction", label},
                      {"plateau_stress_normalized", plateau},
                      {"densification_strain", eff.densification_strain},
                      {"max_efficiency", eff.eta[eff.densification_index]},
                      {"specific_energy_absorption", sea}};
        DirectionReport rep{0.0, plateau, sea};
        try {
            const auto slope = unload_slope(curve, c.fit_fraction);
            const double km = c.machine_stiffness > 0.0 ? c.machine_stiffness : kRigidMachine;
            rep.modulus = corrected_modulus(slope.value, km, c.specimen_height, c.specimen_area);
            entry["unload_slope"] = {{"value", slope.value},
                                     {"window", {slope.window_lo, slope.window_hi}},
                                     {"r2", slope.r2}};
            entry["modulus"] = rep.modulus;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientRange) throw;
            entry["modulus"] = nullptr;
            entry["modulus_note"] = e.what();
            all_moduli = false;
        }
        entry["warnings"] = curve.warnings;
        curves.push_back(entry);
        reports[label] = rep;

        std::ofstream table(c.output / (label + "_eta.csv"));
        if (!table) throw Error(ErrorKind::Io, "cannot write efficiency table for " + label);
        table << "strain,stress,eta\n" << std::setprecision(17);
        for (std::size_t i = 0; i < eff.strain.size(); ++i)
            table << eff.strain[i] << ',' << eff.stress[i] << ',' << eff.eta[i] << '\n';
        write_plot(c.output / (label + "_stress.svg"), "Stress-strain " + label, "strain", "stress (MPa)",
                   {{label, curve.strain, curve.stress}});
        write_plot(c.output / (label + "_eta.svg"), "Energy absorption efficiency " + label, "strain", "eta",
                   {{label, eff.strain, eff.eta}});
        std::printf("%s: sigma_p %.6g  eps_d %.6g  psi %.6g  E %s\n", label.c_str(), plateau,
                    eff.densification_strain, sea,
                    entry["modulus"].is_null() ? "n/a" : std::to_string(rep.modulus).c_str());
    }
    json out = {{"curves", curves}};
    if (reports.size() >= 2) {
        if (!all_moduli)
            for (auto& [label, r] : reports) r.modulus = 1.0;
        const auto s = anisotropy_summary(reports);
        auto ratio = [](const Ratio& r) { return json{{"value", r.value}, {"max", r.max_label}, {"min", r.min_label}}; };
        out["anisotropy"] = {{"plateau_stress", ratio(s.plateau)}, {"sea", ratio(s.sea)}};
        if (all_moduli) out["anisotropy"]["modulus"] = ratio(s.modulus);
    }
    write_json(c.output / "post_report.json", out);
    return 0;
}

int cmd_report(const RunConfig& c, const ReportArgs& a) {
    for (const auto& r : a.runs) require_file((fs::path(r) / "moduli.json").string(), "run report");
    write_resolved(c, "report");
    std::ofstream csv(c.output / "report.csv");
    if (!csv) throw Error(ErrorKind::Io, "cannot write report.csv");
    csv << "run,surface,rho_bar,zener,E_norm,G_norm,K_norm,E_hs_norm,G_hs_norm,K_hs_norm\n" << std::setprecision(17);
    const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::vector<Series> series;
    double rho_max = 0.0;
    Material mat;
    for (std::size_t k = 0; k < a.runs.size(); ++k) {
        const auto j = read_json(fs::path(a.runs[k]) / "moduli.json");
        try {
            const auto& m = j.at("moduli");
            mat.youngs = j.at("material").at("youngs").get<double>();
            mat.poisson = j.at("material").at("poisson").get<double>();
            const double rho = m.at("relative_density").get<double>();
            const auto hs = hs_upper_bounds(rho, mat);
            const double scale = rho * mat.youngs;
            const double e = m.at("E_normalized").get<double>(), k_ = m.at("K_normalized").get<double>();
            csv << a.runs[k] << ',' << j.at("surface").get<std::string>() << ',' << rho << ','
                << m.at("zener").get<double>() << ',' << e << ',' << m.at("G_normalized").get<double>() << ',' << k_
                << ',' << hs.youngs / scale << ',' << hs.shear / scale << ',' << hs.bulk / scale << '\n';
            series.push_back({fs::path(a.runs[k]).filename().string() + " (" + j.at("surface").get<std::string>() + ")",
                              {k_}, {e}, true, colors[k % colors.size()]});
            rho_max = std::max(rho_max, rho);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::SchemaError, a.runs[k] + "/moduli.json: " + e.what());
        }
    }
    // HS upper bound traced over relative density, in the same normalized axes
    Series hs{"HS upper bound", {}, {}, false, "#555555"};
    for (int i = 1; i <= 50; ++i) {
        const double rho = std::max(rho_max, 0.05) * i / 50.0;
        const auto b = hs_upper_bounds(rho, mat);
        hs.x.push_back(b.bulk / (rho * mat.youngs));
        hs.y.push_back(b.youngs / (rho * mat.youngs));
    }
    series.insert(series.begin(), hs);
    write_plot(c.output / "report.svg", "Normalized moduli against the HS upper bound", "K / (rho Es)",
               "E / (rho Es)", series);
    std::printf("%zu runs written to %s\n", a.runs.size(), (c.output / "report.csv").string().c_str());
    return 0;
}

} // namespace isoshell::cli
