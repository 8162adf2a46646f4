#include "commands.hpp"

#include "isoshell/error.hpp"

#include <CLI11.hpp>

#include <cstdio>

using namespace isoshell;
using namespace isoshell::cli;

namespace {

// Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::SchemaError:
        case ErrorKind::Io:
        case ErrorKind::MalformedFile:
        case ErrorKind::UnderResolved:
            return 2;
        default:
            return 1;
    }
}

void add_config_options(CLI::App* sub, Overrides& o) {
    sub->add_option("-c,--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.output, "Output directory");
    sub->add_option("--preset", o.preset, "Surface preset (iwp, frd, n)");
    sub->add_option("--size", o.size, "Cell size D in mm");
    sub->add_option("--domain", o.domain, "fundamental, eighth, unit or tiled");
    sub->add_option("--tile", o.tiles, "Tile counts nx ny nz")->expected(3);
    sub->add_option("-r,--resolution", o.resolution, "Grid cells along D/2");
    sub->add_option("--youngs", o.youngs, "Solid Young's modulus in MPa");
    sub->add_option("--poisson", o.poisson, "Solid Poisson ratio");
    sub->add_option("--thickness-ratio", o.initial_ratio, "Uniform thickness over D");
    sub->add_option("--min-ratio", o.min_ratio, "Lower thickness bound over D");
    sub->add_option("--max-ratio", o.max_ratio, "Upper thickness bound over D");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shell-lattice homogenization, isotropy optimization, solid export and compression analytics"};
    app.require_subcommand(1);
    Overrides o;

    auto* mesh = app.add_subcommand("mesh", "Mesh a nodal surface on the configured domain");
    add_config_options(mesh, o);
    MeshArgs mesh_args;
    mesh->add_flag("--ascii", mesh_args.ascii, "Write ASCII STL");

    auto* homog = app.add_subcommand("homog", "Homogenize the eighth cell and report moduli");
    add_config_options(homog, o);
    HomogArgs homog_args;
    homog->add_option("--mesh", homog_args.mesh, "Eighth-cell STL with sidecar instead of meshing");
    homog->add_option("--thickness", homog_args.thickness, "Per-element thickness JSON");
    homog->add_flag("--check-hill", homog_args.check_hill, "Report the end-face vs volume-average stress residual");
    homog->add_flag("--dump-solution", homog_args.dump_solution, "Write displacements and energies");

    auto* optimize = app.add_subcommand("optimize", "Optimize shell thickness toward elastic isotropy");
    add_config_options(optimize, o);
    OptimizeArgs opt_args;
    optimize->add_option("--thickness", opt_args.thickness, "Starting thickness JSON");
    optimize->add_option("--resume", opt_args.resume, "Checkpoint to continue from");
    optimize->add_option("--fd-check", opt_args.fd_check, "Verify N gradient entries by finite differences first");
    optimize->add_option("--tolerance", o.tolerance, "Stop when |xi - 1| is below this");
    optimize->add_option("--max-iterations", o.max_iterations, "Iteration cap");
    optimize->add_option("--move-limit", o.move_limit, "Largest step as a fraction of the bound range");
    optimize->add_option("--checkpoint-every", o.checkpoint_every, "Checkpoint interval (0 = off)");

    auto* thicken = app.add_subcommand("thicken", "Offset the mid-surface into a watertight solid STL");
    add_config_options(thicken, o);
    ThickenArgs thicken_args;
    thicken->add_option("--mesh", thicken_args.mesh, "Eighth-cell STL with sidecar instead of meshing");
    thicken->add_option("--thickness", thicken_args.thickness, "Per-element thickness JSON for the eighth cell");
    thicken->add_flag("--ascii", thicken_args.ascii, "Write ASCII STL");

    auto* post = app.add_subcommand("post", "Analyze compression curves");
    add_config_options(post, o);
    PostArgs post_args;
    post->add_option("files", post_args.files, "Curve CSV files")->required()->check(CLI::ExistingFile);
    post->add_option("--label", post_args.labels, "Direction label per file (default: file stem)");
    post->add_option("--height", post_args.height, "Specimen height h in mm");
    post->add_option("--area", post_args.area, "End-face area A0 in mm^2");
    post->add_option("--rho", post_args.density, "Specimen relative density");
    post->add_option("--machine-stiffness", post_args.machine_stiffness, "Machine stiffness in N/mm (0 = rigid)");
    post->add_option("--fit-fraction", post_args.fit_fraction, "Middle fraction of each unload segment to fit");

    auto* report = app.add_subcommand("report", "Compare homog/optimize runs against the HS bounds");
    add_config_options(report, o);
    ReportArgs report_args;
    report->add_option("runs", report_args.runs, "Run output directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const RunConfig config = resolve(o);
        if (mesh->parsed()) return cmd_mesh(config, mesh_args);
        if (homog->parsed()) return cmd_homog(config, homog_args);
        if (optimize->parsed()) return cmd_optimize(config, opt_args);
        if (thicken->parsed()) return cmd_thicken(config, thicken_args);
        if (post->parsed()) return cmd_post(config, post_args);
        if (report->parsed()) return cmd_report(config, report_args);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
