#pragma once

#include "config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace isoshell::cli {

struct MeshArgs {
    bool ascii = false;
};

struct HomogArgs {
    std::string mesh, thickness;
    bool check_hill = false;
    bool dump_solution = false;
};

struct OptimizeArgs {
    std::string thickness, resume;
    int fd_check = 0;
};

struct ThickenArgs {
    std::string mesh, thickness;
    bool ascii = false;
};

struct PostArgs {
    std::vector<std::string> files, labels;
    std::optional<double> height, area, density, machine_stiffness, fit_fraction;
};

struct ReportArgs {
    std::vector<std::string> runs;
};

// Each returns the process exit code; errors propagate as isoshell::Error.
int cmd_mesh(const RunConfig& c, const MeshArgs& a);
int cmd_homog(const RunConfig& c, const HomogArgs& a);
int cmd_optimize(const RunConfig& c, const OptimizeArgs& a);
int cmd_thicken(const RunConfig& c, const ThickenArgs& a);
int cmd_post(RunConfig c, const PostArgs& a);
int cmd_report(const RunConfig& c, const ReportArgs& a);

/// {"thickness": [...]} with round-trip precision.
void write_thickness(const std::filesystem::path& path, std::span<const double> t);
std::vector<double> read_thickness(const std::filesystem::path& path);

} // namespace isoshell::cli
