#pragma once

#include "isoshell/implicit_surface.hpp"
#include "isoshell/mesher.hpp"
#include "isoshell/optimize.hpp"
#include "isoshell/shell_element.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>

namespace isoshell::cli {

using json = nlohmann::ordered_json;

/// Everything a run depends on. Thickness values are stored as ratios of the cell size D.
struct RunConfig {
    json surface = {{"preset", "iwp"}}; // {"preset": name} or {"name": ..., "terms": [...]}
    CellSpec cell;
    MeshingOptions meshing;
    Material material;
    double initial_ratio = 0.02;
    double min_ratio = 0.01;
    double max_ratio = 0.05;
    double move_limit = 0.02;
    int max_iterations = 500;
    double tolerance = 0.01;
    int checkpoint_every = 10;
    std::filesystem::path output = "out";

    // compression-test metadata for `post`
    double specimen_height = 25.0;
    double specimen_area = 625.0;
    double specimen_density = 0.0;
    double machine_stiffness = 0.0; // N/mm, 0 = rigid
    double fit_fraction = 0.6;

    ImplicitSurface make_surface() const;
    std::string surface_name() const;
    ThicknessBounds bounds() const { return {min_ratio * cell.size, max_ratio * cell.size}; }
    double initial_thickness() const { return initial_ratio * cell.size; }
    OptimizerConfig optimizer() const;
    void validate() const;
};

/// Command-line overrides; unset fields keep the config value.
struct Overrides {
    std::string config_path;
    std::optional<std::string> preset, domain, output;
    std::optional<double> size, youngs, poisson, initial_ratio, min_ratio, max_ratio, tolerance, move_limit;
    std::optional<int> resolution, max_iterations, checkpoint_every;
    std::vector<int> tiles;
};

RunConfig from_json(const json& j);
json to_json(const RunConfig& c);

/// Defaults, then the config file (if any), then the flags.
RunConfig resolve(const Overrides& o);

/// Writes "<command>.config.json" in the output directory.
void write_resolved(const RunConfig& c, const std::string& command);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

} // namespace isoshell::cli
