#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace isoshell::cli {

struct Series {
    std::string label;
    std::vector<double> x, y;
    bool markers = false; // scatter points instead of a polyline
    std::string color = "#1f77b4";
};

/// Single-panel x-y plot with linear axes, tick labels and a legend.
std::string render_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                        const std::vector<Series>& series);

void write_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                const std::string& ylabel, const std::vector<Series>& series);

} // namespace isoshell::cli
