#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trajflow/array.hpp"
#include "trajflow/maze.hpp"

namespace trajflow {

// Minimal deterministic SVG output: enough to eyeball loss curves, error
// versus step count, and sampled paths on the maze. Labels are XML-escaped;
// files are well-formed standalone SVG.

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series, bool log_x = false);

// Occupancy grid with trajectories drawn over it; the first trajectory is
// highlighted (ground truth), the rest are samples.
void write_maze_overlay_svg(const std::string& path, const MazeSpec& maze,
                            const std::vector<Array>& trajs);

}  // namespace trajflow
