#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trajflow/dataset.hpp"
#include "trajflow/rng.hpp"

namespace trajflow {

// U-shaped corridor around a center block: any route between the arm bottoms
// must travel up, across and back down.
extern const char* const kUMaze;

// Occupancy grid parsed from text ('#' wall, '.' free, 'S' allowed start,
// 'G' allowed goal). World coordinates put cell (r, c)'s center at
// ((c + 0.5) * cell_size, (r + 0.5) * cell_size); out-of-bounds space counts
// as wall.
struct MazeSpec {
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint8_t> occ;  // row-major, 1 = wall
    double cell_size = 1.0;
    std::vector<std::size_t> starts, goals;  // flat indices; empty = any free cell

    static MazeSpec parse(const std::string& text, double cell_size = 1.0);
    static MazeSpec load_file(const std::string& path, double cell_size = 1.0);

    std::size_t index(std::size_t r, std::size_t c) const { return r * cols + c; }
    bool occupied(long r, long c) const;
    std::pair<double, double> center(std::size_t cell) const;
    std::vector<std::size_t> free_cells() const;
};

// Every cell a segment touches, including cells met only at an edge or corner
// (conservative).
std::vector<std::pair<long, long>> supercover_cells(double x0, double y0, double x1, double y1,
                                                    double cell_size);

bool segment_collides(const MazeSpec& maze, double x0, double y0, double x1, double y1);

// Number of leading trajectory steps reachable without touching a wall: H if
// the whole path is clear, 0 if the start itself is blocked.
std::size_t collision_free_prefix(const MazeSpec& maze, const Array& traj);
bool trajectory_collides(const MazeSpec& maze, const Array& traj);

// 4-connected BFS shortest path, as flat cell indices; empty if unreachable.
std::vector<std::size_t> shortest_path_cells(const MazeSpec& maze, std::size_t from,
                                             std::size_t to);

std::vector<std::pair<double, double>> chaikin_smooth(
    const std::vector<std::pair<double, double>>& pts, int rounds);

// Uniform arc-length resampling to `count` points (count >= 2); a zero-length
// polyline yields `count` copies of its first point.
std::vector<std::pair<double, double>> resample_polyline(
    const std::vector<std::pair<double, double>>& pts, int count);

// Shortest route between two cells as a smoothed, collision-free, H-point
// trajectory. Throws GenerationError when the cells are not connected.
Array maze_route_trajectory(const MazeSpec& maze, std::size_t from, std::size_t to, int horizon,
                            double jitter_x = 0.0, double jitter_y = 0.0);

// n trajectories between random (start, goal) cells with jittered endpoints;
// context is (first state, goal state). The dataset comes back finalized.
TrajectoryDataset generate_maze_dataset(const MazeSpec& maze, std::size_t n, int horizon,
                                        const SeededRng& rng);

}  // namespace trajflow
