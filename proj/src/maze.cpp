#include "trajflow/maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "trajflow/errors.hpp"

namespace trajflow {

const char* const kUMaze =
    "########\n"
    "#......#\n"
    "#......#\n"
    "#..##..#\n"
    "#..##..#\n"
    "#..##..#\n"
    "########\n";

MazeSpec MazeSpec::parse(const std::string& text, double cell_size) {
    if (cell_size <= 0.0) throw ConfigError("maze: cell_size must be positive");
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw ConfigError("maze: empty grid");

    MazeSpec m;
    m.rows = lines.size();
    m.cols = lines[0].size();
    m.cell_size = cell_size;
    m.occ.assign(m.rows * m.cols, 0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (lines[r].size() != m.cols) {
            throw ConfigError("maze: row " + std::to_string(r + 1) + " has " +
                              std::to_string(lines[r].size()) + " cells, expected " +
                              std::to_string(m.cols));
        }
        for (std::size_t c = 0; c < m.cols; ++c) {
            switch (lines[r][c]) {
                case '#': m.occ[m.index(r, c)] = 1; break;
                case '.': break;
                case 'S': m.starts.push_back(m.index(r, c)); break;
                case 'G': m.goals.push_back(m.index(r, c)); break;
                default:
                    throw ConfigError(std::string("maze: unknown character '") + lines[r][c] +
                                      "' at row " + std::to_string(r + 1) + ", column " +
                                      std::to_string(c + 1));
            }
        }
    }
    if (m.free_cells().empty()) throw ConfigError("maze: no free cells");
    return m;
}

MazeSpec MazeSpec::load_file(const std::string& path, double cell_size) {
    std::ifstream f(path);
    if (!f) throw IoError("maze: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), cell_size);
}

bool MazeSpec::occupied(long r, long c) const {
    if (r < 0 || c < 0 || r >= static_cast<long>(rows) || c >= static_cast<long>(cols))
        return true;
    return occ[index(static_cast<std::size_t>(r), static_cast<std::size_t>(c))] != 0;
}

std::pair<double, double> MazeSpec::center(std::size_t cell) const {
    const std::size_t r = cell / cols, c = cell % cols;
    return {(static_cast<double>(c) + 0.5) * cell_size, (static_cast<double>(r) + 0.5) * cell_size};
}

std::vector<std::size_t> MazeSpec::free_cells() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < occ.size(); ++i)
        if (occ[i] == 0) out.push_back(i);
    return out;
}

namespace {

// Cells containing a point in grid units; points exactly on a grid line
// belong to the cells on both sides.
void cells_at(double u, double v, std::set<std::pair<long, long>>& out) {
    const double fu = std::floor(u), fv = std::floor(v);
    const long cu = static_cast<long>(fu), cv = static_cast<long>(fv);
    const bool on_x = u == fu, on_y = v == fv;
    out.emplace(cv, cu);
    if (on_x) out.emplace(cv, cu - 1);
    if (on_y) out.emplace(cv - 1, cu);
    if (on_x && on_y) out.emplace(cv - 1, cu - 1);
}

}  // namespace

std::vector<std::pair<long, long>> supercover_cells(double x0, double y0, double x1, double y1,
                                                    double cell_size) {
    const double u0 = x0 / cell_size, v0 = y0 / cell_size;
    const double u1 = x1 / cell_size, v1 = y1 / cell_size;

    std::vector<double> ts{0.0, 1.0};
    const double du = u1 - u0, dv = v1 - v0;
    if (du != 0.0) {
        for (long g = static_cast<long>(std::ceil(std::min(u0, u1)));
             g <= static_cast<long>(std::floor(std::max(u0, u1))); ++g) {
            const double t = (static_cast<double>(g) - u0) / du;
            if (t > 0.0 && t < 1.0) ts.push_back(t);
        }
    }
    if (dv != 0.0) {
        for (long g = static_cast<long>(std::ceil(std::min(v0, v1)));
             g <= static_cast<long>(std::floor(std::max(v0, v1))); ++g) {
            const double t = (static_cast<double>(g) - v0) / dv;
            if (t > 0.0 && t < 1.0) ts.push_back(t);
        }
    }
    std::sort(ts.begin(), ts.end());

    std::set<std::pair<long, long>> cells;
    for (double t : ts) cells_at(u0 + t * du, v0 + t * dv, cells);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double tm = 0.5 * (ts[i] + ts[i + 1]);
        cells_at(u0 + tm * du, v0 + tm * dv, cells);
    }
    return {cells.begin(), cells.end()};
}

bool segment_collides(const MazeSpec& maze, double x0, double y0, double x1, double y1) {
    for (const auto& [r, c] : supercover_cells(x0, y0, x1, y1, maze.cell_size))
        if (maze.occupied(r, c)) return true;
    return false;
}

std::size_t collision_free_prefix(const MazeSpec& maze, const Array& traj) {
    if (traj.ndim() != 2 || traj.dim(1) != 2) {
        throw ShapeError("maze: expected an [H x 2] trajectory, got " + shape_str(traj.shape()));
    }
    const std::size_t h = traj.dim(0);
    if (segment_collides(maze, traj.at(0, 0), traj.at(0, 1), traj.at(0, 0), traj.at(0, 1)))
        return 0;
    for (std::size_t i = 0; i + 1 < h; ++i) {
        if (segment_collides(maze, traj.at(i, 0), traj.at(i, 1), traj.at(i + 1, 0),
                             traj.at(i + 1, 1)))
            return i + 1;
    }
    return h;
}

bool trajectory_collides(const MazeSpec& maze, const Array& traj) {
    return collision_free_prefix(maze, traj) < traj.dim(0);
}

std::vector<std::size_t> shortest_path_cells(const MazeSpec& maze, std::size_t from,
                                             std::size_t to) {
    const std::size_t n = maze.rows * maze.cols;
    if (from >= n || to >= n) throw DomainError("maze: cell index out of range");
    if (maze.occ[from] || maze.occ[to]) return {};
    std::vector<std::size_t> parent(n, n);
    std::deque<std::size_t> queue{from};
    parent[from] = from;
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        if (cur == to) break;
        const long r = static_cast<long>(cur / maze.cols), c = static_cast<long>(cur % maze.cols);
        const long nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& [nr, nc] : nbr) {
            if (maze.occupied(nr, nc)) continue;
            const std::size_t ni = maze.index(static_cast<std::size_t>(nr),
                                              static_cast<std::size_t>(nc));
            if (parent[ni] != n) continue;
            parent[ni] = cur;
            queue.push_back(ni);
        }
    }
    if (parent[to] == n) return {};
    std::vector<std::size_t> path{to};
    while (path.back() != from) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::pair<double, double>> chaikin_smooth(
    const std::vector<std::pair<double, double>>& pts, int rounds) {
    std::vector<std::pair<double, double>> cur = pts;
    for (int r = 0; r < rounds && cur.size() > 2; ++r) {
        std::vector<std::pair<double, double>> next{cur.front()};
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            const auto [ax, ay] = cur[i];
            const auto [bx, by] = cur[i + 1];
            next.emplace_back(0.75 * ax + 0.25 * bx, 0.75 * ay + 0.25 * by);
            next.emplace_back(0.25 * ax + 0.75 * bx, 0.25 * ay + 0.75 * by);
        }
        next.push_back(cur.back());
        cur = std::move(next);
    }
    return cur;
}

std::vector<std::pair<double, double>> resample_polyline(
    const std::vector<std::pair<double, double>>& pts, int count) {
    if (pts.empty()) throw UsageError("resample: empty polyline");
    if (count < 2) throw ConfigError("resample: need at least 2 points");
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double dx = pts[i + 1].first - pts[i].first;
        const double dy = pts[i + 1].second - pts[i].second;
        cum.push_back(cum.back() + std::hypot(dx, dy));
    }
    const double total = cum.back();
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(count));
    if (total == 0.0) {
        out.assign(static_cast<std::size_t>(count), pts.front());
        return out;
    }
    std::size_t seg = 0;
    for (int j = 0; j < count; ++j) {
        const double target = total * static_cast<double>(j) / static_cast<double>(count - 1);
        while (seg + 2 < cum.size() && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double w = len > 0.0 ? (target - cum[seg]) / len : 0.0;
        out.emplace_back(pts[seg].first + w * (pts[seg + 1].first - pts[seg].first),
                         pts[seg].second + w * (pts[seg + 1].second - pts[seg].second));
    }
    return out;
}

Array maze_route_trajectory(const MazeSpec& maze, std::size_t from, std::size_t to, int horizon,
                            double jitter_x, double jitter_y) {
    if (horizon < 2) throw ConfigError("maze: horizon must be at least 2");
    const std::size_t h = static_cast<std::size_t>(horizon);

    if (from == to) {
        auto [cx, cy] = maze.center(from);
        Array traj({h, 2});
        for (std::size_t i = 0; i < h; ++i) {
            traj.at(i, 0) = cx + jitter_x;
            traj.at(i, 1) = cy + jitter_y;
        }
        return traj;
    }

    const auto cells = shortest_path_cells(maze, from, to);
    if (cells.empty()) {
        throw GenerationError("maze: cells " + std::to_string(from) + " and " +
                              std::to_string(to) + " are not connected");
    }
    std::vector<std::pair<double, double>> waypoints;
    waypoints.reserve(cells.size());
    for (std::size_t cell : cells) waypoints.push_back(maze.center(cell));

    // Jittered endpoints stay strictly inside their cells, then smoothing with
    // quarter-ratio corner cuts keeps the curve within the route's cells; the
    // collision oracle has the last word, with less smoothing as fallback.
    for (int attempt = 0; attempt < 4; ++attempt) {
        auto pts = waypoints;
        if (attempt < 3) {
            pts.front() = {pts.front().first + jitter_x, pts.front().second + jitter_y};
            pts.back() = {pts.back().first + jitter_x, pts.back().second + jitter_y};
        }
        const int rounds = attempt < 2 ? 2 - attempt : 0;
        auto smooth = resample_polyline(chaikin_smooth(pts, rounds), horizon);
        Array traj({h, 2});
        for (std::size_t i = 0; i < h; ++i) {
            traj.at(i, 0) = smooth[i].first;
            traj.at(i, 1) = smooth[i].second;
        }
        if (!trajectory_collides(maze, traj)) return traj;
    }
    throw GenerationError("maze: could not produce a collision-free route between cells " +
                          std::to_string(from) + " and " + std::to_string(to));
}

TrajectoryDataset generate_maze_dataset(const MazeSpec& maze, std::size_t n, int horizon,
                                        const SeededRng& rng) {
    if (n == 0) throw ConfigError("maze: dataset size must be positive");
    const std::vector<std::size_t> free = maze.free_cells();
    const std::vector<std::size_t>& starts = maze.starts.empty() ? free : maze.starts;
    const std::vector<std::size_t>& goals = maze.goals.empty() ? free : maze.goals;

    TrajectoryDataset ds;
    ds.horizon = horizon;
    ds.state_dim = 2;
    ds.layout = ContextLayout{ContextLayout::Kind::endpoints, 0, 2};

    for (std::size_t i = 0; i < n; ++i) {
        SeededRng item = rng.stream(i);
        Array traj;
        bool done = false;
        for (int attempt = 0; attempt < 32 && !done; ++attempt) {
            const std::size_t from = starts[item.uniform_int(starts.size())];
            const std::size_t to = goals[item.uniform_int(goals.size())];
            const double jx = item.uniform(-0.3, 0.3) * maze.cell_size;
            const double jy = item.uniform(-0.3, 0.3) * maze.cell_size;
            if (from != to && shortest_path_cells(maze, from, to).empty()) continue;
            traj = maze_route_trajectory(maze, from, to, horizon, jx, jy);
            done = true;
        }
        if (!done) {
            throw GenerationError("maze: no reachable start/goal pair after 32 attempts");
        }
        const std::size_t last = traj.dim(0) - 1;
        ds.trajectories.push_back(traj);
        ds.contexts.push_back({traj.at(0, 0), traj.at(0, 1), traj.at(last, 0), traj.at(last, 1)});
    }
    ds.finalize();
    return ds;
}

}  // namespace trajflow
