#include "trajflow/traj_csv.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "trajflow/csv.hpp"
#include "trajflow/errors.hpp"

namespace trajflow {

void write_trajectories_csv(const std::string& path, const std::vector<Array>& trajs) {
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path);
    const std::size_t d = trajs.empty() ? 0 : trajs[0].dim(1);
    std::vector<std::string> header{"traj_id", "t"};
    for (std::size_t c = 0; c < d; ++c) header.push_back("dim_" + std::to_string(c));
    write_csv_row(out, header);
    for (std::size_t id = 0; id < trajs.size(); ++id) {
        const Array& tr = trajs[id];
        if (tr.ndim() != 2 || tr.dim(1) != d) {
            throw ShapeError("csv: trajectory " + std::to_string(id) + " has shape " +
                             shape_str(tr.shape()));
        }
        for (std::size_t r = 0; r < tr.dim(0); ++r) {
            std::vector<std::string> row{std::to_string(id), std::to_string(r)};
            for (std::size_t c = 0; c < d; ++c) row.push_back(format_double(tr.at(r, c)));
            write_csv_row(out, row);
        }
    }
    if (!out) throw IoError("csv: failed writing " + path);
}

namespace {

struct RawTraj {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::size_t first_line = 0;
};

// Value at time t by linear interpolation between samples.
std::vector<double> interp_state(const RawTraj& rt, double t) {
    const auto& ts = rt.times;
    if (t <= ts.front()) return rt.states.front();
    if (t >= ts.back()) return rt.states.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    std::vector<double> out(rt.states[lo].size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = rt.states[lo][c] + w * (rt.states[hi][c] - rt.states[lo][c]);
    }
    return out;
}

}  // namespace

TrajectoryDataset load_trajectory_csv(const std::string& path, const CsvSchema& schema) {
    if (schema.horizon < 2) throw ConfigError("csv: horizon must be at least 2");
    if (schema.past < 0) throw ConfigError("csv: past must be >= 0");
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    std::size_t dims = 0;
    std::size_t id_col = 0, t_col = 0;
    std::vector<std::size_t> dim_cols;

    if (!std::getline(in, line)) {
        // no header at all: treat as an empty dataset
        TrajectoryDataset empty;
        empty.horizon = schema.horizon;
        empty.state_dim = 0;
        return empty;
    }
    ++line_no;
    {
        const auto fields = split_csv_line(line);
        std::map<std::string, std::size_t> cols;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (cols.count(fields[i])) throw SchemaError("csv: duplicate column " + fields[i]);
            cols[fields[i]] = i;
        }
        if (!cols.count("traj_id")) throw SchemaError("csv: missing column traj_id");
        if (!cols.count("t")) throw SchemaError("csv: missing column t");
        id_col = cols["traj_id"];
        t_col = cols["t"];
        while (cols.count("dim_" + std::to_string(dims))) {
            dim_cols.push_back(cols["dim_" + std::to_string(dims)]);
            ++dims;
        }
        if (dims == 0) throw SchemaError("csv: no dim_0 column");
        if (cols.size() != 2 + dims) {
            for (const auto& [name, idx] : cols) {
                if (name != "traj_id" && name != "t" &&
                    std::find(dim_cols.begin(), dim_cols.end(), idx) == dim_cols.end()) {
                    throw SchemaError("csv: unexpected column " + name);
                }
            }
        }
    }

    std::vector<std::string> order;                // first-appearance order of ids
    std::map<std::string, RawTraj> groups;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2 + dims) {
            throw DataError("csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(2 + dims));
        }
        const std::string& id = fields[id_col];
        const double t = parse_double_field(fields[t_col], line_no);
        auto [it, inserted] = groups.try_emplace(id);
        RawTraj& rt = it->second;
        if (inserted) {
            rt.first_line = line_no;
            order.push_back(id);
        }
        if (!rt.times.empty() && t <= rt.times.back()) {
            throw DataError("csv: time not strictly increasing for trajectory '" + id +
                            "' on line " + std::to_string(line_no));
        }
        rt.times.push_back(t);
        std::vector<double> state(dims);
        for (std::size_t c = 0; c < dims; ++c) {
            state[c] = parse_double_field(fields[dim_cols[c]], line_no);
        }
        rt.states.push_back(std::move(state));
    }

    TrajectoryDataset ds;
    ds.horizon = schema.horizon;
    ds.state_dim = static_cast<int>(dims);
    ds.layout = ContextLayout{ContextLayout::Kind::history, schema.past, static_cast<int>(dims)};
    if (groups.empty()) return ds;

    const int count = schema.past + schema.horizon;
    for (const std::string& id : order) {
        const RawTraj& rt = groups[id];
        const double t0 = rt.times.front(), t1 = rt.times.back();
        std::vector<double> ctx;
        ctx.reserve(static_cast<std::size_t>(schema.past) * dims);
        Array traj({static_cast<std::size_t>(schema.horizon), dims});
        for (int j = 0; j < count; ++j) {
            const double tj =
                count > 1 ? t0 + (t1 - t0) * static_cast<double>(j) / (count - 1) : t0;
            const std::vector<double> s = interp_state(rt, tj);
            if (j < schema.past) {
                ctx.insert(ctx.end(), s.begin(), s.end());
            } else {
                for (std::size_t c = 0; c < dims; ++c) {
                    traj.at(static_cast<std::size_t>(j - schema.past), c) = s[c];
                }
            }
        }
        ds.trajectories.push_back(std::move(traj));
        ds.contexts.push_back(std::move(ctx));
    }
    ds.finalize();
    return ds;
}

}  // namespace trajflow
