#include "trajflow/dataset_io.hpp"

#include <filesystem>
#include <fstream>

#include "trajflow/csv.hpp"
#include "trajflow/errors.hpp"
#include "trajflow/traj_csv.hpp"

namespace trajflow {

namespace fs = std::filesystem;

void save_dataset_dir(const std::string& dir, const TrajectoryDataset& ds,
                      const nlohmann::json& extra) {
    ds.validate();
    fs::create_directories(dir);

    nlohmann::json manifest{
        {"horizon", ds.horizon},
        {"state_dim", ds.state_dim},
        {"count", ds.size()},
        {"layout", ds.layout.to_json()},
        {"stats", ds.stats.to_json()},
        {"splits",
         {{"train", ds.train_idx.size()},
          {"val", ds.val_idx.size()},
          {"test", ds.test_idx.size()}}},
    };
    for (const auto& [key, value] : extra.items()) manifest[key] = value;

    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw IoError("dataset: cannot write manifest in " + dir);
    mf << manifest.dump(2) << '\n';

    write_trajectories_csv((fs::path(dir) / "trajectories.csv").string(), ds.trajectories);

    std::ofstream cf(fs::path(dir) / "contexts.csv");
    if (!cf) throw IoError("dataset: cannot write contexts in " + dir);
    std::vector<std::string> header{"traj_id"};
    for (std::size_t c = 0; c < ds.layout.length(); ++c)
        header.push_back("c_" + std::to_string(c));
    write_csv_row(cf, header);
    for (std::size_t i = 0; i < ds.contexts.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (double v : ds.contexts[i]) row.push_back(format_double(v));
        write_csv_row(cf, row);
    }
    if (!cf) throw IoError("dataset: failed writing contexts in " + dir);
}

nlohmann::json load_dataset_manifest(const std::string& dir) {
    const fs::path p = fs::path(dir) / "manifest.json";
    std::ifstream in(p);
    if (!in) throw IoError("dataset: cannot open " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("dataset: " + p.string() + " is not valid JSON: " + e.what());
    }
}

TrajectoryDataset load_dataset_dir(const std::string& dir) {
    const nlohmann::json manifest = load_dataset_manifest(dir);

    TrajectoryDataset ds;
    try {
        ds.horizon = manifest.at("horizon").get<int>();
        ds.state_dim = manifest.at("state_dim").get<int>();
        ds.layout = ContextLayout::from_json(manifest.at("layout"));
        ds.stats = NormStats::from_json(manifest.at("stats"));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("dataset: manifest in " + dir + " is incomplete: " + e.what());
    }

    // Raw rows exactly as exported: one block of `horizon` rows per id.
    const std::string tpath = (fs::path(dir) / "trajectories.csv").string();
    CsvSchema schema;
    schema.past = 0;
    schema.horizon = ds.horizon;
    TrajectoryDataset loaded = load_trajectory_csv(tpath, schema);
    if (loaded.state_dim != ds.state_dim) {
        throw SchemaError("dataset: trajectories.csv has " + std::to_string(loaded.state_dim) +
                          " dims, manifest says " + std::to_string(ds.state_dim));
    }
    ds.trajectories = std::move(loaded.trajectories);

    const fs::path cpath = fs::path(dir) / "contexts.csv";
    std::ifstream cf(cpath);
    if (!cf) throw IoError("dataset: cannot open " + cpath.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(cf, line)) throw SchemaError("dataset: contexts.csv is empty");
    ++line_no;
    const std::size_t want = ds.layout.length() + 1;
    if (split_csv_line(line).size() != want) {
        throw SchemaError("dataset: contexts.csv header does not match the layout");
    }
    while (std::getline(cf, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != want) {
            throw DataError("dataset: contexts.csv line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(want));
        }
        std::vector<double> ctx;
        ctx.reserve(want - 1);
        for (std::size_t c = 1; c < want; ++c) {
            ctx.push_back(parse_double_field(fields[c], line_no));
        }
        ds.contexts.push_back(std::move(ctx));
    }

    const std::size_t expect = manifest.at("count").get<std::size_t>();
    if (ds.trajectories.size() != expect || ds.contexts.size() != expect) {
        throw DataError("dataset: manifest promises " + std::to_string(expect) + " items, found " +
                        std::to_string(ds.trajectories.size()) + " trajectories and " +
                        std::to_string(ds.contexts.size()) + " contexts");
    }

    // Rebuild the split lists; sizes are a pure function of the count.
    const auto sizes = split_sizes(ds.size());
    std::size_t i = 0;
    for (std::size_t k = 0; k < sizes[0]; ++k) ds.train_idx.push_back(i++);
    for (std::size_t k = 0; k < sizes[1]; ++k) ds.val_idx.push_back(i++);
    for (std::size_t k = 0; k < sizes[2]; ++k) ds.test_idx.push_back(i++);
    ds.validate();
    return ds;
}

}  // namespace trajflow
