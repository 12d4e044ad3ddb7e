#include "trajflow/runconfig.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "trajflow/errors.hpp"

namespace trajflow {

// 12x12 room layout with two chambers and a corridor; S/G mark the canonical
// endpoint regions but any free cell may be drawn.
const char* const kBuiltinMaze =
    "############\n"
    "#S.....#...#\n"
    "#......#.G.#\n"
    "#..##..#...#\n"
    "#..##......#\n"
    "#......##..#\n"
    "#..#...##..#\n"
    "#..#.......#\n"
    "#..####..###\n"
    "#.....#....#\n"
    "#G....#...S#\n"
    "############\n";

namespace {

nlohmann::json domain_defaults(const std::string& kind) {
    if (kind == "maze") {
        return {{"kind", "maze"},   {"count", 400},      {"horizon", 64},
                {"maze_file", ""},  {"cell_size", 1.0}};
    }
    if (kind == "pursuit") {
        const PursuitScenario d;
        return {{"kind", "pursuit"},
                {"count", 500},
                {"horizon", d.horizon},
                {"window", d.window},
                {"context_slots", d.context_slots},
                {"width", d.width},
                {"height", d.height},
                {"hideouts", d.hideouts},
                {"speed", d.speed},
                {"heading_noise", d.heading_noise},
                {"detection_rate", d.detection_rate}};
    }
    if (kind == "flight") {
        const FlightScenario d;
        return {{"kind", "flight"},   {"count", 474},
                {"horizon", d.horizon}, {"past", d.past},
                {"min_events", d.min_events}, {"max_events", d.max_events}};
    }
    if (kind == "csv") {
        return {{"kind", "csv"}, {"file", ""}, {"horizon", 32}, {"past", 8}};
    }
    throw ConfigError("config: unknown domain kind '" + kind +
                      "' (expected maze, pursuit, flight or csv)");
}

// Overlay user keys onto defaults; every user key must exist in the defaults
// with a compatible type.
nlohmann::json merge_section(const nlohmann::json& defaults, const nlohmann::json& user,
                             const std::string& where) {
    if (!user.is_object()) throw ConfigError("config: " + where + " must be an object");
    nlohmann::json out = defaults;
    for (const auto& [key, value] : user.items()) {
        if (!defaults.contains(key)) {
            throw ConfigError("config: unknown key " + where + "." + key);
        }
        const auto& def = defaults.at(key);
        const bool both_numbers = def.is_number() && value.is_number();
        const bool int_needed = def.is_number_integer() && !value.is_number_integer();
        if ((def.type() != value.type() && !both_numbers) || int_needed) {
            throw ConfigError("config: " + where + "." + key + " has the wrong type");
        }
        out[key] = value;
    }
    return out;
}

}  // namespace

nlohmann::json default_run_config(const std::string& domain_kind) {
    return {
        {"seed", 0},
        {"output_dir", "out"},
        {"domain", domain_defaults(domain_kind)},
        {"model",
         {{"family", "flow"},
          {"base_channels", 32},
          {"depth", 2},
          {"kernel_size", 5},
          {"time_embed_dim", 32},
          {"groups", 8},
          {"diffusion_timesteps", 64}}},
        {"trainer",
         {{"sigma", 0.01},
          {"batch_size", 16},
          {"steps", 2000},
          {"lr", 1e-3},
          {"beta1", 0.9},
          {"beta2", 0.999},
          {"eps", 1e-8},
          {"checkpoint_every", 500}}},
        {"sampler",
         {{"num_steps", 1},
          {"num_samples", 8},
          {"solver", "euler"},
          {"goal_index", -1},
          {"constrain_endpoints", true}}},
        {"eval",
         {{"steps", nlohmann::json::array({1, 4, 16, 64})},
          {"num_samples", 8},
          {"max_items", 32}}},
        {"benchmark",
         {{"steps", nlohmann::json::array({1, 2, 4, 16, 64})},
          {"repetitions", 5},
          {"num_samples", 4},
          {"max_items", 8}}},
        {"command", nlohmann::json::object()},
    };
}

nlohmann::json resolve_run_config(const nlohmann::json& user) {
    if (!user.is_object()) throw ConfigError("config: top level must be an object");
    std::string kind = "pursuit";
    if (user.contains("domain")) {
        const auto& dom = user.at("domain");
        if (!dom.is_object()) throw ConfigError("config: domain must be an object");
        if (dom.contains("kind")) {
            if (!dom.at("kind").is_string()) throw ConfigError("config: domain.kind must be a string");
            kind = dom.at("kind").get<std::string>();
        }
    }
    const nlohmann::json defaults = default_run_config(kind);
    nlohmann::json out = defaults;
    for (const auto& [key, value] : user.items()) {
        if (!defaults.contains(key)) throw ConfigError("config: unknown key " + key);
        if (key == "seed") {
            if (!value.is_number_integer()) throw ConfigError("config: seed must be an integer");
            out[key] = value;
        } else if (key == "output_dir") {
            if (!value.is_string()) throw ConfigError("config: output_dir must be a string");
            out[key] = value;
        } else if (key == "command") {
            if (!value.is_object()) throw ConfigError("config: command must be an object");
            out[key] = value;
        } else {
            out[key] = merge_section(defaults.at(key), value, key);
        }
    }
    return out;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("config: cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("config: failed writing " + path);
}

MazeSpec maze_from_config(const nlohmann::json& domain) {
    const std::string file = domain.at("maze_file").get<std::string>();
    const double cell = domain.at("cell_size").get<double>();
    if (file.empty()) return MazeSpec::parse(kBuiltinMaze, cell);
    return MazeSpec::load_file(file, cell);
}

PursuitScenario pursuit_from_config(const nlohmann::json& domain) {
    PursuitScenario sc;
    sc.horizon = domain.at("horizon").get<int>();
    sc.window = domain.at("window").get<int>();
    sc.context_slots = domain.at("context_slots").get<int>();
    sc.width = domain.at("width").get<double>();
    sc.height = domain.at("height").get<double>();
    sc.hideouts = domain.at("hideouts").get<std::vector<std::array<double, 2>>>();
    sc.speed = domain.at("speed").get<double>();
    sc.heading_noise = domain.at("heading_noise").get<double>();
    sc.detection_rate = domain.at("detection_rate").get<double>();
    sc.validate();
    return sc;
}

FlightScenario flight_from_config(const nlohmann::json& domain) {
    FlightScenario sc;
    sc.horizon = domain.at("horizon").get<int>();
    sc.past = domain.at("past").get<int>();
    sc.min_events = domain.at("min_events").get<int>();
    sc.max_events = domain.at("max_events").get<int>();
    sc.validate();
    return sc;
}

TrainerConfig trainer_from_config(const nlohmann::json& cfg) {
    const auto& t = cfg.at("trainer");
    TrainerConfig tc;
    tc.sigma = t.at("sigma").get<double>();
    tc.batch_size = t.at("batch_size").get<int>();
    tc.steps = t.at("steps").get<std::int64_t>();
    tc.adam.lr = t.at("lr").get<double>();
    tc.adam.beta1 = t.at("beta1").get<double>();
    tc.adam.beta2 = t.at("beta2").get<double>();
    tc.adam.eps = t.at("eps").get<double>();
    tc.checkpoint_every = t.at("checkpoint_every").get<std::int64_t>();
    tc.seed = cfg.at("seed").get<std::uint64_t>();
    tc.validate();
    return tc;
}

NetConfig net_from_config(const nlohmann::json& cfg, int horizon, int state_dim,
                          int context_dim) {
    const auto& m = cfg.at("model");
    NetConfig nc;
    nc.horizon = horizon;
    nc.state_dim = state_dim;
    nc.context_dim = context_dim;
    nc.base_channels = m.at("base_channels").get<int>();
    nc.depth = m.at("depth").get<int>();
    nc.kernel_size = m.at("kernel_size").get<int>();
    nc.time_embed_dim = m.at("time_embed_dim").get<int>();
    nc.groups = m.at("groups").get<int>();
    nc.validate();
    return nc;
}

TrajectoryDataset generate_dataset(const nlohmann::json& cfg) {
    const auto& domain = cfg.at("domain");
    const std::string kind = domain.at("kind").get<std::string>();
    const SeededRng rng = SeededRng(cfg.at("seed").get<std::uint64_t>()).stream("dataset");

    if (kind == "maze") {
        const MazeSpec maze = maze_from_config(domain);
        return generate_maze_dataset(maze, domain.at("count").get<std::size_t>(),
                                     domain.at("horizon").get<int>(), rng);
    }
    if (kind == "pursuit") {
        const PursuitScenario sc = pursuit_from_config(domain);
        return generate_pursuit_dataset(sc, domain.at("count").get<std::size_t>(), rng).data;
    }
    if (kind == "flight") {
        const FlightScenario sc = flight_from_config(domain);
        return generate_flight_dataset(sc, domain.at("count").get<std::size_t>(), rng);
    }
    if (kind == "csv") {
        const std::string file = domain.at("file").get<std::string>();
        if (file.empty()) throw ConfigError("config: domain.file is required for kind csv");
        CsvSchema schema;
        schema.past = domain.at("past").get<int>();
        schema.horizon = domain.at("horizon").get<int>();
        TrajectoryDataset ds = load_trajectory_csv(file, schema);
        if (ds.trajectories.empty()) throw DataError("config: " + file + " holds no trajectories");
        return ds;
    }
    throw ConfigError("config: unknown domain kind '" + kind + "'");
}

std::string resolve_output_dir(const std::string& dir) {
    const char* root = std::getenv("TRAJFLOW_OUTPUT_ROOT");
    if (!root || !*root) return dir;
    const std::filesystem::path p(dir);
    if (p.is_absolute()) return dir;
    return (std::filesystem::path(root) / p).string();
}

}  // namespace trajflow
