#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "trajflow/errors.hpp"
#include "trajflow/evalrun.hpp"
#include "trajflow/runconfig.hpp"
#include "trajflow/sampler.hpp"

using namespace trajflow;
using nlohmann::json;

TEST_CASE("defaults resolve for every domain kind") {
    for (const char* kind : {"maze", "pursuit", "flight", "csv"}) {
        const json cfg = resolve_run_config(json{{"domain", {{"kind", kind}}}});
        CHECK(cfg.at("domain").at("kind") == kind);
        CHECK(cfg.at("seed") == 0);
        CHECK(cfg.at("model").at("family") == "flow");
        CHECK(cfg.at("trainer").at("steps") == 2000);
        CHECK(cfg.at("sampler").at("num_steps") == 1);
        CHECK(cfg.contains("eval"));
        CHECK(cfg.contains("benchmark"));
        CHECK(cfg.contains("command"));
    }
    // empty input defaults to the pursuit domain
    const json cfg = resolve_run_config(json::object());
    CHECK(cfg.at("domain").at("kind") == "pursuit");
    CHECK(cfg.at("domain").at("detection_rate") == 0.44);
}

TEST_CASE("user values overlay the defaults") {
    const json cfg = resolve_run_config(json{{"seed", 9},
                                             {"domain", {{"kind", "maze"}, {"count", 17}}},
                                             {"trainer", {{"lr", 0.5}}}});
    CHECK(cfg.at("seed") == 9);
    CHECK(cfg.at("domain").at("count") == 17);
    CHECK(cfg.at("domain").at("horizon") == 64);  // untouched default
    CHECK(cfg.at("trainer").at("lr") == 0.5);
    CHECK(cfg.at("trainer").at("batch_size") == 16);
}

TEST_CASE("unknown keys and type mismatches are config errors") {
    CHECK_THROWS_AS(resolve_run_config(json{{"nope", 1}}), ConfigError);
    CHECK_THROWS_AS(resolve_run_config(json{{"trainer", {{"nope", 1}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_run_config(json{{"trainer", {{"steps", "many"}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_run_config(json{{"domain", {{"kind", "banana"}}}}), ConfigError);
    // integers are accepted where floats are expected
    const json ok = resolve_run_config(json{{"trainer", {{"sigma", 1}}}});
    CHECK(ok.at("trainer").at("sigma") == 1);
    // but floats with fractional parts cannot fill integer slots
    CHECK_THROWS_AS(resolve_run_config(json{{"trainer", {{"steps", 1.5}}}}), ConfigError);
}

TEST_CASE("typed section views agree with the config") {
    const json cfg = resolve_run_config(json{{"domain", {{"kind", "pursuit"}}},
                                             {"seed", 3},
                                             {"trainer", {{"batch_size", 4}}}});
    const PursuitScenario sc = pursuit_from_config(cfg.at("domain"));
    CHECK(sc.detection_rate == 0.44);
    CHECK(sc.horizon == 64);

    const TrainerConfig tc = trainer_from_config(cfg);
    CHECK(tc.batch_size == 4);
    CHECK(tc.seed == 3);
    CHECK(tc.steps == 2000);

    const NetConfig nc = net_from_config(cfg, 64, 2, 32);
    CHECK(nc.horizon == 64);
    CHECK(nc.state_dim == 2);
    CHECK(nc.context_dim == 32);
    CHECK(nc.base_channels == 32);
}

TEST_CASE("builtin maze parses, is connected and honors its marks") {
    const MazeSpec m = MazeSpec::parse(kBuiltinMaze);
    CHECK(m.rows == 12);
    CHECK(m.cols == 12);
    CHECK(m.starts.size() == 2);
    CHECK(m.goals.size() == 2);
    const auto free = m.free_cells();
    for (std::size_t cell : free) {
        CHECK_FALSE(shortest_path_cells(m, free.front(), cell).empty());
    }

    const json cfg = resolve_run_config(json{{"domain", {{"kind", "maze"}}}});
    const MazeSpec viaconfig = maze_from_config(cfg.at("domain"));
    CHECK(viaconfig.rows == m.rows);
    CHECK(viaconfig.occ == m.occ);
}

TEST_CASE("generate_dataset dispatches on the domain kind") {
    // routes on the 12x12 builtin maze need enough waypoints to stay off the walls
    json cfg = resolve_run_config(json{{"domain", {{"kind", "maze"}, {"count", 12}, {"horizon", 24}}}});
    const TrajectoryDataset maze_ds = generate_dataset(cfg);
    CHECK(maze_ds.size() == 12);
    CHECK(maze_ds.horizon == 24);
    CHECK(maze_ds.layout.kind == ContextLayout::Kind::endpoints);

    cfg = resolve_run_config(json{{"domain",
                                   {{"kind", "flight"}, {"count", 6}, {"horizon", 8}, {"past", 2}}}});
    const TrajectoryDataset flight_ds = generate_dataset(cfg);
    CHECK(flight_ds.size() == 6);
    CHECK(flight_ds.state_dim == 3);
    CHECK(flight_ds.layout.kind == ContextLayout::Kind::history);

    // same config, same bytes
    const TrajectoryDataset again = generate_dataset(cfg);
    for (std::size_t i = 0; i < flight_ds.size(); ++i) {
        for (std::size_t j = 0; j < flight_ds.trajectories[i].size(); ++j) {
            CHECK(again.trajectories[i][j] == flight_ds.trajectories[i][j]);
        }
    }
}

TEST_CASE("json file io reports failures") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "trajflow_cfg_test";
    fs::create_directories(dir);
    const fs::path file = dir / "cfg.json";

    write_json_file(file.string(), json{{"seed", 1}});
    CHECK(load_json_file(file.string()).at("seed") == 1);

    std::ofstream(file) << "{not json";
    CHECK_THROWS_AS(load_json_file(file.string()), ConfigError);
    CHECK_THROWS_AS(load_json_file((dir / "missing.json").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("output dir resolution honors the root override") {
    const char* saved = std::getenv("TRAJFLOW_OUTPUT_ROOT");
    const std::string saved_value = saved ? saved : "";
    setenv("TRAJFLOW_OUTPUT_ROOT", "/tmp/trajflow_root", 1);
    CHECK(resolve_output_dir("out") == "/tmp/trajflow_root/out");
    CHECK(resolve_output_dir("/abs/path") == "/abs/path");
    unsetenv("TRAJFLOW_OUTPUT_ROOT");
    CHECK(resolve_output_dir("out") == "out");
    if (saved) setenv("TRAJFLOW_OUTPUT_ROOT", saved_value.c_str(), 1);
}

TEST_CASE("evaluation sweep reports quality per step count") {
    const MazeSpec maze = MazeSpec::parse(kUMaze);
    const TrajectoryDataset ds = generate_maze_dataset(maze, 40, 8, SeededRng(91));

    NetConfig nc;
    nc.horizon = 8;
    nc.state_dim = 2;
    nc.context_dim = 4;
    nc.base_channels = 8;
    nc.depth = 1;
    nc.kernel_size = 3;
    nc.time_embed_dim = 8;
    nc.groups = 4;
    SeededRng init(92);
    GenerativeModel model;
    model.family = GenerativeModel::Family::flow;
    model.net = VectorFieldNet::init(nc, init);
    model.schedule = DiffusionSchedule::cosine(8);

    EvalOptions opt;
    opt.num_samples = 2;
    opt.max_items = 3;
    opt.seed = 5;

    const EvalRow row = evaluate_at(model, ds, &maze, opt, 4);
    CHECK(row.num_steps == 4);
    CHECK(row.network_calls_per_sample == 4.0);
    CHECK(row.ade > 0.0);
    CHECK(row.min_ade <= row.ade);
    CHECK(row.ade_per_step.size() == 8);
    CHECK(row.has_maze);
    CHECK(row.maze_score >= 0.0);
    CHECK(row.collision >= 0.0);
    CHECK(row.collision <= 1.0);
    REQUIRE(row.horizon_errors.size() == 6);  // 2 dims x {0, H/2, H-1}

    // deterministic across calls
    const EvalRow again = evaluate_at(model, ds, &maze, opt, 4);
    CHECK(again.ade == row.ade);
    CHECK(again.min_ade == row.min_ade);
    CHECK(again.maze_score == row.maze_score);

    // constrained endpoints give zero displacement at the pinned steps
    CHECK(row.ade_per_step.front() < 1e-9);
    CHECK(row.ade_per_step.back() < 1e-9);

    EvalOptions off = opt;
    off.constrain_endpoints = false;
    const EvalRow loose = evaluate_at(model, ds, &maze, off, 4);
    CHECK(loose.ade_per_step.front() > 1e-6);
}
