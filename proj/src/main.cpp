#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajflow/cfm.hpp"
#include "trajflow/checkpoint.hpp"
#include "trajflow/csv.hpp"
#include "trajflow/dataset_io.hpp"
#include "trajflow/diffusion.hpp"
#include "trajflow/errors.hpp"
#include "trajflow/evalrun.hpp"
#include "trajflow/metrics.hpp"
#include "trajflow/pursuit.hpp"
#include "trajflow/runconfig.hpp"
#include "trajflow/sampler.hpp"
#include "trajflow/svgplot.hpp"
#include "trajflow/traj_csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajflow;

namespace {

json load_config_or_defaults(const std::string& path) {
    if (path.empty()) return resolve_run_config(json::object());
    return resolve_run_config(load_json_file(path));
}

// Flags fall back to the persisted command section, so a command can be
// re-run from its own config.resolved.json alone.
std::string from_command(const json& cfg, const char* key, const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const auto& cmd = cfg.at("command");
    if (cmd.contains(key) && cmd.at(key).is_string()) return cmd.at(key).get<std::string>();
    return "";
}

std::string prepare_out_dir(const json& cfg, const std::string& flag_out,
                            const char* default_subdir) {
    std::string dir = from_command(cfg, "out", flag_out);
    if (dir.empty()) {
        dir = (fs::path(cfg.at("output_dir").get<std::string>()) / default_subdir).string();
    }
    dir = resolve_output_dir(dir);
    fs::create_directories(dir);
    return dir;
}

void persist_config(json cfg, const std::string& out_dir, json command) {
    command["out"] = out_dir;
    cfg["command"] = std::move(command);
    write_json_file((fs::path(out_dir) / "config.resolved.json").string(), cfg);
}

std::vector<double> parse_point(const std::string& text, const char* what, std::size_t dims) {
    std::vector<double> out;
    std::string cur;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            out.push_back(parse_double_field(cur, 0));
            cur.clear();
        } else {
            cur.push_back(text[i]);
        }
    }
    if (out.size() != dims) {
        throw ConfigError(std::string(what) + " must have " + std::to_string(dims) +
                          " comma-separated coordinates, got " + std::to_string(out.size()));
    }
    return out;
}

void write_loss_outputs(const std::string& out_dir, std::int64_t first_step,
                        const std::vector<double>& losses) {
    std::ofstream csv(fs::path(out_dir) / "loss.csv");
    if (!csv) throw IoError("train: cannot write loss.csv");
    write_csv_row(csv, {"step", "loss"});
    PlotSeries series{"training loss", {}};
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const std::int64_t step = first_step + static_cast<std::int64_t>(i);
        write_csv_row(csv, {std::to_string(step), format_double(losses[i])});
        series.points.emplace_back(static_cast<double>(step), losses[i]);
    }
    if (!losses.empty()) {
        write_line_plot_svg((fs::path(out_dir) / "loss.svg").string(), "training loss", "step",
                            "batch loss", {series});
    }
}

void write_preview_svg(const std::string& out_dir, const json& cfg, const TrajectoryDataset& ds) {
    const std::string kind = cfg.at("domain").at("kind").get<std::string>();
    const std::string path = (fs::path(out_dir) / "preview.svg").string();
    const std::size_t show = std::min<std::size_t>(ds.size(), 8);
    if (kind == "maze") {
        const MazeSpec maze = maze_from_config(cfg.at("domain"));
        std::vector<Array> trajs(ds.trajectories.begin(),
                                 ds.trajectories.begin() + static_cast<long>(show));
        write_maze_overlay_svg(path, maze, trajs);
        return;
    }
    std::vector<PlotSeries> series;
    for (std::size_t i = 0; i < show; ++i) {
        PlotSeries s{"traj " + std::to_string(i), {}};
        for (std::size_t r = 0; r < ds.trajectories[i].dim(0); ++r) {
            s.points.emplace_back(ds.trajectories[i].at(r, 0), ds.trajectories[i].at(r, 1));
        }
        series.push_back(std::move(s));
    }
    write_line_plot_svg(path, kind + " trajectories (first two dims)", "dim 0", "dim 1", series);
}

int cmd_generate(const std::string& config_path, const std::string& kind_flag,
                 const std::string& out_flag, std::int64_t count_flag, std::int64_t seed_flag,
                 bool count_set, bool seed_set) {
    json user = config_path.empty() ? json::object() : load_json_file(config_path);
    if (!kind_flag.empty()) user["domain"]["kind"] = kind_flag;
    json cfg = resolve_run_config(user);
    if (count_set) cfg["domain"]["count"] = count_flag;
    if (seed_set) cfg["seed"] = seed_flag;

    const std::string out = prepare_out_dir(cfg, out_flag, "dataset");

    json info;
    const std::string kind = cfg.at("domain").at("kind").get<std::string>();
    TrajectoryDataset ds;
    if (kind == "pursuit") {
        const PursuitScenario sc = pursuit_from_config(cfg.at("domain"));
        const SeededRng rng =
            SeededRng(cfg.at("seed").get<std::uint64_t>()).stream("dataset");
        PursuitDataset pd =
            generate_pursuit_dataset(sc, cfg.at("domain").at("count").get<std::size_t>(), rng);
        info["realized_detection_rate"] = pd.realized_detection_rate;
        ds = std::move(pd.data);
    } else {
        ds = generate_dataset(cfg);
    }

    json extra{{"kind", kind}, {"seed", cfg.at("seed")}, {"domain", cfg.at("domain")}};
    for (const auto& [k, v] : info.items()) extra[k] = v;
    save_dataset_dir(out, ds, extra);
    write_preview_svg(out, cfg, ds);
    persist_config(cfg, out, json{{"name", "generate"}});

    std::cout << "wrote " << ds.size() << " " << kind << " trajectories (H=" << ds.horizon
              << ", D=" << ds.state_dim << ", context=" << ds.layout.length() << ") to " << out
              << "\n"
              << "splits: train=" << ds.train_idx.size() << " val=" << ds.val_idx.size()
              << " test=" << ds.test_idx.size() << "\n";
    if (info.contains("realized_detection_rate")) {
        std::cout << "realized detection rate: "
                  << info.at("realized_detection_rate").get<double>() << "\n";
    }
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_flag,
              const std::string& out_flag, const std::string& resume_path,
              const std::string& family_flag, std::int64_t steps_flag, std::int64_t seed_flag,
              bool steps_set, bool seed_set) {
    json cfg = load_config_or_defaults(config_path);
    if (!family_flag.empty()) cfg["model"]["family"] = family_flag;
    if (steps_set) cfg["trainer"]["steps"] = steps_flag;
    if (seed_set) cfg["seed"] = seed_flag;

    const std::string data_dir = from_command(cfg, "data", data_flag);
    if (data_dir.empty()) throw ConfigError("train: --data is required");
    const TrajectoryDataset ds = load_dataset_dir(data_dir);
    const std::string out = prepare_out_dir(cfg, out_flag, "train");

    const GenerativeModel::Family family =
        family_from_string(cfg.at("model").at("family").get<std::string>());
    const NetConfig nc = net_from_config(cfg, ds.horizon, ds.state_dim,
                                         static_cast<int>(ds.layout.length()));
    const DiffusionSchedule schedule =
        DiffusionSchedule::cosine(cfg.at("model").at("diffusion_timesteps").get<int>());

    ModelCheckpoint ckpt;
    if (!resume_path.empty()) {
        ckpt = load_model_checkpoint(resume_path);
        if (!(ckpt.model.net.config() == nc)) {
            throw ConfigError("train: checkpoint architecture does not match the configuration");
        }
        if (ckpt.model.family != family) {
            throw ConfigError("train: checkpoint family " + to_string(ckpt.model.family) +
                              " does not match configured family " + to_string(family));
        }
    } else {
        SeededRng init_rng = SeededRng(cfg.at("seed").get<std::uint64_t>()).stream("init");
        ckpt.model.family = family;
        ckpt.model.net = VectorFieldNet::init(nc, init_rng);
        ckpt.model.schedule = schedule;
        ckpt.opt = AdamState::init(ckpt.model.net.params());
        ckpt.stats = ds.stats;
        ckpt.layout = ds.layout;
    }
    ckpt.model.schedule = schedule;
    ckpt.run_config = cfg;
    // run provenance lives in config.resolved.json, not in the model identity
    ckpt.run_config["command"] = json::object();

    const TrainerConfig tc = trainer_from_config(cfg);
    const std::int64_t first_step = ckpt.opt.step + 1;
    const std::string model_path = (fs::path(out) / "model.ckpt").string();

    TrainHooks hooks;
    const std::int64_t print_every = std::max<std::int64_t>(1, tc.steps / 10);
    hooks.on_step = [&](std::int64_t step, double loss) {
        if ((step - first_step + 1) % print_every == 0 || step == first_step + tc.steps - 1) {
            std::cout << "step " << step << "  loss " << format_double(loss) << "\n";
        }
    };
    hooks.save_checkpoint = [&](std::int64_t step) {
        ckpt.trained_steps = step;
        const std::string path = (fs::path(out) / ("ckpt_" + std::to_string(step) + ".ckpt")).string();
        save_model_checkpoint(path, ckpt);
        return path;
    };

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result;
    if (family == GenerativeModel::Family::flow) {
        result = train_flow_matching(ds, ckpt.model.net, ckpt.opt, tc, hooks);
    } else {
        result = train_diffusion(ds, ckpt.model.net, ckpt.model.schedule, ckpt.opt, tc, hooks);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ckpt.trained_steps = ckpt.opt.step;
    save_model_checkpoint(model_path, ckpt);
    write_loss_outputs(out, first_step, result.losses);
    persist_config(cfg, out, json{{"name", "train"}, {"data", data_dir}});

    double tail = 0.0;
    const std::size_t tail_n = std::min<std::size_t>(result.losses.size(), 50);
    for (std::size_t i = result.losses.size() - tail_n; i < result.losses.size(); ++i) {
        tail += result.losses[i];
    }
    std::cout << "trained " << to_string(family) << " model for " << result.losses.size()
              << " steps in " << format_double(secs) << "s";
    if (tail_n > 0) {
        std::cout << "  (mean loss over last " << tail_n << ": "
                  << format_double(tail / static_cast<double>(tail_n)) << ")";
    }
    std::cout << "\ncheckpoint: " << model_path << "\n";
    return 0;
}

int cmd_sample(const std::string& config_path, const std::string& ckpt_flag,
               const std::string& data_flag, const std::string& out_flag,
               const std::string& start_text, const std::string& goal_text, int num_steps,
               int num_samples, std::int64_t item, std::int64_t seed_flag,
               const std::string& solver_flag, bool steps_set, bool samples_set, bool seed_set,
               bool item_set) {
    json pre = config_path.empty() ? json() : resolve_run_config(load_json_file(config_path));
    const std::string ckpt_path =
        config_path.empty() ? ckpt_flag : from_command(pre, "checkpoint", ckpt_flag);
    if (ckpt_path.empty()) throw ConfigError("sample: --checkpoint is required");
    ModelCheckpoint ckpt = load_model_checkpoint(ckpt_path);

    json cfg = !pre.is_null() ? pre
               : ckpt.run_config.is_object() ? resolve_run_config(ckpt.run_config)
                                             : resolve_run_config(json::object());
    json& sampler_cfg = cfg["sampler"];
    if (steps_set) sampler_cfg["num_steps"] = num_steps;
    if (samples_set) sampler_cfg["num_samples"] = num_samples;
    if (seed_set) cfg["seed"] = seed_flag;
    if (!solver_flag.empty()) sampler_cfg["solver"] = solver_flag;

    const std::string out = prepare_out_dir(cfg, out_flag, "samples");
    const NetConfig& nc = ckpt.model.net.config();
    const std::size_t d = static_cast<std::size_t>(nc.state_dim);

    SampleRequest req;
    req.num_steps = sampler_cfg.at("num_steps").get<int>();
    req.num_samples = sampler_cfg.at("num_samples").get<int>();
    req.seed = cfg.at("seed").get<std::uint64_t>();
    req.solver = sampler_cfg.at("solver").get<std::string>() == "midpoint" ? Solver::midpoint
                                                                           : Solver::euler;

    const std::string data_dir = from_command(cfg, "data", data_flag);
    std::string start_str = start_text, goal_str = goal_text;
    if (start_str.empty()) start_str = from_command(cfg, "start", "");
    if (goal_str.empty()) goal_str = from_command(cfg, "goal", "");

    json command{{"name", "sample"}, {"checkpoint", ckpt_path}};
    if (!start_str.empty() || !goal_str.empty()) {
        if (start_str.empty() || goal_str.empty()) {
            throw ConfigError("sample: --start and --goal must be given together");
        }
        if (ckpt.layout.kind != ContextLayout::Kind::endpoints) {
            throw ConfigError("sample: this model does not condition on endpoints");
        }
        const std::vector<double> start = parse_point(start_str, "--start", d);
        const std::vector<double> goal = parse_point(goal_str, "--goal", d);
        std::vector<double> raw(start);
        raw.insert(raw.end(), goal.begin(), goal.end());
        std::vector<double> norm = ckpt.layout.normalize(raw, ckpt.stats);
        PlanConstraint c;
        c.goal_index = sampler_cfg.at("goal_index").get<int>();
        c.start.assign(norm.begin(), norm.begin() + static_cast<long>(d));
        c.goal.assign(norm.begin() + static_cast<long>(d), norm.end());
        req.constraint = c;
        const std::size_t len = norm.size();
        req.context = Array({len}, std::move(norm));
        command["start"] = start_str;
        command["goal"] = goal_str;
    } else if (!data_dir.empty()) {
        const TrajectoryDataset ds = load_dataset_dir(data_dir);
        if (ds.layout.length() != static_cast<std::size_t>(nc.context_dim)) {
            throw ConfigError("sample: dataset context does not match the model");
        }
        const std::vector<std::size_t> test = ds.test_idx;
        const std::int64_t pick = item_set ? item : 0;
        if (pick < 0 || static_cast<std::size_t>(pick) >= test.size()) {
            throw ConfigError("sample: --item " + std::to_string(pick) +
                              " outside the test split (size " + std::to_string(test.size()) + ")");
        }
        const std::size_t idx = test[static_cast<std::size_t>(pick)];
        req.context = ds.normalized_context(idx);
        if (sampler_cfg.at("constrain_endpoints").get<bool>() &&
            ds.layout.kind == ContextLayout::Kind::endpoints) {
            PlanConstraint c;
            c.goal_index = sampler_cfg.at("goal_index").get<int>();
            for (std::size_t j = 0; j < d; ++j) {
                c.start.push_back(req.context[j]);
                c.goal.push_back(req.context[req.context.size() - d + j]);
            }
            req.constraint = std::move(c);
        }
        command["data"] = data_dir;
        command["item"] = pick;
    } else if (nc.context_dim != 0) {
        throw ConfigError(
            "sample: this model is conditional; pass --data (with --item) or --start/--goal");
    }

    SampleStats stats;
    std::vector<Array> samples = ckpt.model.sample(req, &stats);
    for (Array& s : samples) s = ckpt.stats.denormalize(s);

    write_trajectories_csv((fs::path(out) / "samples.csv").string(), samples);

    bool drew = false;
    if (ckpt.run_config.is_object() && ckpt.run_config.contains("domain") &&
        ckpt.run_config.at("domain").value("kind", "") == "maze") {
        try {
            const MazeSpec maze = maze_from_config(ckpt.run_config.at("domain"));
            write_maze_overlay_svg((fs::path(out) / "samples.svg").string(), maze, samples);
            drew = true;
        } catch (const Error&) {
            // fall through to the generic plot
        }
    }
    if (!drew) {
        std::vector<PlotSeries> series;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            PlotSeries s{"sample " + std::to_string(i), {}};
            for (std::size_t r = 0; r < samples[i].dim(0); ++r) {
                s.points.emplace_back(samples[i].at(r, 0),
                                      samples[i].dim(1) > 1 ? samples[i].at(r, 1)
                                                            : static_cast<double>(r));
            }
            series.push_back(std::move(s));
        }
        write_line_plot_svg((fs::path(out) / "samples.svg").string(), "samples (first two dims)",
                            "dim 0", "dim 1", series);
    }
    persist_config(cfg, out, std::move(command));

    std::cout << "sampled " << samples.size() << " trajectories with " << req.num_steps
              << " integration step" << (req.num_steps == 1 ? "" : "s") << " ("
              << stats.network_calls << " network calls, family " << to_string(ckpt.model.family)
              << ")\n"
              << "wrote " << (fs::path(out) / "samples.csv").string() << "\n";
    if (req.constraint) {
        // report endpoint pinning in raw units
        const Array& first = samples.front();
        std::cout << "endpoints pinned: start (" << format_double(first.at(0, 0));
        for (std::size_t j = 1; j < d; ++j) std::cout << ", " << format_double(first.at(0, j));
        const std::size_t gi = req.constraint->goal_index < 0
                                   ? first.dim(0) - 1
                                   : static_cast<std::size_t>(req.constraint->goal_index);
        std::cout << "), goal (" << format_double(first.at(gi, 0));
        for (std::size_t j = 1; j < d; ++j) std::cout << ", " << format_double(first.at(gi, j));
        std::cout << ")\n";
    }
    return 0;
}

struct EvalFlags {
    std::string config, checkpoint, data, out;
    std::vector<int> steps;
    int num_samples = 0;
    std::int64_t max_items = 0;
    std::int64_t seed = 0;
    bool no_constrain = false;
    bool samples_set = false, items_set = false, seed_set = false;
};

int cmd_eval(const EvalFlags& f) {
    json pre = f.config.empty() ? json() : resolve_run_config(load_json_file(f.config));
    const std::string ckpt_path =
        f.config.empty() ? f.checkpoint : from_command(pre, "checkpoint", f.checkpoint);
    if (ckpt_path.empty()) throw ConfigError("eval: --checkpoint is required");
    ModelCheckpoint ckpt = load_model_checkpoint(ckpt_path);

    json cfg = !pre.is_null() ? pre
               : ckpt.run_config.is_object() ? resolve_run_config(ckpt.run_config)
                                             : resolve_run_config(json::object());
    if (!f.steps.empty()) cfg["eval"]["steps"] = f.steps;
    if (f.samples_set) cfg["eval"]["num_samples"] = f.num_samples;
    if (f.items_set) cfg["eval"]["max_items"] = f.max_items;
    if (f.seed_set) cfg["seed"] = f.seed;
    if (f.no_constrain) cfg["sampler"]["constrain_endpoints"] = false;

    const std::string data_dir = from_command(cfg, "data", f.data);
    if (data_dir.empty()) throw ConfigError("eval: --data is required");
    const TrajectoryDataset ds = load_dataset_dir(data_dir);
    const NetConfig& nc = ckpt.model.net.config();
    if (nc.horizon != ds.horizon || nc.state_dim != ds.state_dim ||
        static_cast<std::size_t>(nc.context_dim) != ds.layout.length()) {
        throw ConfigError("eval: dataset shapes do not match the model");
    }
    const std::string out = prepare_out_dir(cfg, f.out, "eval");

    const json manifest = load_dataset_manifest(data_dir);
    const bool is_maze = manifest.value("kind", "") == "maze";
    MazeSpec maze;
    if (is_maze) maze = maze_from_config(manifest.at("domain"));

    EvalOptions opt;
    opt.num_samples = cfg.at("eval").at("num_samples").get<int>();
    opt.max_items = cfg.at("eval").at("max_items").get<std::size_t>();
    opt.seed = cfg.at("seed").get<std::uint64_t>();
    opt.constrain_endpoints = cfg.at("sampler").at("constrain_endpoints").get<bool>();
    opt.goal_index = cfg.at("sampler").at("goal_index").get<int>();
    const std::vector<int> step_counts = cfg.at("eval").at("steps").get<std::vector<int>>();
    if (step_counts.empty()) throw ConfigError("eval: steps list is empty");

    std::vector<EvalRow> rows;
    for (int n : step_counts) {
        rows.push_back(evaluate_at(ckpt.model, ds, is_maze ? &maze : nullptr, opt, n));
        const EvalRow& r = rows.back();
        std::cout << "steps=" << r.num_steps << "  ade=" << format_double(r.ade)
                  << "  min_ade=" << format_double(r.min_ade);
        if (r.has_maze) {
            std::cout << "  score=" << format_double(r.maze_score)
                      << "  collisions=" << format_double(r.collision);
        }
        std::cout << "  calls/sample=" << format_double(r.network_calls_per_sample) << "\n";
    }

    // summary CSV: one row per step count
    {
        std::ofstream sf(fs::path(out) / "eval_summary.csv");
        if (!sf) throw IoError("eval: cannot write eval_summary.csv");
        std::vector<std::string> header{"num_steps", "ade", "min_ade", "calls_per_sample"};
        if (rows.front().has_maze) {
            header.push_back("maze_score");
            header.push_back("collision_rate");
        }
        for (const HorizonError& e : rows.front().horizon_errors) {
            header.push_back("mae_s" + std::to_string(e.step) + "_d" + std::to_string(e.dim));
            header.push_back("rmse_s" + std::to_string(e.step) + "_d" + std::to_string(e.dim));
        }
        write_csv_row(sf, header);
        for (const EvalRow& r : rows) {
            std::vector<std::string> row{std::to_string(r.num_steps), format_double(r.ade),
                                         format_double(r.min_ade),
                                         format_double(r.network_calls_per_sample)};
            if (r.has_maze) {
                row.push_back(format_double(r.maze_score));
                row.push_back(format_double(r.collision));
            }
            for (const HorizonError& e : r.horizon_errors) {
                row.push_back(format_double(e.mae));
                row.push_back(format_double(e.rmse));
            }
            write_csv_row(sf, row);
        }
    }

    // displacement-by-step curves, one column per step count
    {
        EvalReport report;
        for (const EvalRow& r : rows) {
            report.curves["ade_n" + std::to_string(r.num_steps)] = r.ade_per_step;
        }
        report.write_curves_csv((fs::path(out) / "ade_curve.csv").string());
    }

    // per-step-count scalar reports
    for (const EvalRow& r : rows) {
        EvalReport report;
        report.scalars["num_steps"] = r.num_steps;
        report.scalars["ade"] = r.ade;
        report.scalars["min_ade"] = r.min_ade;
        report.scalars["calls_per_sample"] = r.network_calls_per_sample;
        if (r.has_maze) {
            report.scalars["maze_score"] = r.maze_score;
            report.scalars["collision_rate"] = r.collision;
        }
        for (const HorizonError& e : r.horizon_errors) {
            report.scalars["mae_s" + std::to_string(e.step) + "_d" + std::to_string(e.dim)] = e.mae;
            report.scalars["rmse_s" + std::to_string(e.step) + "_d" + std::to_string(e.dim)] =
                e.rmse;
        }
        report.write_scalars(
            (fs::path(out) / ("report_n" + std::to_string(r.num_steps) + ".txt")).string());
    }

    {
        PlotSeries ade_series{"ade", {}}, min_series{"min ade", {}};
        for (const EvalRow& r : rows) {
            ade_series.points.emplace_back(r.num_steps, r.ade);
            min_series.points.emplace_back(r.num_steps, r.min_ade);
        }
        write_line_plot_svg((fs::path(out) / "ade_vs_steps.svg").string(),
                            "displacement error vs integration steps", "integration steps (log)",
                            "ade", {ade_series, min_series}, /*log_x=*/true);
        if (rows.front().has_maze) {
            PlotSeries score{"goal score", {}};
            for (const EvalRow& r : rows) score.points.emplace_back(r.num_steps, r.maze_score);
            write_line_plot_svg((fs::path(out) / "score_vs_steps.svg").string(),
                                "goal score vs integration steps", "integration steps (log)",
                                "score", {score}, /*log_x=*/true);
        }
    }

    // qualitative overlay: truth plus samples for the first test item
    if (is_maze && !ds.test_idx.empty()) {
        const std::size_t idx = ds.test_idx.front();
        SampleRequest req;
        req.context = ds.normalized_context(idx);
        req.num_steps = step_counts.back();
        req.num_samples = std::min(opt.num_samples, 6);
        req.seed = opt.seed;
        if (opt.constrain_endpoints) {
            PlanConstraint c;
            c.goal_index = opt.goal_index;
            const std::size_t dd = static_cast<std::size_t>(ds.state_dim);
            for (std::size_t j = 0; j < dd; ++j) {
                c.start.push_back(req.context[j]);
                c.goal.push_back(req.context[req.context.size() - dd + j]);
            }
            req.constraint = std::move(c);
        }
        std::vector<Array> overlay{ds.trajectories[idx]};
        for (Array& s : ckpt.model.sample(req)) overlay.push_back(ckpt.stats.denormalize(s));
        write_maze_overlay_svg((fs::path(out) / "qualitative.svg").string(), maze, overlay);
    }

    persist_config(cfg, out,
                   json{{"name", "eval"}, {"checkpoint", ckpt_path}, {"data", data_dir}});
    std::cout << "wrote " << (fs::path(out) / "eval_summary.csv").string() << "\n";
    return 0;
}

struct BenchFlags {
    std::string config, data, out;
    std::vector<std::string> checkpoints;
    std::vector<int> steps;
    int repetitions = 0;
    int num_samples = 0;
    std::int64_t max_items = 0;
    std::int64_t seed = 0;
    bool reps_set = false, samples_set = false, items_set = false, seed_set = false;
};

int cmd_benchmark(const BenchFlags& f) {
    json cfg = load_config_or_defaults(f.config);
    std::vector<std::string> ckpt_paths = f.checkpoints;
    if (ckpt_paths.empty() && cfg.at("command").contains("checkpoints")) {
        ckpt_paths = cfg.at("command").at("checkpoints").get<std::vector<std::string>>();
    }
    if (ckpt_paths.empty()) throw ConfigError("benchmark: --checkpoint is required");
    if (!f.steps.empty()) cfg["benchmark"]["steps"] = f.steps;
    if (f.reps_set) cfg["benchmark"]["repetitions"] = f.repetitions;
    if (f.samples_set) cfg["benchmark"]["num_samples"] = f.num_samples;
    if (f.items_set) cfg["benchmark"]["max_items"] = f.max_items;
    if (f.seed_set) cfg["seed"] = f.seed;

    const std::string data_dir = from_command(cfg, "data", f.data);
    if (data_dir.empty()) throw ConfigError("benchmark: --data is required");
    const TrajectoryDataset ds = load_dataset_dir(data_dir);
    const json manifest = load_dataset_manifest(data_dir);
    const bool is_maze = manifest.value("kind", "") == "maze";
    MazeSpec maze;
    if (is_maze) maze = maze_from_config(manifest.at("domain"));
    const std::string out = prepare_out_dir(cfg, f.out, "benchmark");

    const std::vector<int> step_counts = cfg.at("benchmark").at("steps").get<std::vector<int>>();
    if (step_counts.empty()) throw ConfigError("benchmark: steps list is empty");
    const int repetitions = cfg.at("benchmark").at("repetitions").get<int>();

    EvalOptions opt;
    opt.num_samples = cfg.at("benchmark").at("num_samples").get<int>();
    opt.max_items = cfg.at("benchmark").at("max_items").get<std::size_t>();
    opt.seed = cfg.at("seed").get<std::uint64_t>();
    opt.constrain_endpoints = cfg.at("sampler").at("constrain_endpoints").get<bool>();
    opt.goal_index = cfg.at("sampler").at("goal_index").get<int>();

    std::ofstream bf(fs::path(out) / "benchmark.csv");
    if (!bf) throw IoError("benchmark: cannot write benchmark.csv");
    std::vector<std::string> bheader{"family", "checkpoint", "num_steps",
                                     "ade",    "min_ade",    "calls_per_sample"};
    if (is_maze) {
        bheader.push_back("maze_score");
        bheader.push_back("collision_rate");
    }
    write_csv_row(bf, bheader);

    std::ofstream lf(fs::path(out) / "latency.csv");
    if (!lf) throw IoError("benchmark: cannot write latency.csv");
    write_csv_row(lf, {"family", "checkpoint", "num_steps", "mean_ms", "std_ms", "ms_per_sample"});

    std::vector<PlotSeries> plot;
    for (const std::string& path : ckpt_paths) {
        ModelCheckpoint ckpt = load_model_checkpoint(path);
        const NetConfig& nc = ckpt.model.net.config();
        if (nc.horizon != ds.horizon || nc.state_dim != ds.state_dim ||
            static_cast<std::size_t>(nc.context_dim) != ds.layout.length()) {
            throw ConfigError("benchmark: dataset shapes do not match " + path);
        }
        const std::string family = to_string(ckpt.model.family);
        PlotSeries series{family, {}};

        double latency_first = 0.0, latency_last = 0.0;
        for (int n : step_counts) {
            const EvalRow row = evaluate_at(ckpt.model, ds, is_maze ? &maze : nullptr, opt, n);

            SampleRequest lat_req;
            lat_req.num_steps = n;
            lat_req.num_samples = 1;
            lat_req.seed = opt.seed;
            const std::size_t item = ds.test_idx.empty() ? 0 : ds.test_idx.front();
            lat_req.context = ds.normalized_context(item);
            if (opt.constrain_endpoints && ds.layout.kind == ContextLayout::Kind::endpoints) {
                PlanConstraint c;
                c.goal_index = opt.goal_index;
                const std::size_t dd = static_cast<std::size_t>(ds.state_dim);
                for (std::size_t j = 0; j < dd; ++j) {
                    c.start.push_back(lat_req.context[j]);
                    c.goal.push_back(lat_req.context[lat_req.context.size() - dd + j]);
                }
                lat_req.constraint = std::move(c);
            }
            const LatencyReport lat = measure_sampling_latency(ckpt.model, lat_req, repetitions);
            if (n == step_counts.front()) latency_first = lat.mean_ms;
            if (n == step_counts.back()) latency_last = lat.mean_ms;

            std::vector<std::string> brow{family,
                                          path,
                                          std::to_string(n),
                                          format_double(row.ade),
                                          format_double(row.min_ade),
                                          format_double(row.network_calls_per_sample)};
            if (is_maze) {
                brow.push_back(format_double(row.maze_score));
                brow.push_back(format_double(row.collision));
            }
            write_csv_row(bf, brow);
            write_csv_row(lf, {family, path, std::to_string(n), format_double(lat.mean_ms),
                               format_double(lat.std_ms), format_double(lat.mean_ms)});
            series.points.emplace_back(n, row.ade);

            std::cout << family << "  steps=" << n << "  ade=" << format_double(row.ade)
                      << "  latency=" << format_double(lat.mean_ms) << "ms\n";
        }
        if (step_counts.size() > 1 && latency_first > 0.0) {
            std::cout << family << ": " << step_counts.back() << "-step sampling costs "
                      << format_double(latency_last / latency_first) << "x the "
                      << step_counts.front() << "-step cost\n";
        }
        plot.push_back(std::move(series));
    }

    write_line_plot_svg((fs::path(out) / "ade_vs_steps.svg").string(),
                        "quality vs integration steps", "integration steps (log)", "ade", plot,
                        /*log_x=*/true);
    json command{{"name", "benchmark"}, {"data", data_dir}};
    command["checkpoints"] = ckpt_paths;
    persist_config(cfg, out, std::move(command));
    std::cout << "wrote " << (fs::path(out) / "benchmark.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory generation: learned transport fields with a diffusion baseline"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "synthesize a trajectory dataset");
    std::string g_config, g_kind, g_out;
    std::int64_t g_count = 0, g_seed = 0;
    gen->add_option("--config", g_config, "run configuration JSON");
    gen->add_option("--kind", g_kind, "domain kind: maze, pursuit, flight or csv");
    gen->add_option("--out", g_out, "output directory");
    auto* g_count_opt = gen->add_option("--count", g_count, "number of trajectories");
    auto* g_seed_opt = gen->add_option("--seed", g_seed, "master seed");

    // train
    auto* tr = app.add_subcommand("train", "fit a model on a generated dataset");
    std::string t_config, t_data, t_out, t_resume, t_family;
    std::int64_t t_steps = 0, t_seed = 0;
    tr->add_option("--config", t_config, "run configuration JSON");
    tr->add_option("--data", t_data, "dataset directory");
    tr->add_option("--out", t_out, "output directory");
    tr->add_option("--resume", t_resume, "checkpoint to continue from");
    tr->add_option("--family", t_family, "model family: flow or ddpm");
    auto* t_steps_opt = tr->add_option("--steps", t_steps, "optimizer steps");
    auto* t_seed_opt = tr->add_option("--seed", t_seed, "master seed");

    // sample
    auto* sa = app.add_subcommand("sample", "draw trajectories from a trained model");
    std::string s_config, s_ckpt, s_data, s_out, s_start, s_goal, s_solver;
    int s_steps = 1, s_samples = 8;
    std::int64_t s_item = 0, s_seed = 0;
    sa->add_option("--config", s_config, "run configuration JSON");
    sa->add_option("--checkpoint", s_ckpt, "model checkpoint");
    sa->add_option("--data", s_data, "dataset directory providing the conditioning");
    sa->add_option("--out", s_out, "output directory");
    sa->add_option("--start", s_start, "planning start, comma-separated raw coordinates");
    sa->add_option("--goal", s_goal, "planning goal, comma-separated raw coordinates");
    sa->add_option("--solver", s_solver, "euler or midpoint");
    auto* s_steps_opt = sa->add_option("--num-steps", s_steps, "integration steps");
    auto* s_samples_opt = sa->add_option("--num-samples", s_samples, "trajectories to draw");
    auto* s_item_opt = sa->add_option("--item", s_item, "test-split item index");
    auto* s_seed_opt = sa->add_option("--seed", s_seed, "sampling seed");

    // eval
    auto* ev = app.add_subcommand("eval", "score a model on the test split");
    EvalFlags ef;
    ev->add_option("--config", ef.config, "run configuration JSON");
    ev->add_option("--checkpoint", ef.checkpoint, "model checkpoint");
    ev->add_option("--data", ef.data, "dataset directory");
    ev->add_option("--out", ef.out, "output directory");
    ev->add_option("--steps", ef.steps, "integration step counts")->delimiter(',');
    auto* e_samples_opt = ev->add_option("--num-samples", ef.num_samples, "samples per item");
    auto* e_items_opt = ev->add_option("--max-items", ef.max_items, "test items to use");
    auto* e_seed_opt = ev->add_option("--seed", ef.seed, "evaluation seed");
    ev->add_flag("--no-constrain", ef.no_constrain, "disable endpoint pinning");

    // benchmark
    auto* be = app.add_subcommand("benchmark", "quality and latency across step counts");
    BenchFlags bf;
    be->add_option("--config", bf.config, "run configuration JSON");
    be->add_option("--checkpoint", bf.checkpoints, "model checkpoint (repeatable)");
    be->add_option("--data", bf.data, "dataset directory");
    be->add_option("--out", bf.out, "output directory");
    be->add_option("--steps", bf.steps, "integration step counts")->delimiter(',');
    auto* b_reps_opt = be->add_option("--repetitions", bf.repetitions, "timing repetitions");
    auto* b_samples_opt = be->add_option("--num-samples", bf.num_samples, "samples per item");
    auto* b_items_opt = be->add_option("--max-items", bf.max_items, "test items to use");
    auto* b_seed_opt = be->add_option("--seed", bf.seed, "evaluation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            return cmd_generate(g_config, g_kind, g_out, g_count, g_seed,
                                g_count_opt->count() > 0, g_seed_opt->count() > 0);
        }
        if (tr->parsed()) {
            return cmd_train(t_config, t_data, t_out, t_resume, t_family, t_steps, t_seed,
                             t_steps_opt->count() > 0, t_seed_opt->count() > 0);
        }
        if (sa->parsed()) {
            return cmd_sample(s_config, s_ckpt, s_data, s_out, s_start, s_goal, s_steps,
                              s_samples, s_item, s_seed, s_solver, s_steps_opt->count() > 0,
                              s_samples_opt->count() > 0, s_seed_opt->count() > 0,
                              s_item_opt->count() > 0);
        }
        if (ev->parsed()) {
            ef.samples_set = e_samples_opt->count() > 0;
            ef.items_set = e_items_opt->count() > 0;
            ef.seed_set = e_seed_opt->count() > 0;
            return cmd_eval(ef);
        }
        if (be->parsed()) {
            bf.reps_set = b_reps_opt->count() > 0;
            bf.samples_set = b_samples_opt->count() > 0;
            bf.items_set = b_items_opt->count() > 0;
            bf.seed_set = b_seed_opt->count() > 0;
            return cmd_benchmark(bf);
        }
        std::cerr << "error: no command\n";
        return 2;
    } catch (const NonFiniteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const GenerationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        // config, domain, usage and shape problems
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: configuration: " << e.what() << "\n";
        return 2;
    }
}
