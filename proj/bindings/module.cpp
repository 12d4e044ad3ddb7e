#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trajflow/cfm.hpp"
#include "trajflow/checkpoint.hpp"
#include "trajflow/dataset_io.hpp"
#include "trajflow/diffusion.hpp"
#include "trajflow/errors.hpp"
#include "trajflow/evalrun.hpp"
#include "trajflow/maze.hpp"
#include "trajflow/metrics.hpp"
#include "trajflow/runconfig.hpp"
#include "trajflow/sampler.hpp"

namespace py = pybind11;
using namespace trajflow;

namespace {

Array array_from_numpy(const py::array& a) {
    const py::array_t<double> arr = py::array_t<double, py::array::c_style | py::array::forcecast>(a);
    std::vector<std::size_t> shape(arr.ndim());
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(arr.shape(i));
    std::vector<double> data(static_cast<std::size_t>(arr.size()));
    std::memcpy(data.data(), arr.data(), data.size() * sizeof(double));
    return Array(std::move(shape), std::move(data));
}

py::array_t<double> array_to_numpy(const Array& a) {
    std::vector<py::ssize_t> shape(a.ndim());
    for (std::size_t i = 0; i < a.ndim(); ++i) shape[i] = static_cast<py::ssize_t>(a.dim(i));
    py::array_t<double> out(shape);
    std::memcpy(out.mutable_data(), a.data(), a.size() * sizeof(double));
    return out;
}

std::vector<Array> arrays_from_list(const std::vector<py::array>& xs) {
    std::vector<Array> out;
    out.reserve(xs.size());
    for (const py::array& x : xs) out.push_back(array_from_numpy(x));
    return out;
}

py::list arrays_to_list(const std::vector<Array>& xs) {
    py::list out;
    for (const Array& x : xs) out.append(array_to_numpy(x));
    return out;
}

// json <-> python via the json module; fidelity matters more than speed here.
py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json json_from_py(const py::object& obj) {
    const std::string s =
        py::cast<std::string>(py::module_::import("json").attr("dumps")(obj));
    return nlohmann::json::parse(s);
}

Solver solver_from_string(const std::string& s) {
    if (s == "euler") return Solver::euler;
    if (s == "midpoint") return Solver::midpoint;
    throw ConfigError("solver: expected 'euler' or 'midpoint', got '" + s + "'");
}

std::string solver_to_string(Solver s) {
    return s == Solver::euler ? "euler" : "midpoint";
}

}  // namespace

PYBIND11_MODULE(_trajflow, m) {
    m.doc() = "Trajectory generation with conditional flow matching and a diffusion baseline";

    // Base first so the derived translators are consulted before it.
    const py::object base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<NonFiniteError>(m, "NonFiniteError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception<GenerationError>(m, "GenerationError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<SeededRng>(m, "SeededRng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("stream",
             [](const SeededRng& r, const std::string& purpose) { return r.stream(purpose); },
             py::arg("purpose"))
        .def("substream",
             [](const SeededRng& r, std::uint64_t index) { return r.stream(index); },
             py::arg("index"))
        .def("uniform", [](SeededRng& r) { return r.uniform(); })
        .def("uniform_int", &SeededRng::uniform_int, py::arg("n"))
        .def("normal", &SeededRng::normal)
        .def("normal_array",
             [](SeededRng& r, const std::vector<std::size_t>& shape) {
                 return array_to_numpy(r.normal_array(shape));
             },
             py::arg("shape"));

    py::class_<NetConfig>(m, "NetConfig")
        .def(py::init<>())
        .def_readwrite("horizon", &NetConfig::horizon)
        .def_readwrite("state_dim", &NetConfig::state_dim)
        .def_readwrite("context_dim", &NetConfig::context_dim)
        .def_readwrite("base_channels", &NetConfig::base_channels)
        .def_readwrite("depth", &NetConfig::depth)
        .def_readwrite("kernel_size", &NetConfig::kernel_size)
        .def_readwrite("time_embed_dim", &NetConfig::time_embed_dim)
        .def_readwrite("groups", &NetConfig::groups)
        .def("validate", &NetConfig::validate);

    py::class_<VectorFieldNet>(m, "VectorFieldNet")
        .def_static("init",
                    [](const NetConfig& cfg, std::uint64_t seed) {
                        SeededRng rng = SeededRng(seed).stream("init");
                        return VectorFieldNet::init(cfg, rng);
                    },
                    py::arg("config"), py::arg("seed") = 0)
        .def("forward",
             [](const VectorFieldNet& net, double t, const py::array& traj,
                const std::optional<py::array>& context) {
                 const Array ctx = context ? array_from_numpy(*context) : Array();
                 return array_to_numpy(net.forward(t, array_from_numpy(traj), ctx));
             },
             py::arg("t"), py::arg("trajectory"), py::arg("context") = std::nullopt)
        .def_property_readonly("config", &VectorFieldNet::config)
        .def_property_readonly("num_params", [](const VectorFieldNet& net) {
            std::size_t n = 0;
            for (const auto& [name, arr] : net.params().entries()) n += arr.size();
            return n;
        });

    py::class_<AdamState>(m, "AdamState")
        .def_static("init",
                    [](const VectorFieldNet& net) { return AdamState::init(net.params()); },
                    py::arg("net"))
        .def_readonly("step", &AdamState::step);

    py::class_<TrainerConfig>(m, "TrainerConfig")
        .def(py::init<>())
        .def_readwrite("sigma", &TrainerConfig::sigma)
        .def_readwrite("batch_size", &TrainerConfig::batch_size)
        .def_readwrite("steps", &TrainerConfig::steps)
        .def_readwrite("seed", &TrainerConfig::seed)
        .def_readwrite("checkpoint_every", &TrainerConfig::checkpoint_every)
        .def_property(
            "lr", [](const TrainerConfig& c) { return c.adam.lr; },
            [](TrainerConfig& c, double v) { c.adam.lr = v; })
        .def("validate", &TrainerConfig::validate);

    m.def("time_embed",
          [](double t, int dim) { return array_to_numpy(time_embed(t, dim)); }, py::arg("t"),
          py::arg("dim"));

    m.def("sample_probability_path",
          [](const py::array& tau0, const py::array& tau1, double t, double sigma,
             SeededRng& rng) {
              return array_to_numpy(
                  sample_probability_path(array_from_numpy(tau0), array_from_numpy(tau1), t,
                                          sigma, rng));
          },
          py::arg("tau0"), py::arg("tau1"), py::arg("t"), py::arg("sigma"), py::arg("rng"));

    m.def("target_vector_field",
          [](const py::array& tau0, const py::array& tau1) {
              return array_to_numpy(
                  target_vector_field(array_from_numpy(tau0), array_from_numpy(tau1)));
          },
          py::arg("tau0"), py::arg("tau1"));

    m.def("cfm_loss",
          [](const py::array& predicted, const py::array& target) {
              return cfm_loss(array_from_numpy(predicted), array_from_numpy(target));
          },
          py::arg("predicted"), py::arg("target"));

    m.def("train_flow_matching",
          [](const TrajectoryDataset& data, VectorFieldNet& net, AdamState& opt,
             const TrainerConfig& cfg, const py::object& on_step) {
              TrainHooks hooks;
              if (!on_step.is_none()) {
                  hooks.on_step = [on_step](std::int64_t step, double loss) {
                      on_step(step, loss);
                  };
              }
              return train_flow_matching(data, net, opt, cfg, hooks).losses;
          },
          py::arg("data"), py::arg("net"), py::arg("opt"), py::arg("config"),
          py::arg("on_step") = py::none());

    py::class_<DiffusionSchedule>(m, "DiffusionSchedule")
        .def_static("cosine", &DiffusionSchedule::cosine, py::arg("timesteps"))
        .def_readonly("timesteps", &DiffusionSchedule::timesteps)
        .def_readonly("alpha_bar", &DiffusionSchedule::alpha_bar)
        .def("model_time", &DiffusionSchedule::model_time, py::arg("k"));

    m.def("train_diffusion",
          [](const TrajectoryDataset& data, VectorFieldNet& net, const DiffusionSchedule& sched,
             AdamState& opt, const TrainerConfig& cfg, const py::object& on_step) {
              TrainHooks hooks;
              if (!on_step.is_none()) {
                  hooks.on_step = [on_step](std::int64_t step, double loss) {
                      on_step(step, loss);
                  };
              }
              return train_diffusion(data, net, sched, opt, cfg, hooks).losses;
          },
          py::arg("data"), py::arg("net"), py::arg("schedule"), py::arg("opt"),
          py::arg("config"), py::arg("on_step") = py::none());

    py::class_<PlanConstraint>(m, "PlanConstraint")
        .def(py::init([](std::vector<double> start, std::vector<double> goal, int goal_index) {
                 PlanConstraint c;
                 c.start = std::move(start);
                 c.goal = std::move(goal);
                 c.goal_index = goal_index;
                 return c;
             }),
             py::arg("start"), py::arg("goal"), py::arg("goal_index") = -1)
        .def_readwrite("start", &PlanConstraint::start)
        .def_readwrite("goal", &PlanConstraint::goal)
        .def_readwrite("goal_index", &PlanConstraint::goal_index);

    py::class_<SampleRequest>(m, "SampleRequest")
        .def(py::init([](const std::optional<py::array>& context, int num_steps, int num_samples,
                         const std::optional<PlanConstraint>& constraint,
                         const std::string& solver, std::uint64_t seed) {
                 SampleRequest req;
                 if (context) req.context = array_from_numpy(*context);
                 req.num_steps = num_steps;
                 req.num_samples = num_samples;
                 req.constraint = constraint;
                 req.solver = solver_from_string(solver);
                 req.seed = seed;
                 return req;
             }),
             py::arg("context") = std::nullopt, py::arg("num_steps") = 1,
             py::arg("num_samples") = 1, py::arg("constraint") = std::nullopt,
             py::arg("solver") = "euler", py::arg("seed") = 0)
        .def_readwrite("num_steps", &SampleRequest::num_steps)
        .def_readwrite("num_samples", &SampleRequest::num_samples)
        .def_readwrite("constraint", &SampleRequest::constraint)
        .def_readwrite("seed", &SampleRequest::seed)
        .def_property(
            "solver", [](const SampleRequest& r) { return solver_to_string(r.solver); },
            [](SampleRequest& r, const std::string& s) { r.solver = solver_from_string(s); })
        .def_property(
            "context", [](const SampleRequest& r) { return array_to_numpy(r.context); },
            [](SampleRequest& r, const py::array& a) { r.context = array_from_numpy(a); });

    m.def("step_time_schedule", &step_time_schedule, py::arg("num_steps"));

    m.def("flow_sample",
          [](const VectorFieldNet& net, const SampleRequest& req) {
              SampleStats stats;
              py::list samples = arrays_to_list(flow_sample(net, req, &stats));
              return py::make_tuple(samples, stats.network_calls);
          },
          py::arg("net"), py::arg("request"),
          "Returns (samples, network_calls); samples are in normalized units.");

    m.def("ddpm_sample",
          [](const VectorFieldNet& net, const DiffusionSchedule& sched,
             const SampleRequest& req) {
              SampleStats stats;
              py::list samples = arrays_to_list(ddpm_sample(net, sched, req, &stats));
              return py::make_tuple(samples, stats.network_calls);
          },
          py::arg("net"), py::arg("schedule"), py::arg("request"));

    py::class_<GenerativeModel>(m, "GenerativeModel")
        .def_property_readonly("family",
                               [](const GenerativeModel& g) { return to_string(g.family); })
        .def_readonly("net", &GenerativeModel::net)
        .def_readonly("schedule", &GenerativeModel::schedule)
        .def("sample", [](const GenerativeModel& g, const SampleRequest& req) {
            SampleStats stats;
            py::list samples = arrays_to_list(g.sample(req, &stats));
            return py::make_tuple(samples, stats.network_calls);
        });

    py::class_<NormStats>(m, "NormStats")
        .def_readonly("lo", &NormStats::lo)
        .def_readonly("hi", &NormStats::hi)
        .def("normalize",
             [](const NormStats& s, const py::array& a) {
                 return array_to_numpy(s.normalize(array_from_numpy(a)));
             },
             py::arg("trajectory"))
        .def("denormalize",
             [](const NormStats& s, const py::array& a) {
                 return array_to_numpy(s.denormalize(array_from_numpy(a)));
             },
             py::arg("trajectory"));

    py::class_<ContextLayout>(m, "ContextLayout")
        .def_property_readonly("kind",
                               [](const ContextLayout& l) { return to_string(l.kind); })
        .def_readonly("slots", &ContextLayout::slots)
        .def_readonly("state_dim", &ContextLayout::state_dim)
        .def("length", &ContextLayout::length)
        .def("normalize", &ContextLayout::normalize, py::arg("raw"), py::arg("stats"));

    py::class_<TrajectoryDataset>(m, "TrajectoryDataset")
        .def_readonly("horizon", &TrajectoryDataset::horizon)
        .def_readonly("state_dim", &TrajectoryDataset::state_dim)
        .def_readonly("layout", &TrajectoryDataset::layout)
        .def_readonly("stats", &TrajectoryDataset::stats)
        .def_readonly("train_idx", &TrajectoryDataset::train_idx)
        .def_readonly("val_idx", &TrajectoryDataset::val_idx)
        .def_readonly("test_idx", &TrajectoryDataset::test_idx)
        .def("__len__", &TrajectoryDataset::size)
        .def("trajectory",
             [](const TrajectoryDataset& d, std::size_t i) {
                 return array_to_numpy(d.trajectories.at(i));
             },
             py::arg("i"))
        .def("context",
             [](const TrajectoryDataset& d, std::size_t i) { return d.contexts.at(i); },
             py::arg("i"))
        .def("normalized_trajectory",
             [](const TrajectoryDataset& d, std::size_t i) {
                 return array_to_numpy(d.normalized_trajectory(i));
             },
             py::arg("i"))
        .def("normalized_context", [](const TrajectoryDataset& d, std::size_t i) {
            return array_to_numpy(d.normalized_context(i));
        }, py::arg("i"));

    m.def("default_run_config",
          [](const std::string& kind) { return json_to_py(default_run_config(kind)); },
          py::arg("domain_kind"));
    m.def("resolve_run_config",
          [](const py::object& user) { return json_to_py(resolve_run_config(json_from_py(user))); },
          py::arg("config"));
    m.def("generate_dataset",
          [](const py::object& cfg) { return generate_dataset(resolve_run_config(json_from_py(cfg))); },
          py::arg("config"), "Resolves the config, then generates the described dataset.");
    m.def("save_dataset_dir",
          [](const std::string& dir, const TrajectoryDataset& ds, const py::object& extra) {
              save_dataset_dir(dir, ds, extra.is_none() ? nlohmann::json::object()
                                                        : json_from_py(extra));
          },
          py::arg("dir"), py::arg("dataset"), py::arg("extra") = py::none());
    m.def("load_dataset_dir", &load_dataset_dir, py::arg("dir"));

    py::class_<ModelCheckpoint>(m, "ModelCheckpoint")
        .def_readonly("model", &ModelCheckpoint::model)
        .def_readonly("stats", &ModelCheckpoint::stats)
        .def_readonly("layout", &ModelCheckpoint::layout)
        .def_readonly("trained_steps", &ModelCheckpoint::trained_steps)
        .def_property_readonly("run_config", [](const ModelCheckpoint& c) {
            return c.run_config.is_null() ? py::object(py::none()) : json_to_py(c.run_config);
        });
    m.def("load_model_checkpoint", &load_model_checkpoint, py::arg("path"));
    m.def("save_model_checkpoint",
          [](const std::string& path, const VectorFieldNet& net, const std::string& family,
             const std::optional<DiffusionSchedule>& schedule,
             const std::optional<NormStats>& stats, const std::optional<ContextLayout>& layout,
             const std::optional<AdamState>& opt, std::int64_t trained_steps,
             const py::object& run_config) {
              ModelCheckpoint ckpt;
              ckpt.model.family = family_from_string(family);
              ckpt.model.net = net;
              if (schedule) ckpt.model.schedule = *schedule;
              if (stats) ckpt.stats = *stats;
              if (layout) ckpt.layout = *layout;
              ckpt.opt = opt ? *opt : AdamState::init(net.params());
              ckpt.trained_steps = trained_steps;
              if (!run_config.is_none()) ckpt.run_config = json_from_py(run_config);
              save_model_checkpoint(path, ckpt);
          },
          py::arg("path"), py::arg("net"), py::arg("family") = "flow",
          py::arg("schedule") = std::nullopt, py::arg("stats") = std::nullopt,
          py::arg("layout") = std::nullopt, py::arg("opt") = std::nullopt,
          py::arg("trained_steps") = 0, py::arg("run_config") = py::none());

    py::class_<MazeSpec>(m, "MazeSpec")
        .def_static("parse", &MazeSpec::parse, py::arg("text"), py::arg("cell_size") = 1.0)
        .def_static("load_file", &MazeSpec::load_file, py::arg("path"),
                    py::arg("cell_size") = 1.0)
        .def_readonly("rows", &MazeSpec::rows)
        .def_readonly("cols", &MazeSpec::cols)
        .def_readonly("cell_size", &MazeSpec::cell_size)
        .def_readonly("starts", &MazeSpec::starts)
        .def_readonly("goals", &MazeSpec::goals)
        .def("occupied", &MazeSpec::occupied, py::arg("row"), py::arg("col"))
        .def("center", &MazeSpec::center, py::arg("cell"))
        .def("free_cells", &MazeSpec::free_cells);

    m.attr("U_MAZE") = std::string(kUMaze);
    m.attr("BUILTIN_MAZE") = std::string(kBuiltinMaze);

    m.def("maze_route_trajectory",
          [](const MazeSpec& maze, std::size_t from, std::size_t to, int horizon, double jx,
             double jy) { return array_to_numpy(maze_route_trajectory(maze, from, to, horizon, jx, jy)); },
          py::arg("maze"), py::arg("from_cell"), py::arg("to_cell"), py::arg("horizon"),
          py::arg("jitter_x") = 0.0, py::arg("jitter_y") = 0.0);
    m.def("generate_maze_dataset",
          [](const MazeSpec& maze, std::size_t n, int horizon, std::uint64_t seed) {
              return generate_maze_dataset(maze, n, horizon, SeededRng(seed));
          },
          py::arg("maze"), py::arg("count"), py::arg("horizon"), py::arg("seed") = 0);
    m.def("trajectory_collides",
          [](const MazeSpec& maze, const py::array& traj) {
              return trajectory_collides(maze, array_from_numpy(traj));
          },
          py::arg("maze"), py::arg("trajectory"));

    py::class_<AdeResult>(m, "AdeResult")
        .def_readonly("mean", &AdeResult::mean)
        .def_readonly("best", &AdeResult::best)
        .def_readonly("per_step", &AdeResult::per_step);
    m.def("ade",
          [](const std::vector<py::array>& samples, const py::array& truth) {
              return ade(arrays_from_list(samples), array_from_numpy(truth));
          },
          py::arg("samples"), py::arg("truth"));

    py::class_<HorizonError>(m, "HorizonError")
        .def_readonly("dim", &HorizonError::dim)
        .def_readonly("step", &HorizonError::step)
        .def_readonly("mae", &HorizonError::mae)
        .def_readonly("rmse", &HorizonError::rmse);
    m.def("mae_rmse_at",
          [](const std::vector<py::array>& samples, const py::array& truth,
             const std::vector<std::size_t>& steps) {
              return mae_rmse_at(arrays_from_list(samples), array_from_numpy(truth), steps);
          },
          py::arg("samples"), py::arg("truth"), py::arg("steps"));

    m.def("maze_goal_reward",
          [](const MazeSpec& maze, const py::array& traj, const std::array<double, 2>& goal) {
              return maze_goal_reward(maze, array_from_numpy(traj), goal);
          },
          py::arg("maze"), py::arg("trajectory"), py::arg("goal"));
    m.def("maze_score",
          [](const MazeSpec& maze, const py::array& traj, const std::array<double, 2>& goal,
             double expert_reward) {
              return maze_score(maze, array_from_numpy(traj), goal, expert_reward);
          },
          py::arg("maze"), py::arg("trajectory"), py::arg("goal"), py::arg("expert_reward"));
    m.def("collision_rate",
          [](const MazeSpec& maze, const std::vector<py::array>& samples) {
              return collision_rate(maze, arrays_from_list(samples));
          },
          py::arg("maze"), py::arg("samples"));

    py::class_<EvalOptions>(m, "EvalOptions")
        .def(py::init<>())
        .def_readwrite("num_samples", &EvalOptions::num_samples)
        .def_readwrite("max_items", &EvalOptions::max_items)
        .def_readwrite("seed", &EvalOptions::seed)
        .def_readwrite("constrain_endpoints", &EvalOptions::constrain_endpoints)
        .def_readwrite("goal_index", &EvalOptions::goal_index);

    py::class_<EvalRow>(m, "EvalRow")
        .def_readonly("num_steps", &EvalRow::num_steps)
        .def_readonly("ade", &EvalRow::ade)
        .def_readonly("min_ade", &EvalRow::min_ade)
        .def_readonly("ade_per_step", &EvalRow::ade_per_step)
        .def_readonly("network_calls_per_sample", &EvalRow::network_calls_per_sample)
        .def_readonly("has_maze", &EvalRow::has_maze)
        .def_readonly("maze_score", &EvalRow::maze_score)
        .def_readonly("collision", &EvalRow::collision)
        .def_readonly("horizon_errors", &EvalRow::horizon_errors);

    m.def("evaluate_at",
          [](const GenerativeModel& model, const TrajectoryDataset& ds,
             const std::optional<MazeSpec>& maze, const EvalOptions& opt, int num_steps) {
              return evaluate_at(model, ds, maze ? &*maze : nullptr, opt, num_steps);
          },
          py::arg("model"), py::arg("dataset"), py::arg("maze"), py::arg("options"),
          py::arg("num_steps"));
}
