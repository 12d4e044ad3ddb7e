"""End-to-end smoke tests for the python bindings."""

import numpy as np
import pytest

import trajflow as tf


def tiny_net(horizon=8, state_dim=1, context_dim=0, seed=3):
    cfg = tf.NetConfig()
    cfg.horizon = horizon
    cfg.state_dim = state_dim
    cfg.context_dim = context_dim
    cfg.base_channels = 8
    cfg.depth = 1
    cfg.kernel_size = 3
    cfg.time_embed_dim = 8
    cfg.groups = 4
    return tf.VectorFieldNet.init(cfg, seed=seed)


def test_probability_path_endpoints_and_target():
    rng = tf.SeededRng(1).stream("noise")
    tau0 = np.zeros((4, 2))
    tau1 = np.ones((4, 2))
    start = tf.sample_probability_path(tau0, tau1, 0.0, 0.0, rng)
    end = tf.sample_probability_path(tau0, tau1, 1.0, 0.0, rng)
    assert np.array_equal(start, tau0)
    assert np.array_equal(end, tau1)

    u = tf.target_vector_field(tau0, tau1)
    assert np.array_equal(u, tau1 - tau0)
    assert tf.cfm_loss(u, u) == 0.0
    assert tf.cfm_loss(u + 1.0, u) == pytest.approx(1.0)


def test_fresh_net_is_the_zero_field():
    net = tiny_net()
    traj = np.linspace(-1.0, 1.0, 8).reshape(8, 1)
    assert np.array_equal(net.forward(0.3, traj), np.zeros((8, 1)))
    # Same seed, same parameters: the forward pass is a pure function.
    other = tiny_net()
    assert np.array_equal(other.forward(0.7, traj), net.forward(0.7, traj))


def test_training_reduces_the_loss():
    ds = tf.generate_dataset({"domain": {"kind": "maze", "count": 20, "horizon": 24}})
    net = tiny_net(horizon=24, state_dim=2, context_dim=ds.layout.length())
    opt = tf.AdamState.init(net)
    cfg = tf.TrainerConfig()
    cfg.steps = 60
    cfg.batch_size = 8
    cfg.sigma = 0.0
    seen = []
    losses = tf.train_flow_matching(ds, net, opt, cfg, on_step=lambda s, l: seen.append(s))
    assert len(losses) == 60
    assert seen == list(range(1, 61))
    assert np.mean(losses[-10:]) < losses[0]
    assert opt.step == 60


def test_flow_sampling_counts_calls_and_pins_endpoints():
    net = tiny_net(horizon=8, state_dim=2)
    con = tf.PlanConstraint(start=[-0.5, -0.5], goal=[0.5, 0.5])
    req = tf.SampleRequest(num_steps=4, num_samples=3, constraint=con, seed=9)
    samples, calls = tf.flow_sample(net, req)
    assert calls == 4 * 3
    for s in samples:
        assert s.shape == (8, 2)
        assert np.array_equal(s[0], [-0.5, -0.5])
        assert np.array_equal(s[-1], [0.5, 0.5])
    again, _ = tf.flow_sample(net, req)
    assert all(np.array_equal(a, b) for a, b in zip(samples, again))


def test_ddpm_schedule_and_sampling():
    sched = tf.DiffusionSchedule.cosine(32)
    ab = np.asarray(sched.alpha_bar)
    assert ab[0] == 1.0
    assert np.all(np.diff(ab) < 0.0)
    assert sched.model_time(1) == 0.0
    assert sched.model_time(32) == 1.0

    net = tiny_net(horizon=8, state_dim=2)
    req = tf.SampleRequest(num_steps=5, num_samples=2, seed=4)
    samples, calls = tf.ddpm_sample(net, sched, req)
    assert calls == 5 * 2
    assert samples[0].shape == (8, 2)


def test_maze_dataset_routes_are_collision_free():
    maze = tf.MazeSpec.parse(tf.U_MAZE)
    ds = tf.generate_maze_dataset(maze, count=30, horizon=24, seed=2)
    assert len(ds) == 30
    for i in range(len(ds)):
        assert not tf.trajectory_collides(maze, ds.trajectory(i))
    # context is (start, goal) in raw units
    ctx = ds.context(0)
    traj = ds.trajectory(0)
    assert ctx[:2] == pytest.approx(list(traj[0]))
    assert ctx[2:] == pytest.approx(list(traj[-1]))


def test_metrics_agree_with_hand_values():
    truth = np.zeros((4, 2))
    offset = np.ones((4, 2))
    res = tf.ade([offset, 3.0 * offset], truth)
    assert res.mean == pytest.approx((np.sqrt(2.0) + 3.0 * np.sqrt(2.0)) / 2.0)
    assert res.best == pytest.approx(np.sqrt(2.0))

    maze = tf.MazeSpec.parse(tf.U_MAZE)
    route = tf.maze_route_trajectory(maze, 9, 14, 24)
    goal = maze.center(14)
    expert = tf.maze_goal_reward(maze, route, goal)
    assert expert > 0.0
    assert tf.maze_score(maze, route, goal, expert) == 100.0
    assert tf.collision_rate(maze, [route]) == 0.0


def test_checkpoint_roundtrip(tmp_path):
    ds = tf.generate_dataset({"domain": {"kind": "maze", "count": 20, "horizon": 24}})
    net = tiny_net(horizon=24, state_dim=2, context_dim=ds.layout.length())
    path = str(tmp_path / "model.ckpt")
    tf.save_model_checkpoint(path, net, family="flow", stats=ds.stats, layout=ds.layout,
                             run_config={"seed": 11})
    ckpt = tf.load_model_checkpoint(path)
    assert ckpt.model.family == "flow"
    assert ckpt.layout.kind == "endpoints"
    assert ckpt.run_config["seed"] == 11
    traj = np.linspace(-1.0, 1.0, 48).reshape(24, 2)
    ctx = np.zeros(ds.layout.length())
    assert np.array_equal(ckpt.model.net.forward(0.5, traj, ctx),
                          net.forward(0.5, traj, ctx))


def test_dataset_directory_roundtrip(tmp_path):
    ds = tf.generate_dataset({"domain": {"kind": "flight", "count": 8, "horizon": 12, "past": 3}})
    out = str(tmp_path / "ds")
    tf.save_dataset_dir(out, ds, {"kind": "flight"})
    back = tf.load_dataset_dir(out)
    assert len(back) == len(ds)
    assert back.horizon == ds.horizon
    assert np.array_equal(back.trajectory(3), ds.trajectory(3))


def test_errors_surface_as_python_exceptions():
    with pytest.raises(tf.DomainError):
        tf.time_embed(-0.1, 8)
    with pytest.raises(tf.ConfigError):
        tf.resolve_run_config({"domain": {"kind": "pursuit", "nonsense": 1}})
    with pytest.raises(tf.ShapeError):
        tf.target_vector_field(np.zeros((2, 2)), np.zeros((3, 2)))
    assert issubclass(tf.ConfigError, tf.Error)
