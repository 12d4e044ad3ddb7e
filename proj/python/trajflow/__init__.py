"""Trajectory generation with conditional flow matching and a diffusion baseline.

Thin re-export of the compiled `_trajflow` extension. Trajectories are numpy
arrays of shape [horizon, state_dim]; sampling functions return
(list_of_samples, network_calls) tuples.
"""

from ._trajflow import (  # noqa: F401
    AdamState,
    AdeResult,
    BUILTIN_MAZE,
    ConfigError,
    ContextLayout,
    DataError,
    DiffusionSchedule,
    DomainError,
    Error,
    EvalOptions,
    EvalRow,
    GenerationError,
    GenerativeModel,
    HorizonError,
    IoError,
    MazeSpec,
    ModelCheckpoint,
    NetConfig,
    NonFiniteError,
    NormStats,
    PlanConstraint,
    SampleRequest,
    SchemaError,
    SeededRng,
    ShapeError,
    TrainerConfig,
    TrajectoryDataset,
    U_MAZE,
    UsageError,
    VectorFieldNet,
    ade,
    cfm_loss,
    collision_rate,
    ddpm_sample,
    default_run_config,
    evaluate_at,
    flow_sample,
    generate_dataset,
    generate_maze_dataset,
    load_dataset_dir,
    load_model_checkpoint,
    mae_rmse_at,
    maze_goal_reward,
    maze_route_trajectory,
    maze_score,
    resolve_run_config,
    sample_probability_path,
    save_dataset_dir,
    save_model_checkpoint,
    step_time_schedule,
    target_vector_field,
    time_embed,
    train_diffusion,
    train_flow_matching,
    trajectory_collides,
)

__all__ = [name for name in dir() if not name.startswith("_")]
