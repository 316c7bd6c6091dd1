from .local import LocalRelay
from .boids import (
    BOIDS_ADDRESS,
    BoidsManager,
    BoidState,
    FlockError,
    FlockParams,
    SimulationFaultError,
    flock_inertia,
    flock_snapshot,
    initial_flock,
    simulate,
    velocity_variance,
)
from .bot import BOT_POSE_ADDRESS, BotConfig, BotError, bot_run, bot_run_async
from .capacity import capacity_report, merge_summaries, summary_to_result

__all__ = [
    "LocalRelay",
    "BOIDS_ADDRESS",
    "BoidsManager",
    "BoidState",
    "FlockError",
    "FlockParams",
    "SimulationFaultError",
    "flock_inertia",
    "flock_snapshot",
    "initial_flock",
    "simulate",
    "velocity_variance",
    "BOT_POSE_ADDRESS",
    "BotConfig",
    "BotError",
    "bot_run",
    "bot_run_async",
    "capacity_report",
    "merge_summaries",
    "summary_to_result",
]
