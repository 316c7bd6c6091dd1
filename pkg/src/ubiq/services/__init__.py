from .spawner import (
    SPAWNER_ADDRESS,
    BlueprintRegistry,
    SpawnError,
    Spawner,
    UnknownBlueprintError,
)
from .event_log import (
    COLLECTOR_SINK_COMPONENT,
    LOG_ANNOUNCE_ADDRESS,
    REQUIRED_FIELDS,
    EventLogger,
    LogCollector,
)
from .latency import LATENCY_COMPONENT, LatencyMatrix, LatencyMeter
from .pose import AVATAR_COMPONENT, POSE_SIZE, Pose, decode_pose, encode_pose
from .stats import StatsMonitor, StatsSample

__all__ = [
    "SPAWNER_ADDRESS",
    "BlueprintRegistry",
    "SpawnError",
    "Spawner",
    "UnknownBlueprintError",
    "COLLECTOR_SINK_COMPONENT",
    "LOG_ANNOUNCE_ADDRESS",
    "REQUIRED_FIELDS",
    "EventLogger",
    "LogCollector",
    "LATENCY_COMPONENT",
    "LatencyMatrix",
    "LatencyMeter",
    "AVATAR_COMPONENT",
    "POSE_SIZE",
    "Pose",
    "decode_pose",
    "encode_pose",
    "StatsMonitor",
    "StatsSample",
]
