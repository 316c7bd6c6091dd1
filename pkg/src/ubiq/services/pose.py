"""Fixed-size avatar pose payload.

A three-point tracking rig: head, left hand, right hand; each a 3-float
position plus 4-float quaternion, little-endian 32-bit, 84 bytes total.
The fixed layout lets poses be blitted straight to the wire.
"""

import struct
from dataclasses import dataclass
from typing import Tuple

AVATAR_COMPONENT = 5
POSE_SIZE = 84

_POSE = struct.Struct("<21f")

Transform = Tuple[float, float, float, float, float, float, float]  # pos3 + quat4

IDENTITY: Transform = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Pose:
    head: Transform = IDENTITY
    left: Transform = IDENTITY
    right: Transform = IDENTITY


def encode_pose(pose: Pose) -> bytes:
    return _POSE.pack(*pose.head, *pose.left, *pose.right)


def decode_pose(payload: bytes) -> Pose:
    if len(payload) != POSE_SIZE:
        raise ValueError(f"pose payload must be {POSE_SIZE} bytes, got {len(payload)}")
    values = _POSE.unpack(payload)
    return Pose(head=values[0:7], left=values[7:14], right=values[14:21])
