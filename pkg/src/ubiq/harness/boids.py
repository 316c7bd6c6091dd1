"""Distributed boids flock.

Control over agents is split between peers with no central authority:
each peer steps only the boids it owns, using the inertia (global
centroid and mean velocity) of the entire replicated flock, and
broadcasts their states after stepping. Summation runs in ascending boid
id order so every peer computes bit-identical inertia from identical
state sets. Replicas are transported, never re-simulated.
"""

import argparse
import csv
import math
import random
import struct
import sys
from dataclasses import dataclass
from typing import Dict, List, Tuple

from ..rooms import RoomClient
from ..scene import PeerScene
from ..wire import make_address
from .local import LocalRelay

BOIDS_ADDRESS = make_address(6, 1)

Vec3 = Tuple[float, float, float]


class FlockError(Exception):
    pass


class SimulationFaultError(FlockError):
    pass


@dataclass(frozen=True)
class BoidState:
    boid_id: int
    owner_peer: str
    position: Vec3
    velocity: Vec3


@dataclass(frozen=True)
class FlockParams:
    cohesion_w: float = 0.4
    alignment_w: float = 0.6
    separation_w: float = 0.05
    neighbor_radius: float = 2.0
    v_max: float = 5.0
    dt: float = 0.02


def flock_inertia(states: List[BoidState]) -> Tuple[Vec3, Vec3]:
    """Centroid and mean velocity of the whole flock, summed in ascending
    boid id order for cross-peer bit-identity."""
    if not states:
        raise FlockError("inertia of an empty flock is undefined")
    ordered = sorted(states, key=lambda s: s.boid_id)
    px = py = pz = vx = vy = vz = 0.0
    for s in ordered:
        px += s.position[0]
        py += s.position[1]
        pz += s.position[2]
        vx += s.velocity[0]
        vy += s.velocity[1]
        vz += s.velocity[2]
    n = len(ordered)
    return (px / n, py / n, pz / n), (vx / n, vy / n, vz / n)


def _step_boid(boid: BoidState, flock: List[BoidState],
               centroid: Vec3, mean_v: Vec3, params: FlockParams) -> BoidState:
    p, v = boid.position, boid.velocity
    ax = params.cohesion_w * (centroid[0] - p[0]) + params.alignment_w * (mean_v[0] - v[0])
    ay = params.cohesion_w * (centroid[1] - p[1]) + params.alignment_w * (mean_v[1] - v[1])
    az = params.cohesion_w * (centroid[2] - p[2]) + params.alignment_w * (mean_v[2] - v[2])
    if params.separation_w != 0.0:
        for other in flock:
            if other.boid_id == boid.boid_id:
                continue
            dx = p[0] - other.position[0]
            dy = p[1] - other.position[1]
            dz = p[2] - other.position[2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 == 0.0 or d2 > params.neighbor_radius ** 2:
                continue
            ax += params.separation_w * dx / d2
            ay += params.separation_w * dy / d2
            az += params.separation_w * dz / d2
    vx = v[0] + ax * params.dt
    vy = v[1] + ay * params.dt
    vz = v[2] + az * params.dt
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    if speed > params.v_max:
        scale = params.v_max / speed
        vx *= scale
        vy *= scale
        vz *= scale
    new = BoidState(
        boid_id=boid.boid_id,
        owner_peer=boid.owner_peer,
        position=(p[0] + vx * params.dt, p[1] + vy * params.dt, p[2] + vz * params.dt),
        velocity=(vx, vy, vz),
    )
    for value in (*new.position, *new.velocity):
        if not math.isfinite(value):
            raise SimulationFaultError(f"boid {boid.boid_id} went non-finite")
    return new


_BOID = struct.Struct("<I6d")


def _pack_states(owner: str, states: List[BoidState]) -> bytes:
    owner_bytes = owner.encode("utf-8")
    header = struct.pack("<IH", len(states), len(owner_bytes)) + owner_bytes
    body = b"".join(
        _BOID.pack(s.boid_id, *s.position, *s.velocity)
        for s in sorted(states, key=lambda s: s.boid_id))
    return header + body


def _unpack_states(payload: bytes) -> List[BoidState]:
    count, owner_len = struct.unpack_from("<IH", payload)
    offset = 6
    owner = payload[offset : offset + owner_len].decode("utf-8")
    offset += owner_len
    states = []
    for _ in range(count):
        boid_id, px, py, pz, vx, vy, vz = _BOID.unpack_from(payload, offset)
        offset += _BOID.size
        states.append(BoidState(boid_id, owner, (px, py, pz), (vx, vy, vz)))
    return states


class BoidsManager:
    """Per-peer manager holding the whole flock, owning a slice of it."""

    def __init__(self, scene: PeerScene, owner: str, params: FlockParams = None):
        self.scene = scene
        self.owner = owner
        self.params = params or FlockParams()
        self.flock: Dict[int, BoidState] = {}
        self.owned_ids = set()
        self.ctx = scene.register(self, BOIDS_ADDRESS)

    def seed_flock(self, states: List[BoidState]):
        for s in states:
            self.flock[s.boid_id] = s
            if s.owner_peer == self.owner:
                self.owned_ids.add(s.boid_id)

    def receive(self, msg):
        for state in _unpack_states(msg.payload):
            if state.boid_id not in self.owned_ids:
                self.flock[state.boid_id] = state

    def owned_states(self) -> List[BoidState]:
        return [self.flock[i] for i in sorted(self.owned_ids)]

    def step(self):
        """Advance only the locally owned boids against the full flock."""
        states = list(self.flock.values())
        centroid, mean_v = flock_inertia(states)
        for boid_id in sorted(self.owned_ids):
            self.flock[boid_id] = _step_boid(
                self.flock[boid_id], states, centroid, mean_v, self.params)

    def broadcast(self):
        self.scene.send(BOIDS_ADDRESS, _pack_states(self.owner, self.owned_states()))


def initial_flock(num_peers: int, boids_per_peer: int, seed: int) -> List[BoidState]:
    """All peers derive the same initial flock from the shared seed."""
    rng = random.Random(seed)
    states = []
    for peer_index in range(num_peers):
        for j in range(boids_per_peer):
            states.append(BoidState(
                boid_id=peer_index * boids_per_peer + j,
                owner_peer=f"peer-{peer_index}",
                position=tuple(rng.uniform(-10.0, 10.0) for _ in range(3)),
                velocity=tuple(rng.uniform(-1.0, 1.0) for _ in range(3)),
            ))
    return states


def simulate(num_peers: int, boids_per_peer: int, steps: int, seed: int,
             params: FlockParams = None, on_exchange=None) -> List["BoidsManager"]:
    """Step-synchronized flock over an in-process relay: every round each
    peer steps its boids, broadcasts, and all peers converge before the
    next round. on_exchange(step, managers) runs at each exchange point."""
    relay = LocalRelay()
    managers = []
    code = None
    for peer_index in range(num_peers):
        scene = PeerScene(random.Random(seed * 7919 + peer_index))
        client = RoomClient(scene)
        relay.connect(scene)
        if code is None:
            client.join(name="boids", publish=False)
            relay.pump()
            code = client.room.joincode
        else:
            client.join(joincode=code)
            relay.pump()
        manager = BoidsManager(scene, f"peer-{peer_index}", params)
        manager.seed_flock(initial_flock(num_peers, boids_per_peer, seed))
        managers.append(manager)

    if on_exchange is not None:
        on_exchange(0, managers)
    for step in range(1, steps + 1):
        for manager in managers:
            manager.step()
        for manager in managers:
            manager.broadcast()
        relay.pump()
        if on_exchange is not None:
            on_exchange(step, managers)
    return managers


def flock_snapshot(manager: BoidsManager) -> List[BoidState]:
    return [manager.flock[i] for i in sorted(manager.flock)]


def velocity_variance(states: List[BoidState]) -> float:
    _, mean_v = flock_inertia(states)
    total = 0.0
    for s in states:
        dx = s.velocity[0] - mean_v[0]
        dy = s.velocity[1] - mean_v[1]
        dz = s.velocity[2] - mean_v[2]
        total += dx * dx + dy * dy + dz * dz
    return total / len(states)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ubiq-boids", description="distributed boids flock demo")
    parser.add_argument("--peers", type=int, default=3)
    parser.add_argument("--boids-per-peer", type=int, default=10)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--report", default=None, help="per-step CSV output")
    args = parser.parse_args(argv)

    rows = []

    def record(step, managers):
        states = flock_snapshot(managers[0])
        centroid, mean_v = flock_inertia(states)
        rows.append([step, *centroid, *mean_v, velocity_variance(states)])

    managers = simulate(args.peers, args.boids_per_peer, args.steps, args.seed,
                        on_exchange=record)
    reference = flock_snapshot(managers[0])
    consistent = all(flock_snapshot(m) == reference for m in managers[1:])
    print(f"peers={args.peers} boids={args.peers * args.boids_per_peer} "
          f"steps={args.steps} consistent={consistent} "
          f"velocity_variance={rows[-1][-1]:.6f}")
    if args.report:
        with open(args.report, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["step", "cx", "cy", "cz", "vx", "vy", "vz",
                             "velocity_variance"])
            writer.writerows(rows)
    return 0 if consistent else 1


if __name__ == "__main__":
    sys.exit(main())
