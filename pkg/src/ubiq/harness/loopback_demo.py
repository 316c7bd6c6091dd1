"""Local loopback demo: two peers in one process.

Builds two scene-graph branches, each resolving to its own peer scene,
joins both to one room through an in-process relay (or a real server
with --server), and exchanges spawn, pose and log traffic, asserting the
distributed behaviour end to end. Exit status 0 means all checks passed.
"""

import argparse
import asyncio
import os
import random
import sys
import tempfile

from ..rooms import RoomClient
from ..scene import PeerScene, SceneNode, resolve_scene
from ..services import (
    AVATAR_COMPONENT,
    BlueprintRegistry,
    EventLogger,
    LatencyMeter,
    LogCollector,
    Pose,
    Spawner,
    decode_pose,
    encode_pose,
)
from ..transport import ConnectionSpec, connect
from ..wire import make_address
from .local import LocalRelay


class DemoFailure(AssertionError):
    pass


def check(condition, label):
    if not condition:
        raise DemoFailure(label)


class _Firework:
    def __init__(self, network_id):
        self.network_id = network_id


async def run_demo(server=None, sabotage=False) -> int:
    # two branches under one root, each with its own peer scene
    root = SceneNode("root")
    scenes = []
    for name in ("red", "blue"):
        branch = SceneNode(name, parent=root)
        network = SceneNode(f"{name}.network", parent=branch)
        scene = network.attach(PeerScene(random.Random()))
        content = SceneNode(f"{name}.content", parent=branch)
        check(resolve_scene(content) is scene, f"scene resolution in branch {name}")
        scenes.append(scene)
    red, blue = scenes
    check(resolve_scene(root) is red, "pre-order resolution picks the first branch")

    clients = [RoomClient(scene) for scene in scenes]

    if server is None:
        relay = LocalRelay()
        for scene in scenes:
            relay.connect(scene)

        async def pump():
            relay.pump()
    else:
        host, _, port = server.partition(":")
        spec = ConnectionSpec("tcp", host, int(port))
        for scene in scenes:
            await connect(scene, spec)

        async def pump():
            for _ in range(50):
                for scene in scenes:
                    scene.dispatch()
                await asyncio.sleep(0.01)

    # rendezvous through a shared room
    clients[0].join(name="loopback-demo", publish=False)
    await pump()
    check(clients[0].room is not None, "room creation")
    check(len(clients[0].room.joincode) == 3, "three-digit join code")
    clients[1].join(joincode=clients[0].room.joincode)
    await pump()
    check(clients[1].room is not None, "join by code")
    check(list(clients[0].peers) == [clients[1].me.uuid], "peer visibility red->blue")
    check(list(clients[1].peers) == [clients[0].me.uuid], "peer visibility blue->red")

    # replicated spawning
    def registry():
        r = BlueprintRegistry()
        r.add("firework", _Firework)
        return r

    spawners = [Spawner(scene, registry()) for scene in scenes]
    network_id = spawners[0].spawn("firework")
    await pump()
    expected_instances = 2 if sabotage else 1
    check(len(spawners[1].instances) == expected_instances,
          "spawn replicated to the other peer")
    check(network_id in spawners[1].instances, "replica bound to the carried id")

    # pose traffic, addressed under the sender's scene id
    received_poses = []
    blue.register(lambda m: received_poses.append(decode_pose(m.payload)),
                  make_address(red.scene_id.value, AVATAR_COMPONENT))
    pose = Pose(head=(0.0, 1.5, 0.0, 0.0, 0.0, 0.0, 1.0))
    red.send(make_address(red.scene_id.value, AVATAR_COMPONENT), encode_pose(pose))
    await pump()
    check(received_poses == [pose], "pose delivered and decoded")

    # structured logs collected at one peer
    loggers = [EventLogger(client.me.uuid, scene=scene)
               for scene, client in zip(scenes, clients)]
    collector = LogCollector(red, room_client=clients[0])
    collector.start()
    await pump()
    for logger in loggers:
        logger.log("DemoEvent", {"source": logger.peer_uuid})
    await pump()
    with tempfile.NamedTemporaryFile(suffix=".jsonl", delete=False) as f:
        out_path = f.name
    try:
        check(collector.flush(out_path) == 2, "both peers' events collected")
    finally:
        os.unlink(out_path)

    # half-RTT latency metering stays tiny in process
    meters = [LatencyMeter(scene, client)
              for scene, client in zip(scenes, clients)]
    meters[0].tick()
    await pump()
    samples = meters[0].matrix.samples
    check(len(samples) == 1, "latency sample recorded")
    check(next(iter(samples.values()))["last"] < 100.0, "in-process latency bound")

    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ubiq-loopback-demo",
        description="two peers in one process exchanging room, spawn, pose "
                    "and log traffic")
    parser.add_argument("--server", default=None,
                        help="host:port of an external relay (default: in-process)")
    parser.add_argument("--sabotage", action="store_true",
                        help="deliberately fail one assertion (self-test)")
    args = parser.parse_args(argv)
    try:
        result = asyncio.run(run_demo(server=args.server, sabotage=args.sabotage))
    except DemoFailure as e:
        print(f"FAILED: {e}", file=sys.stderr)
        return 1
    print("loopback demo: all checks passed")
    return result


if __name__ == "__main__":
    sys.exit(main())
