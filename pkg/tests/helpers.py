"""Shared async test utilities."""

import asyncio
import random
import socket

from ubiq.rooms import RoomClient
from ubiq.scene import PeerScene
from ubiq.transport import ConnectionSpec, connect


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class AsyncPeer:
    """Scene + room client attached to a real relay over TCP/WebSocket."""

    def __init__(self, seed=None):
        self.scene = PeerScene(random.Random(seed))
        self.client = RoomClient(self.scene)
        self.connection = None

    async def connect(self, port, kind="tcp", host="127.0.0.1"):
        self.connection = await connect(self.scene, ConnectionSpec(kind, host, port))
        return self

    def dispatch(self):
        return self.scene.dispatch()


async def pump_until(predicate, scenes, timeout=5.0, interval=0.005):
    """Dispatch scenes until predicate() holds; raises on timeout."""
    loop = asyncio.get_running_loop()
    deadline = loop.time() + timeout
    while True:
        for scene in scenes:
            scene.dispatch()
        if predicate():
            return
        if loop.time() > deadline:
            raise TimeoutError("condition not reached before timeout")
        await asyncio.sleep(interval)


async def settle(scenes, rounds=20, interval=0.005):
    """Dispatch scenes for a fixed number of rounds."""
    for _ in range(rounds):
        for scene in scenes:
            scene.dispatch()
        await asyncio.sleep(interval)


async def join_room(peers, name="test-room", publish=False):
    """First peer creates the room; the rest join by code."""
    creator = peers[0]
    creator.client.join(name=name, publish=publish)
    await pump_until(lambda: creator.client.room is not None,
                     [p.scene for p in peers])
    code = creator.client.room.joincode
    for peer in peers[1:]:
        peer.client.join(joincode=code)
    await pump_until(
        lambda: all(p.client.room is not None and
                    len(p.client.peers) == len(peers) - 1 for p in peers),
        [p.scene for p in peers])
    return code
