"""Peer-to-peer latency metering.

Each peer pings every other peer once per second; latency is recorded as
half the round trip time on the pinger's own monotonic clock, so no
cross-peer clock sync is needed. Missing pongs are simply skipped.
"""

import logging
import time

from ..wire import from_text_object, make_address

log = logging.getLogger(__name__)

LATENCY_COMPONENT = 3


class LatencyMatrix:
    """Running half-RTT statistics per directed peer pair, in ms."""

    def __init__(self):
        self.peers = []
        self.samples = {}  # (from uuid, to uuid) -> {"count","mean","last"}

    def record(self, from_uuid, to_uuid, ms):
        if ms < 0:
            ms = 0.0
        for uuid in (from_uuid, to_uuid):
            if uuid not in self.peers:
                self.peers.append(uuid)
        stats = self.samples.setdefault((from_uuid, to_uuid),
                                        {"count": 0, "mean": 0.0, "last": 0.0})
        stats["count"] += 1
        stats["mean"] += (ms - stats["mean"]) / stats["count"]
        stats["last"] = ms


class LatencyMeter:
    def __init__(self, scene, room_client, interval=1.0, clock=time.monotonic,
                 matrix=None):
        self.scene = scene
        self.room_client = room_client
        self.interval = interval
        self.clock = clock
        self.matrix = matrix or LatencyMatrix()
        self._seq = 0
        self._next_tick = None
        self.ctx = scene.register(
            self, make_address(scene.scene_id.value, LATENCY_COMPONENT))

    def tick(self, now=None) -> int:
        """Send pings if the sampling interval has elapsed; returns the
        number of pings sent."""
        now = self.clock() if now is None else now
        if self._next_tick is not None and now < self._next_tick:
            return 0
        self._next_tick = (now if self._next_tick is None else self._next_tick) \
            + self.interval
        sent = 0
        for peer in self.room_client.peers.values():
            self._seq += 1
            self.ctx.send_json(
                make_address(peer.scene_id.value, LATENCY_COMPONENT),
                {
                    "type": "ping",
                    "id": self._seq,
                    "t": now,
                    "uuid": self.room_client.me.uuid,
                    "sceneid": str(self.scene.scene_id.value),
                })
            sent += 1
        return sent

    def receive(self, msg):
        try:
            data = from_text_object(msg.payload)
            mtype = data["type"]
        except Exception:
            log.warning("latency meter: bad message")
            return
        if mtype == "ping":
            self.ctx.send_json(
                make_address(int(data["sceneid"]), LATENCY_COMPONENT),
                {
                    "type": "pong",
                    "id": data["id"],
                    "t": data["t"],
                    "uuid": self.room_client.me.uuid,
                })
        elif mtype == "pong":
            half_rtt_ms = (self.clock() - data["t"]) / 2 * 1000.0
            self.matrix.record(self.room_client.me.uuid, data["uuid"], half_rtt_ms)
