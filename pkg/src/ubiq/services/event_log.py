"""Structured event logging with remote collection.

Events are single JSON lines: {"ticks": us, "peer": uuid, "event": name,
"args": {...}}. Each emitter appends locally and, when a collector has
announced itself, forwards the identical line to the collector's sink
address. A new announcement retargets every emitter (single collector).
"""

import json
import logging
import time

from ..wire import from_text_object, make_address, to_text_object

log = logging.getLogger(__name__)

# Emitters listen for collector announcements at this well-known address;
# each collector's sink lives at (its scene id, COLLECTOR_SINK_COMPONENT).
LOG_ANNOUNCE_ADDRESS = make_address(4, 1)
COLLECTOR_SINK_COMPONENT = 4

REQUIRED_FIELDS = ("ticks", "peer", "event", "args")


def _default_clock():
    return time.monotonic_ns() // 1000  # microseconds


class EventLogger:
    """Per-peer emitter. Works standalone (local file only) or attached
    to a scene for remote collection."""

    def __init__(self, peer_uuid: str, path=None, scene=None, clock=_default_clock):
        self.peer_uuid = peer_uuid
        self.path = path
        self.scene = scene
        self.clock = clock
        self.collector_scene = None  # int scene id of the active collector
        self._last_ticks = 0
        self._file = None
        self._write_error_reported = False
        if scene is not None:
            scene.register(self, LOG_ANNOUNCE_ADDRESS)

    def receive(self, msg):
        try:
            data = from_text_object(msg.payload)
            if data.get("type") == "collect":
                self.collector_scene = int(data["sceneid"])
        except Exception:
            log.warning("event logger: bad announcement")

    def log(self, event: str, args=None):
        ticks = max(self.clock(), self._last_ticks)
        self._last_ticks = ticks
        line = to_text_object({
            "ticks": ticks,
            "peer": self.peer_uuid,
            "event": event,
            "args": args if args is not None else {},
        })
        self._write_local(line)
        self._forward(line)

    def _write_local(self, line: bytes):
        if self.path is None:
            return
        try:
            if self._file is None:
                self._file = open(self.path, "ab")
            self._file.write(line + b"\n")
        except OSError:
            if not self._write_error_reported:
                log.exception("event logger: local write failed for %s", self.path)
                self._write_error_reported = True

    def _forward(self, line: bytes):
        if self.scene is None or self.collector_scene is None:
            return
        target = make_address(self.collector_scene, COLLECTOR_SINK_COMPONENT)
        if self.collector_scene == self.scene.scene_id.value:
            self.scene.deliver_local(target, line)
        else:
            self.scene.send(target, line)

    def close(self):
        if self._file is not None:
            self._file.close()
            self._file = None


class LogCollector:
    """Aggregates forwarded event lines at one peer."""

    def __init__(self, scene, room_client=None):
        self.scene = scene
        self.lines = []
        scene.register(
            self, make_address(scene.scene_id.value, COLLECTOR_SINK_COMPONENT))
        if room_client is not None:
            # late joiners must learn about us too
            room_client.on_peer_added.append(lambda peer: self.announce())

    def announce(self):
        payload = to_text_object({
            "type": "collect",
            "sceneid": str(self.scene.scene_id.value),
        })
        self.scene.send(LOG_ANNOUNCE_ADDRESS, payload)
        # co-located emitters on this scene never see our own sends
        self.scene.deliver_local(LOG_ANNOUNCE_ADDRESS, payload)

    start = announce

    def receive(self, msg):
        self.lines.append(msg.payload)

    def flush(self, path) -> int:
        """Write collected lines sorted by (peer, ticks); returns count."""
        records = []
        for line in self.lines:
            record = json.loads(line.decode("utf-8"))
            records.append(record)
        records.sort(key=lambda r: (r["peer"], r["ticks"]))
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record, separators=(",", ":")) + "\n")
        return len(records)
