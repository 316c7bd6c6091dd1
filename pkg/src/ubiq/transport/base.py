"""Connection abstraction shared by all transports.

A Connection delivers raw bytes in order; framing is the scene's job.
Closure is surfaced through on_close; reconnection is never automatic.
"""

import itertools
from dataclasses import dataclass


class TransportError(Exception):
    pass


@dataclass(frozen=True)
class ConnectionSpec:
    kind: str  # "tcp" | "websocket" | "loopback"
    host: str = ""
    port: int = 0

    def __post_init__(self):
        if self.kind not in ("tcp", "websocket", "loopback"):
            raise ValueError(f"unknown transport kind {self.kind!r}")
        if self.kind != "loopback" and not 1 <= self.port <= 65535:
            raise ValueError(f"invalid port {self.port}")


_ids = itertools.count(1)


class Connection:
    """Base connection: subclasses implement send/close. Consumers set
    on_receive(data) and on_close(); after close no deliveries occur."""

    def __init__(self, spec: ConnectionSpec):
        self.id = next(_ids)
        self.spec = spec
        self.state = "connecting"
        self.on_receive = None
        self.on_close = None

    def send(self, data: bytes):
        raise NotImplementedError

    def close(self):
        raise NotImplementedError

    def _closed(self):
        if self.state == "closed":
            return
        self.state = "closed"
        if self.on_close is not None:
            self.on_close()
