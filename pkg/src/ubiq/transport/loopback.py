"""In-process connection pair: zero network I/O, synchronous in-order
delivery. An optional one-way delay (requires a running asyncio loop)
supports latency fault injection."""

import asyncio
from typing import Tuple

from .base import Connection, ConnectionSpec

_LOOPBACK_SPEC = ConnectionSpec(kind="loopback")


class LoopbackConnection(Connection):
    def __init__(self, delay: float = 0.0):
        self._pending = []  # bytes sent before the peer had a receiver
        super().__init__(_LOOPBACK_SPEC)
        self.peer = None
        self.delay = delay
        self.state = "open"

    @property
    def on_receive(self):
        return self._on_receive

    @on_receive.setter
    def on_receive(self, callback):
        self._on_receive = callback
        if callback is not None:
            self._flush_pending()

    def send(self, data: bytes):
        if self.state != "open":
            return
        peer = self.peer
        if peer is None or peer.state != "open":
            return
        if self.delay > 0:
            asyncio.get_running_loop().call_later(
                self.delay, peer._deliver, data
            )
        else:
            peer._deliver(data)

    def _deliver(self, data: bytes):
        if self.state != "open":
            return
        if self.on_receive is None:
            self._pending.append(data)
            return
        self._flush_pending()
        self._on_receive(data)

    def _flush_pending(self):
        while self._pending and self._on_receive is not None:
            self.on_receive(self._pending.pop(0))

    def close(self):
        if self.state == "closed":
            return
        self._closed()
        if self.peer is not None and self.peer.state != "closed":
            self.peer._closed()


def loopback_pair(delay: float = 0.0) -> Tuple[LoopbackConnection, LoopbackConnection]:
    """Two open connections cross-wired in process."""
    a = LoopbackConnection(delay)
    b = LoopbackConnection(delay)
    a.peer = b
    b.peer = a
    return a, b
