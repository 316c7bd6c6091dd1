"""Throughput and prefix-overhead instrumentation.

Counts framed traffic through a scene's transports per sampling window.
The overhead ratio is the share of framed bytes taken by the 14-byte
prefix: 14 * n / (14 * n + sum of payload sizes).
"""

import time
from dataclasses import dataclass, field
from typing import Dict

from ..wire import PREFIX_SIZE


@dataclass
class StatsSample:
    window_start: float
    window_end: float
    bytes_in: int
    bytes_out: int
    message_count: int
    category_bytes: Dict[str, int] = field(default_factory=dict)
    overhead_ratio: float = 0.0


class StatsMonitor:
    def __init__(self, scene, categories=None, clock=time.monotonic):
        """categories maps component-id values to category names used for
        bandwidth attribution (e.g. avatar vs rooms vs logging)."""
        self.scene = scene
        self.categories = categories or {}
        self.clock = clock
        self._window_start = clock()
        self._reset()
        scene.on_send = self._on_send
        scene.on_receive_raw = self._on_receive

    def _reset(self):
        self.bytes_in = 0
        self.bytes_out = 0
        self.message_count = 0
        self.category_bytes = {}

    def _count(self, nbytes, address):
        self.message_count += 1
        category = self.categories.get(address.component.value)
        if category is not None:
            self.category_bytes[category] = \
                self.category_bytes.get(category, 0) + nbytes

    def _on_send(self, nbytes, address):
        self.bytes_out += nbytes
        self._count(nbytes, address)

    def _on_receive(self, nbytes, address):
        self.bytes_in += nbytes
        self._count(nbytes, address)

    def sample(self, window_end=None) -> StatsSample:
        """Emit counters for the current window and start a new one."""
        window_end = self.clock() if window_end is None else window_end
        total = self.bytes_in + self.bytes_out
        prefix_bytes = PREFIX_SIZE * self.message_count
        result = StatsSample(
            window_start=self._window_start,
            window_end=window_end,
            bytes_in=self.bytes_in,
            bytes_out=self.bytes_out,
            message_count=self.message_count,
            category_bytes=dict(self.category_bytes),
            overhead_ratio=(prefix_bytes / total) if total else 0.0,
        )
        self._window_start = window_end
        self._reset()
        return result
