"""Standalone rendezvous/relay server.

Accepts TCP and WebSocket connections, sandboxes them until they join a
room, then forwards in-room traffic between members. Only the 14-byte
prefix of in-room messages is ever parsed; payloads pass through
untouched. Single process, one room map; put a reverse proxy in front
for TLS.
"""

import argparse
import asyncio
import logging
import os
import signal
import sys
from dataclasses import dataclass
from typing import Optional

from .rooms import RoomServer
from .services import EventLogger
from .transport import ConnectionSpec, TransportError, listen
from .wire import MAX_MESSAGE_LENGTH

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BIND_FAILURE = 2
EXIT_CONFIG_ERROR = 3


@dataclass
class ServerConfig:
    tcp_port: int
    ws_port: int
    idle_room_seconds: int = 60
    log_path: Optional[str] = None
    max_message_bytes: int = MAX_MESSAGE_LENGTH

    def validate(self):
        for port in (self.tcp_port, self.ws_port):
            if not 1 <= port <= 65535:
                raise ValueError(f"invalid port {port}")
        if self.tcp_port == self.ws_port:
            raise ValueError("tcp and websocket ports must be distinct")
        if self.idle_room_seconds <= 0:
            raise ValueError("idle_room_seconds must be positive")


class RelayService:
    """Running relay: listeners plus the room state. Mainly a test
    surface; the CLI drives it via run()."""

    def __init__(self, config: ServerConfig):
        config.validate()
        self.config = config
        self.logger = EventLogger("server", path=config.log_path)
        self.rooms = RoomServer(
            idle_room_seconds=config.idle_room_seconds,
            max_message_bytes=config.max_message_bytes,
            on_event=self.logger.log,
        )
        self._listeners = []
        self._evictor = None

    async def start(self, host="0.0.0.0"):
        acceptor = self.rooms.handle_connection
        self._listeners = [
            await listen(ConnectionSpec("tcp", host, self.config.tcp_port), acceptor),
            await listen(ConnectionSpec("websocket", host, self.config.ws_port),
                         acceptor),
        ]
        self._evictor = asyncio.ensure_future(self._evict_loop())
        self.logger.log("ServerStarted", {
            "tcp_port": self.config.tcp_port,
            "ws_port": self.config.ws_port,
        })

    async def _evict_loop(self):
        while True:
            await asyncio.sleep(1.0)
            self.rooms.evict_idle()

    async def stop(self):
        if self._evictor is not None:
            self._evictor.cancel()
        for listener in self._listeners:
            await listener.close()
        self.rooms.close_all()
        self.logger.log("ServerStopped", {})
        self.logger.close()


async def _serve_until_signalled(config: ServerConfig):
    service = RelayService(config)
    await service.start()
    stop = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        loop.add_signal_handler(sig, stop.set)
    log.info("relay serving: tcp=%d ws=%d", config.tcp_port, config.ws_port)
    await stop.wait()
    await service.stop()


def run(config: ServerConfig) -> int:
    """Serve until SIGINT/SIGTERM. Returns a process exit code."""
    try:
        config.validate()
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        asyncio.run(_serve_until_signalled(config))
    except TransportError as e:
        print(f"bind failure: {e}", file=sys.stderr)
        return EXIT_BIND_FAILURE
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ubiq-server", description="room rendezvous and relay server")
    parser.add_argument("--tcp-port", type=int, default=8001)
    parser.add_argument("--ws-port", type=int, default=8002)
    parser.add_argument("--idle-room-seconds", type=int, default=60)
    parser.add_argument("--log", dest="log_path", default=None,
                        help="structured JSONL log file")
    args = parser.parse_args(argv)
    log_path = os.environ.get("UBIQ_SERVER_LOG", args.log_path)
    config = ServerConfig(
        tcp_port=args.tcp_port,
        ws_port=args.ws_port,
        idle_room_seconds=args.idle_room_seconds,
        log_path=log_path,
    )
    logging.basicConfig(level=logging.INFO)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
