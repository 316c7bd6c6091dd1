"""TCP and WebSocket transports on asyncio.

TCP carries the raw length-prefixed stream. WebSocket carries the same
bytes in binary frames (default path "/"); one message per frame is
canonical, but receivers reframe and so tolerate arbitrary fragmentation.
"""

import asyncio
import logging

import websockets
import websockets.asyncio.client
import websockets.asyncio.server

from .base import Connection, ConnectionSpec, TransportError

log = logging.getLogger(__name__)

# Per-connection outbound buffer cap; beyond this the peer is considered a
# slow consumer and the connection is closed.
DEFAULT_OUTBOUND_LIMIT = 4 * 1024 * 1024


class TcpConnection(Connection):
    def __init__(self, spec, transport, outbound_limit=DEFAULT_OUTBOUND_LIMIT):
        super().__init__(spec)
        self._transport = transport
        self._limit = outbound_limit
        self.state = "open"

    def send(self, data: bytes):
        if self.state != "open":
            return
        self._transport.write(data)
        if self._transport.get_write_buffer_size() > self._limit:
            log.warning("connection %d: outbound buffer over limit, closing", self.id)
            self.close()

    def close(self):
        if self.state == "closed":
            return
        self._transport.close()
        self._closed()


class _TcpProtocol(asyncio.Protocol):
    def __init__(self, spec, outbound_limit=DEFAULT_OUTBOUND_LIMIT):
        self.connection = None
        self._spec = spec
        self._limit = outbound_limit

    def connection_made(self, transport):
        self.connection = TcpConnection(self._spec, transport, self._limit)

    def data_received(self, data):
        if self.connection.on_receive is not None:
            self.connection.on_receive(data)

    def connection_lost(self, exc):
        self.connection._closed()


class WebSocketConnection(Connection):
    """Wraps a websockets protocol object; a writer task preserves FIFO
    send order and tracks buffered bytes for the slow-consumer cap."""

    def __init__(self, spec, ws, outbound_limit=DEFAULT_OUTBOUND_LIMIT):
        super().__init__(spec)
        self._ws = ws
        self._limit = outbound_limit
        self._queue = asyncio.Queue()
        self._buffered = 0
        self.state = "open"
        self._writer = asyncio.ensure_future(self._write_loop())
        self._reader = asyncio.ensure_future(self._read_loop())

    def send(self, data: bytes):
        if self.state != "open":
            return
        self._buffered += len(data)
        if self._buffered > self._limit:
            log.warning("connection %d: outbound buffer over limit, closing", self.id)
            self.close()
            return
        self._queue.put_nowait(data)

    async def _write_loop(self):
        try:
            while True:
                data = await self._queue.get()
                await self._ws.send(data)
                self._buffered -= len(data)
        except (websockets.ConnectionClosed, asyncio.CancelledError):
            pass

    async def _read_loop(self):
        try:
            async for frame in self._ws:
                if isinstance(frame, str):
                    frame = frame.encode("utf-8")
                if self.on_receive is not None:
                    self.on_receive(frame)
        except websockets.ConnectionClosed:
            pass
        finally:
            self._writer.cancel()
            self._closed()

    def close(self):
        if self.state == "closed":
            return
        self._writer.cancel()
        asyncio.ensure_future(self._ws.close())
        self._closed()


async def connect(scene, spec: ConnectionSpec) -> Connection:
    """Open a client connection and attach it to the scene's router.

    Loopback connections are created with loopback_pair and attached via
    scene.add_connection directly.
    """
    conn = await open_connection(spec)
    scene.add_connection(conn)
    return conn


async def open_connection(spec: ConnectionSpec) -> Connection:
    loop = asyncio.get_running_loop()
    if spec.kind == "tcp":
        try:
            _, protocol = await loop.create_connection(
                lambda: _TcpProtocol(spec), spec.host, spec.port
            )
        except OSError as e:
            raise TransportError(f"tcp connect {spec.host}:{spec.port}: {e}") from e
        return protocol.connection
    if spec.kind == "websocket":
        try:
            ws = await websockets.asyncio.client.connect(
                f"ws://{spec.host}:{spec.port}/"
            )
        except OSError as e:
            raise TransportError(f"ws connect {spec.host}:{spec.port}: {e}") from e
        return WebSocketConnection(spec, ws)
    raise TransportError(f"cannot dial a {spec.kind} spec")


class Listener:
    def __init__(self, closer):
        self._closer = closer

    async def close(self):
        await self._closer()


async def listen(spec: ConnectionSpec, acceptor,
                 outbound_limit=DEFAULT_OUTBOUND_LIMIT) -> Listener:
    """Accept inbound connections; each yields acceptor(Connection)."""
    loop = asyncio.get_running_loop()
    if spec.kind == "tcp":

        def factory():
            protocol = _TcpProtocol(spec, outbound_limit)
            orig = protocol.connection_made

            def connection_made(transport):
                orig(transport)
                acceptor(protocol.connection)

            protocol.connection_made = connection_made
            return protocol

        try:
            server = await loop.create_server(factory, spec.host or "0.0.0.0", spec.port)
        except OSError as e:
            raise TransportError(f"tcp bind {spec.port}: {e}") from e

        async def close():
            server.close()
            await server.wait_closed()

        return Listener(close)

    if spec.kind == "websocket":

        async def handler(ws):
            conn = WebSocketConnection(spec, ws, outbound_limit)
            acceptor(conn)
            # keep the handler alive until the socket closes
            await asyncio.gather(conn._reader, return_exceptions=True)

        try:
            server = await websockets.asyncio.server.serve(
                handler, spec.host or "0.0.0.0", spec.port
            )
        except OSError as e:
            raise TransportError(f"ws bind {spec.port}: {e}") from e

        async def close():
            server.close()
            await server.wait_closed()

        return Listener(close)

    raise TransportError(f"cannot listen on a {spec.kind} spec")
