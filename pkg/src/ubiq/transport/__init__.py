from .base import Connection, ConnectionSpec, TransportError
from .loopback import LoopbackConnection, loopback_pair
from .aio import (
    DEFAULT_OUTBOUND_LIMIT,
    Listener,
    TcpConnection,
    WebSocketConnection,
    connect,
    listen,
    open_connection,
)

__all__ = [
    "Connection",
    "ConnectionSpec",
    "TransportError",
    "LoopbackConnection",
    "loopback_pair",
    "DEFAULT_OUTBOUND_LIMIT",
    "Listener",
    "TcpConnection",
    "WebSocketConnection",
    "connect",
    "listen",
    "open_connection",
]
