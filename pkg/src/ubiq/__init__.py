"""Component-addressed messaging, room relay and instrumentation stack."""

from .wire import (
    Address,
    ComponentId,
    NetworkId,
    WireMessage,
    decode_stream,
    encode,
    from_text_object,
    generate_network_id,
    make_address,
    to_text_object,
)
from .scene import (
    NetworkContext,
    PeerScene,
    SceneNode,
    resolve_scene,
)

__all__ = [
    "Address",
    "ComponentId",
    "NetworkId",
    "WireMessage",
    "decode_stream",
    "encode",
    "from_text_object",
    "generate_network_id",
    "make_address",
    "to_text_object",
    "NetworkContext",
    "PeerScene",
    "SceneNode",
    "resolve_scene",
]
