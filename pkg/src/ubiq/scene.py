"""Per-peer message router.

A PeerScene owns a peer's connections and a registry mapping addresses to
component handles. Sends go out on every connection (no local echo);
dispatch drains the inbound queue on the peer's update context and issues
callbacks on every handle registered at the exact address.

Scene resolution mirrors how components find their router in a node
hierarchy: walk ancestors upward, and at each ancestor do a pre-order
depth-first search of its subtree for the first scene attachment.
"""

import logging
import random
from collections import deque
from typing import Optional

from .wire import (
    Address,
    StreamDecoder,
    WireMessage,
    MalformedStreamError,
    encode,
    generate_network_id,
    to_text_object,
)

log = logging.getLogger(__name__)


class SceneError(Exception):
    pass


class DuplicateRegistrationError(SceneError):
    pass


class UnresolvedSceneError(SceneError):
    pass


class SceneClosedError(SceneError):
    pass


class NetworkContext:
    """Handed to a component on registration; its sending identity."""

    def __init__(self, scene: "PeerScene", address: Address):
        self.scene = scene
        self.address = address

    def send(self, to: Address, payload: bytes):
        self.scene.send(to, payload)

    def send_json(self, to: Address, value):
        self.scene.send(to, to_text_object(value))


class PeerScene:
    """Router for one logical peer. One scene per peer; a process may
    host many scenes, each with its own connections."""

    def __init__(self, rng: Optional[random.Random] = None):
        rng = rng or random.Random()
        self.scene_id = generate_network_id(rng)
        self.registry = {}  # Address -> list of handles
        self.connections = []
        self.closed = False
        self.unmatched_count = 0
        self.on_send = None  # hook(raw bytes, address) for instrumentation
        self.on_receive_raw = None  # hook(n bytes, address)
        self._inbound = deque()
        self._decoders = {}  # connection id -> StreamDecoder

    # -- registration ----------------------------------------------------

    def register(self, handle, address: Address) -> NetworkContext:
        handles = self.registry.setdefault(address, [])
        if any(h is handle for h in handles):
            raise DuplicateRegistrationError(f"{handle!r} already at {address}")
        handles.append(handle)
        return NetworkContext(self, address)

    def unregister(self, handle, address: Address):
        handles = self.registry.get(address, [])
        self.registry[address] = [h for h in handles if h is not handle]
        if not self.registry[address]:
            del self.registry[address]

    # -- connections -----------------------------------------------------

    def add_connection(self, connection):
        decoder = StreamDecoder()
        self._decoders[connection.id] = decoder
        self.connections.append(connection)

        def on_receive(data, conn=connection, decoder=decoder):
            try:
                messages = decoder.feed(data)
            except MalformedStreamError:
                log.warning("malformed stream on connection %d, dropping", conn.id)
                conn.close()
                return
            for msg in messages:
                if self.on_receive_raw is not None:
                    self.on_receive_raw(msg.length + 4, msg.address)
                self._inbound.append(msg)

        connection.on_receive = on_receive
        connection.on_close = lambda conn=connection: self._remove_connection(conn)

    def _remove_connection(self, connection):
        self.connections = [c for c in self.connections if c is not connection]
        self._decoders.pop(connection.id, None)

    # -- messaging -------------------------------------------------------

    def send(self, to: Address, payload: bytes):
        """Queue a message on all connections. The sender's own components
        never receive it; loopback requires a second scene."""
        if self.closed:
            raise SceneClosedError("scene is shut down")
        raw = encode(WireMessage(to, payload))
        if self.on_send is not None:
            self.on_send(len(raw), to)
        for connection in list(self.connections):
            connection.send(raw)

    def send_json(self, to: Address, value):
        self.send(to, to_text_object(value))

    def deliver_local(self, to: Address, payload: bytes):
        """Explicitly enqueue a message for this scene's own components.

        Used by co-located services (e.g. a log collector feeding itself);
        regular sends never echo locally.
        """
        self._inbound.append(WireMessage(to, payload))

    def dispatch(self) -> int:
        """Drain the inbound queue, invoking every handle registered at
        each message's exact address. Returns the callback count."""
        delivered = 0
        pending = len(self._inbound)
        for _ in range(pending):
            msg = self._inbound.popleft()
            handles = self.registry.get(msg.address)
            if not handles:
                self.unmatched_count += 1
                continue
            for handle in list(handles):
                try:
                    receive = getattr(handle, "receive", handle)
                    receive(msg)
                except Exception:
                    log.exception("component callback failed for %s", msg.address)
                delivered += 1
        return delivered

    def close(self):
        self.closed = True
        for connection in list(self.connections):
            connection.close()
        self.connections = []


class SceneNode:
    """Node in the content hierarchy. Attachments are component handles
    or PeerScenes; the graph must stay a forest."""

    def __init__(self, name: str = "", parent: Optional["SceneNode"] = None):
        self.name = name
        self.parent = None
        self.children = []
        self.attachments = []
        if parent is not None:
            parent.add_child(self)

    def add_child(self, child: "SceneNode"):
        if child.parent is not None:
            child.parent.children.remove(child)
        child.parent = self
        self.children.append(child)

    def attach(self, obj):
        self.attachments.append(obj)
        return obj


def resolve_scene(node: SceneNode) -> PeerScene:
    """Find the scene governing a node: for each ancestor starting at the
    node itself, search that ancestor's subtree pre-order (children in
    declared order) and return the first PeerScene attachment."""
    ancestor = node
    while ancestor is not None:
        found = _find_scene_preorder(ancestor)
        if found is not None:
            return found
        ancestor = ancestor.parent
    raise UnresolvedSceneError(f"no scene reachable from node {node.name!r}")


def _find_scene_preorder(node: SceneNode) -> Optional[PeerScene]:
    for obj in node.attachments:
        if isinstance(obj, PeerScene):
            return obj
    for child in node.children:
        found = _find_scene_preorder(child)
        if found is not None:
            return found
    return None
