"""Server side of the rooms protocol.

Transport-agnostic: connections are anything satisfying the Connection
interface. The server frames each connection's byte stream itself so that
in-room traffic is forwarded byte-identical without touching payloads;
only messages addressed to the room server are parsed.

A connection starts sandboxed: until it joins a room, anything not
addressed to the room server is discarded.
"""

import json
import logging
import random
import struct
import time
import uuid as uuidlib

from ..wire import (
    ADDRESS_SIZE,
    MAX_MESSAGE_LENGTH,
    PREFIX_SIZE,
    WireMessage,
    encode,
    make_address,
    to_text_object,
)
from .records import (
    MAX_PROPERTIES_BYTES,
    ROOM_CLIENT_COMPONENT,
    ROOM_SERVER_ADDRESS,
    PeerRecord,
    RoomRecord,
    RoomsError,
)

log = logging.getLogger(__name__)

_SERVER_KEY = (ROOM_SERVER_ADDRESS.object.value, ROOM_SERVER_ADDRESS.component.value)

CODE_SPACE = 1000


class ServerFullError(RoomsError):
    pass


class Room:
    def __init__(self, record: RoomRecord, now: float):
        self.record = record
        self.members = {}  # connection id -> (connection, PeerRecord)
        self.idle_since = now


class _ConnState:
    def __init__(self, connection):
        self.connection = connection
        self.buffer = bytearray()
        self.room = None
        self.peer = None
        self.reply_scene = None  # scene id for pre-join replies


class RoomServer:
    """Room and membership state plus the sandbox-then-forward rule."""

    def __init__(self, rng=None, idle_room_seconds=60, clock=time.monotonic,
                 max_message_bytes=MAX_MESSAGE_LENGTH, on_event=None):
        self.rng = rng or random.Random()
        self.idle_room_seconds = idle_room_seconds
        self.clock = clock
        self.max_message_bytes = max_message_bytes
        self.on_event = on_event
        self.rooms = {}  # room uuid -> Room
        self.codes = {}  # joincode -> room uuid
        self.discarded_count = 0
        self._conns = {}  # connection id -> _ConnState

    # -- connection lifecycle -------------------------------------------

    def handle_connection(self, connection):
        state = _ConnState(connection)
        self._conns[connection.id] = state
        connection.on_receive = lambda data: self._on_bytes(state, data)
        connection.on_close = lambda: self._on_disconnect(state)
        self._event("ConnectionOpened", {"connection": connection.id})

    def _on_disconnect(self, state):
        self._conns.pop(state.connection.id, None)
        if state.room is not None:
            self._remove_member(state)
        self._event("ConnectionClosed", {"connection": state.connection.id})

    # -- framing ---------------------------------------------------------

    def _on_bytes(self, state, data):
        state.buffer += data
        buf = state.buffer
        offset = 0
        n = len(buf)
        while n - offset >= 4:
            (length,) = struct.unpack_from("<I", buf, offset)
            if length < ADDRESS_SIZE or length > self.max_message_bytes:
                log.warning("connection %d: bad frame length %d, dropping",
                            state.connection.id, length)
                state.connection.close()
                return
            if n - offset < 4 + length:
                break
            frame = bytes(buf[offset : offset + 4 + length])
            offset += 4 + length
            self._handle_frame(state, frame)
        del state.buffer[:offset]

    def _handle_frame(self, state, frame: bytes):
        obj, comp = struct.unpack_from("<QH", frame, 4)
        if (obj, comp) == _SERVER_KEY:
            self._handle_request(state, frame[PREFIX_SIZE:])
        elif state.room is not None:
            self.fanout(state.room, state.connection, frame)
        else:
            self.discarded_count += 1

    # -- fanout ----------------------------------------------------------

    def fanout(self, room: Room, from_connection, raw: bytes) -> int:
        """Forward one framed message byte-identical to every other room
        member; a failed write closes only that member."""
        delivered = 0
        from_id = from_connection.id
        for conn, _peer in list(room.members.values()):
            if conn.id == from_id:
                continue
            try:
                conn.send(raw)
                delivered += 1
            except Exception:
                log.exception("fanout write failed, closing member %d", conn.id)
                conn.close()
        return delivered

    # -- protocol --------------------------------------------------------

    def _handle_request(self, state, payload: bytes):
        try:
            request = json.loads(payload.decode("utf-8"))
            rtype = request["type"]
            args = request.get("args", {})
        except (ValueError, KeyError, UnicodeDecodeError):
            self._reject(state, "bad request")
            return
        if isinstance(args, dict) and "sceneid" in args:
            try:
                state.reply_scene = int(args["sceneid"])
            except (TypeError, ValueError):
                pass
        handler = {
            "Join": self._on_join,
            "Leave": self._on_leave,
            "UpdatePeerProperties": self._on_update_peer,
            "UpdateRoomProperties": self._on_update_room,
            "DiscoverRooms": self._on_discover,
            "Ping": self._on_ping,
        }.get(rtype)
        if handler is None:
            self._reject(state, "bad request")
            return
        handler(state, args if isinstance(args, dict) else {})

    def _on_join(self, state, args):
        try:
            peer = PeerRecord.from_json(args["peer"])
        except (KeyError, ValueError, TypeError):
            self._reject(state, "bad request")
            return
        if "joincode" in args:
            room_uuid = self.codes.get(str(args["joincode"]))
            if room_uuid is None:
                self._reject(state, "no such room")
                return
            room = self.rooms[room_uuid]
        elif "uuid" in args:
            room = self.rooms.get(args["uuid"])
            if room is None:
                self._reject(state, "no such room")
                return
        elif "name" in args:
            try:
                room = self._create_room(str(args["name"]), bool(args.get("publish", False)))
            except ServerFullError:
                self._reject(state, "server full")
                return
        else:
            self._reject(state, "bad request")
            return

        if state.room is not None:
            self._remove_member(state)
        state.room = room
        state.peer = peer
        room.members[state.connection.id] = (state.connection, peer)
        self._send(state.connection, peer, {
            "type": "SetRoom",
            "args": {
                "room": room.record.to_json(),
                "peers": [p.to_json() for _, p in room.members.values()],
            },
        })
        self._broadcast(room, {"type": "PeerAdded", "args": {"peer": peer.to_json()}},
                        exclude=state.connection.id)
        self._event("PeerJoined", {"room": room.record.uuid, "peer": peer.uuid})

    def _on_leave(self, state, args):
        if state.room is None:
            return
        self._remove_member(state)

    def _remove_member(self, state):
        room = state.room
        peer = state.peer
        state.room = None
        state.peer = None
        room.members.pop(state.connection.id, None)
        if peer is not None:
            self._broadcast(room, {"type": "PeerRemoved",
                                   "args": {"peer": peer.to_json()}})
            self._event("PeerLeft", {"room": room.record.uuid, "peer": peer.uuid})
        if not room.members:
            room.idle_since = self.clock()

    def _on_update_peer(self, state, args):
        if state.room is None or state.peer is None:
            self._reject(state, "not in a room")
            return
        updates = args if "properties" not in args else args["properties"]
        if not isinstance(updates, dict) or not updates:
            return
        if len(to_text_object(updates)) > MAX_PROPERTIES_BYTES:
            self._reject(state, "properties too large")
            return
        state.peer.properties.update({str(k): str(v) for k, v in updates.items()})
        self._broadcast(state.room,
                        {"type": "PeerUpdated", "args": {"peer": state.peer.to_json()}},
                        exclude=state.connection.id)

    def _on_update_room(self, state, args):
        if state.room is None:
            self._reject(state, "not in a room")
            return
        updates = args if "properties" not in args else args["properties"]
        if not isinstance(updates, dict) or not updates:
            return
        if len(to_text_object(updates)) > MAX_PROPERTIES_BYTES:
            self._reject(state, "properties too large")
            return
        state.room.record.properties.update(
            {str(k): str(v) for k, v in updates.items()})
        self._broadcast(state.room, {"type": "RoomUpdated",
                                     "args": {"room": state.room.record.to_json()}})

    def _on_discover(self, state, args):
        rooms = [
            {
                "uuid": room.record.uuid,
                "joincode": room.record.joincode,
                "name": room.record.name,
                "members": len(room.members),
            }
            for room in self.rooms.values()
            if room.record.publish
        ]
        self._send_to_conn(state, {"type": "Rooms", "args": rooms})

    def _on_ping(self, state, args):
        self._send_to_conn(state, {"type": "Pong", "args": {"id": args.get("id")}})

    # -- rooms -----------------------------------------------------------

    def _create_room(self, name: str, publish: bool) -> Room:
        code = self.allocate_code()
        record = RoomRecord(uuid=str(uuidlib.uuid4()), joincode=code,
                            name=name, publish=publish)
        room = Room(record, self.clock())
        self.rooms[record.uuid] = room
        self.codes[code] = record.uuid
        self._event("RoomCreated", {"room": record.uuid, "joincode": code})
        return room

    def allocate_code(self) -> str:
        """Uniformly random unused three-digit code."""
        used = len(self.codes)
        if used >= CODE_SPACE:
            raise ServerFullError("join code namespace exhausted")
        if used < CODE_SPACE // 2:
            while True:
                code = f"{self.rng.randrange(CODE_SPACE):03d}"
                if code not in self.codes:
                    return code
        free = [f"{i:03d}" for i in range(CODE_SPACE) if f"{i:03d}" not in self.codes]
        return self.rng.choice(free)

    def evict_idle(self, now=None):
        """Remove empty rooms idle past the threshold; frees their codes."""
        now = self.clock() if now is None else now
        evicted = []
        for room_uuid, room in list(self.rooms.items()):
            if room.members:
                continue
            if now - room.idle_since > self.idle_room_seconds:
                del self.rooms[room_uuid]
                del self.codes[room.record.joincode]
                evicted.append(room_uuid)
                self._event("RoomEvicted", {"room": room_uuid})
        return evicted

    def close_all(self):
        for state in list(self._conns.values()):
            state.connection.close()

    # -- replies ---------------------------------------------------------

    def _reject(self, state, reason: str):
        self._send_to_conn(state, {"type": "Rejected", "args": {"reason": reason}})

    def _send_to_conn(self, state, message):
        # Replies go to the room-client component of the requester's
        # scene; requests carry the scene id so this works pre-join too.
        if state.peer is not None:
            self._send(state.connection, state.peer, message)
        elif state.reply_scene is not None:
            address = make_address(state.reply_scene, ROOM_CLIENT_COMPONENT)
            state.connection.send(
                encode(WireMessage(address, to_text_object(message))))
        else:
            # Last resort: the reserved client component under the server
            # object id, which clients also listen on.
            state.connection.send(
                encode(WireMessage(ROOM_SERVER_ADDRESS, to_text_object(message))))

    def _send(self, connection, peer: PeerRecord, message):
        address = make_address(peer.scene_id.value, ROOM_CLIENT_COMPONENT)
        connection.send(encode(WireMessage(address, to_text_object(message))))

    def _broadcast(self, room: Room, message, exclude=None):
        for conn, peer in list(room.members.values()):
            if exclude is not None and conn.id == exclude:
                continue
            try:
                self._send(conn, peer, message)
            except Exception:
                log.exception("broadcast write failed, closing member %d", conn.id)
                conn.close()

    def _event(self, event: str, args):
        if self.on_event is not None:
            self.on_event(event, args)
