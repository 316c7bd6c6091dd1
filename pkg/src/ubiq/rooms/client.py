"""Client side of the rooms protocol.

A RoomClient is an ordinary component on a peer's scene. It talks to the
room server at the well-known server address and receives events at the
client component of its own scene id. Event sinks are plain callback
lists; all callbacks fire on the scene's update context during dispatch.
"""

import logging
import uuid as uuidlib

from ..wire import from_text_object, make_address
from .records import (
    ROOM_CLIENT_COMPONENT,
    ROOM_SERVER_ADDRESS,
    NotInRoomError,
    PeerRecord,
    RoomRecord,
)

log = logging.getLogger(__name__)


class RoomClient:
    def __init__(self, scene, peer_uuid=None):
        self.scene = scene
        self.me = PeerRecord(peer_uuid or str(uuidlib.uuid4()), scene.scene_id, {})
        self.room = None
        self.peers = {}  # uuid -> PeerRecord, never contains me

        self.on_joined = []          # (room)
        self.on_peer_added = []      # (peer)
        self.on_peer_removed = []    # (peer)
        self.on_room_updated = []    # (room)
        self.on_peer_updated = []    # (peer)
        self.on_rooms = []           # (list of room summaries)
        self.on_rejected = []        # (reason)
        self.on_pong = []            # (id)

        self.ctx = scene.register(
            self, make_address(scene.scene_id.value, ROOM_CLIENT_COMPONENT))
        # Catch replies the server could not route to our scene id.
        scene.register(self, ROOM_SERVER_ADDRESS)

    # -- requests --------------------------------------------------------

    def _request(self, rtype, args=None):
        args = dict(args or {})
        args["sceneid"] = str(self.scene.scene_id.value)
        self.ctx.send_json(ROOM_SERVER_ADDRESS, {"type": rtype, "args": args})

    def join(self, joincode=None, uuid=None, name=None, publish=False):
        """Join by code or room uuid, or create a new room by name.
        Resolution is asynchronous: success fires the joined event."""
        args = {"peer": self.me.to_json()}
        if joincode is not None:
            args["joincode"] = joincode
        elif uuid is not None:
            args["uuid"] = uuid
        elif name is not None:
            args["name"] = name
            args["publish"] = publish
        else:
            raise ValueError("join needs a joincode, uuid or name")
        self._request("Join", args)

    def leave(self):
        if self.room is None:
            return
        self._request("Leave")
        self.room = None
        self.peers = {}

    def set_peer_properties(self, updates):
        if self.room is None:
            raise NotInRoomError("set_peer_properties before joining")
        if not updates:
            return
        self.me.properties.update(updates)
        self._request("UpdatePeerProperties", {"properties": dict(updates)})

    def set_room_properties(self, updates):
        if self.room is None:
            raise NotInRoomError("set_room_properties before joining")
        if not updates:
            return
        self._request("UpdateRoomProperties", {"properties": dict(updates)})

    def discover(self):
        self._request("DiscoverRooms")

    def ping(self, ping_id):
        self._request("Ping", {"id": ping_id})

    # -- events ----------------------------------------------------------

    def receive(self, msg):
        try:
            message = from_text_object(msg.payload)
            mtype = message["type"]
            args = message.get("args")
        except Exception:
            log.warning("room client: unparseable server message")
            return
        if mtype == "SetRoom":
            self.room = RoomRecord.from_json(args["room"])
            self.peers = {}
            for obj in args["peers"]:
                peer = PeerRecord.from_json(obj)
                if peer.uuid != self.me.uuid:
                    self.peers[peer.uuid] = peer
            _fire(self.on_joined, self.room)
        elif mtype == "PeerAdded":
            peer = PeerRecord.from_json(args["peer"])
            if peer.uuid != self.me.uuid:
                self.peers[peer.uuid] = peer
                _fire(self.on_peer_added, peer)
        elif mtype == "PeerRemoved":
            peer = PeerRecord.from_json(args["peer"])
            removed = self.peers.pop(peer.uuid, None)
            if removed is not None:
                _fire(self.on_peer_removed, removed)
        elif mtype == "RoomUpdated":
            if self.room is not None:
                self.room = RoomRecord.from_json(args["room"])
                _fire(self.on_room_updated, self.room)
        elif mtype == "PeerUpdated":
            peer = PeerRecord.from_json(args["peer"])
            if peer.uuid == self.me.uuid:
                self.me = peer
            else:
                self.peers[peer.uuid] = peer
            _fire(self.on_peer_updated, peer)
        elif mtype == "Rooms":
            _fire(self.on_rooms, args)
        elif mtype == "Pong":
            _fire(self.on_pong, args.get("id"))
        elif mtype == "Rejected":
            _fire(self.on_rejected, args.get("reason"))
        # Requests relayed from other in-room peers (e.g. "Join") land
        # here too via the shared server address; ignore them.


def _fire(callbacks, *args):
    for callback in list(callbacks):
        try:
            callback(*args)
        except Exception:
            log.exception("room event callback failed")
