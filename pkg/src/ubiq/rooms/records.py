"""Shared rendezvous records and their JSON forms.

Scene ids travel as decimal strings in rooms JSON so that JavaScript
peers never hit double-precision truncation on 64-bit ids.
"""

from dataclasses import dataclass, field
from typing import Dict

from ..wire import NetworkId, make_address

# Well-known addresses, agreed at design time. The room server answers at
# object id 1; each client answers at its own scene id.
ROOM_SERVER_ADDRESS = make_address(1, 1)
ROOM_CLIENT_COMPONENT = 2

# Serialized property updates above this are rejected.
MAX_PROPERTIES_BYTES = 8 * 1024


class RoomsError(Exception):
    pass


class NotInRoomError(RoomsError):
    pass


@dataclass
class RoomRecord:
    uuid: str
    joincode: str
    name: str
    publish: bool
    properties: Dict[str, str] = field(default_factory=dict)

    def to_json(self):
        return {
            "uuid": self.uuid,
            "joincode": self.joincode,
            "name": self.name,
            "publish": self.publish,
            "properties": dict(self.properties),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            uuid=obj["uuid"],
            joincode=obj["joincode"],
            name=obj["name"],
            publish=bool(obj["publish"]),
            properties=dict(obj.get("properties", {})),
        )


@dataclass
class PeerRecord:
    uuid: str
    scene_id: NetworkId
    properties: Dict[str, str] = field(default_factory=dict)

    def to_json(self):
        return {
            "uuid": self.uuid,
            "sceneid": str(self.scene_id.value),
            "properties": dict(self.properties),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            uuid=obj["uuid"],
            scene_id=NetworkId(int(obj["sceneid"])),
            properties=dict(obj.get("properties", {})),
        )
