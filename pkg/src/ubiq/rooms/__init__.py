from .records import (
    MAX_PROPERTIES_BYTES,
    ROOM_CLIENT_COMPONENT,
    ROOM_SERVER_ADDRESS,
    NotInRoomError,
    PeerRecord,
    RoomRecord,
    RoomsError,
)
from .client import RoomClient
from .server import CODE_SPACE, Room, RoomServer, ServerFullError

__all__ = [
    "MAX_PROPERTIES_BYTES",
    "ROOM_CLIENT_COMPONENT",
    "ROOM_SERVER_ADDRESS",
    "NotInRoomError",
    "PeerRecord",
    "RoomRecord",
    "RoomsError",
    "RoomClient",
    "CODE_SPACE",
    "Room",
    "RoomServer",
    "ServerFullError",
]
