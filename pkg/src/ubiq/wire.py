"""Message framing and addressing.

Every message on the wire is a discrete binary blob with a 14-byte
little-endian prefix: 4-byte length (counting everything after the length
field), 8-byte object id and 2-byte component id. The payload is opaque to
the network; JSON text objects are a convenience encoding on top.
"""

import json
import struct
from dataclasses import dataclass, field
from typing import List, Tuple

# Object ids 1-255 are reserved for well-known system services; randomly
# minted ids are always above this range.
RESERVED_ID_MAX = 255

ADDRESS_SIZE = 10
PREFIX_SIZE = 14
MAX_MESSAGE_LENGTH = 1 << 20  # length-field cap, protects the relay

_PREFIX = struct.Struct("<IQH")


class WireError(Exception):
    pass


class OversizeMessageError(WireError):
    pass


class MalformedStreamError(WireError):
    """The byte stream cannot be a prefix of valid framed messages.

    The connection that produced it must be dropped.
    """


@dataclass(frozen=True, order=True)
class NetworkId:
    """64-bit object id; one half of a message address."""

    value: int

    def __post_init__(self):
        if not 0 < self.value < 1 << 64:
            raise ValueError(f"invalid network id {self.value}")


@dataclass(frozen=True, order=True)
class ComponentId:
    """16-bit component id; the other half of a message address."""

    value: int

    def __post_init__(self):
        if not 0 < self.value < 1 << 16:
            raise ValueError(f"invalid component id {self.value}")


@dataclass(frozen=True, order=True)
class Address:
    object: NetworkId
    component: ComponentId


def make_address(object_id: int, component_id: int) -> Address:
    return Address(NetworkId(object_id), ComponentId(component_id))


@dataclass(frozen=True)
class WireMessage:
    address: Address
    payload: bytes = b""

    @property
    def length(self) -> int:
        return ADDRESS_SIZE + len(self.payload)


def encode(msg: WireMessage) -> bytes:
    """Serialize a message: 14-byte prefix followed by the payload."""
    if msg.length > MAX_MESSAGE_LENGTH:
        raise OversizeMessageError(
            f"message length {msg.length} exceeds cap {MAX_MESSAGE_LENGTH}"
        )
    return _PREFIX.pack(
        msg.length, msg.address.object.value, msg.address.component.value
    ) + msg.payload


def decode_stream(buffer: bytes) -> Tuple[List[WireMessage], bytes]:
    """Split a byte stream into complete messages plus the unconsumed tail.

    Raises MalformedStreamError for a length field that cannot frame a
    valid message (below the address size or above the cap).
    """
    messages = []
    view = memoryview(buffer)
    offset = 0
    n = len(buffer)
    while n - offset >= 4:
        (length,) = struct.unpack_from("<I", view, offset)
        if length < ADDRESS_SIZE or length > MAX_MESSAGE_LENGTH:
            raise MalformedStreamError(f"bad length field {length}")
        if n - offset < 4 + length:
            break
        obj, comp = struct.unpack_from("<QH", view, offset + 4)
        payload = bytes(view[offset + PREFIX_SIZE : offset + 4 + length])
        try:
            address = make_address(obj, comp)
        except ValueError as e:
            raise MalformedStreamError(str(e)) from e
        messages.append(WireMessage(address, payload))
        offset += 4 + length
    return messages, bytes(view[offset:])


class StreamDecoder:
    """Stateful reframer for one connection's inbound byte stream."""

    def __init__(self):
        self._buffer = b""

    def feed(self, data: bytes) -> List[WireMessage]:
        self._buffer += data
        messages, self._buffer = decode_stream(self._buffer)
        return messages


def generate_network_id(rng) -> NetworkId:
    """Mint a uniformly random id above the reserved system range."""
    return NetworkId(rng.randrange(RESERVED_ID_MAX + 1, 1 << 64))


def to_text_object(value) -> bytes:
    """Encode a JSON-compatible record as a UTF-8 payload."""
    return json.dumps(value, separators=(",", ":")).encode("utf-8")


def from_text_object(payload: bytes):
    try:
        return json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise WireError(f"malformed text object: {e}") from e
