import random
import struct

import pytest
from hypothesis import given, strategies as st

from ubiq.wire import (
    MAX_MESSAGE_LENGTH,
    MalformedStreamError,
    OversizeMessageError,
    WireError,
    WireMessage,
    decode_stream,
    encode,
    from_text_object,
    generate_network_id,
    make_address,
    to_text_object,
)


def msg(obj=0x01, comp=1, payload=b""):
    return WireMessage(make_address(obj, comp), payload)


class TestEncode:
    def test_empty_payload_is_14_bytes(self):
        raw = encode(msg())
        assert len(raw) == 14
        assert raw[:4] == bytes([0x0A, 0x00, 0x00, 0x00])

    def test_56_byte_payload_is_70_bytes(self):
        # the payload size at which the fixed prefix is exactly 20% overhead
        raw = encode(msg(payload=b"x" * 56))
        assert len(raw) == 70

    def test_oversize_payload_rejected(self):
        with pytest.raises(OversizeMessageError):
            encode(msg(payload=b"\0" * 2_000_000))

    def test_little_endian_layout(self):
        raw = encode(msg(obj=0x0102030405060708, comp=0x0A0B, payload=b"hi"))
        length, obj, comp = struct.unpack("<IQH", raw[:14])
        assert length == 12
        assert obj == 0x0102030405060708
        assert comp == 0x0A0B
        assert raw[14:] == b"hi"


class TestDecodeStream:
    def test_round_trip_two_messages(self):
        m1 = msg(payload=b"alpha")
        m2 = msg(obj=99999, comp=7, payload=b"beta")
        messages, rest = decode_stream(encode(m1) + encode(m2))
        assert messages == [m1, m2]
        assert rest == b""

    def test_incomplete_prefix_returns_remainder(self):
        raw = encode(msg(payload=b"tail"))[:13]
        messages, rest = decode_stream(raw)
        assert messages == []
        assert rest == raw

    def test_length_below_address_size_is_malformed(self):
        with pytest.raises(MalformedStreamError):
            decode_stream(struct.pack("<I", 3))

    def test_length_above_cap_is_malformed(self):
        with pytest.raises(MalformedStreamError):
            decode_stream(struct.pack("<I", MAX_MESSAGE_LENGTH + 1))

    @given(st.lists(st.binary(max_size=200), max_size=5), st.data())
    def test_reframing_invariance(self, payloads, data):
        messages = [msg(obj=1000 + i, comp=1 + i, payload=p)
                    for i, p in enumerate(payloads)]
        stream = b"".join(encode(m) for m in messages)
        cut = data.draw(st.integers(min_value=0, max_value=len(stream)))
        first, rest1 = decode_stream(stream[:cut])
        second, rest2 = decode_stream(rest1 + stream[cut:])
        assert first + second == messages
        assert rest2 == b""


class TestGenerateNetworkId:
    def test_seeded_rng_is_reproducible(self):
        assert generate_network_id(random.Random(1)).value == 10499958131665515253

    def test_draws_exceed_reserved_range_and_are_distinct(self):
        rng = random.Random(42)
        values = [generate_network_id(rng).value for _ in range(10_000)]
        assert all(v > 255 for v in values)
        assert len(set(values)) == len(values)


class TestTextObject:
    def test_round_trip(self):
        value = {"type": "ping", "seq": 1}
        assert from_text_object(to_text_object(value)) == value

    def test_empty_map_is_two_bytes(self):
        assert to_text_object({}) == b"{}"

    def test_non_utf8_payload_raises(self):
        with pytest.raises(WireError):
            from_text_object(b"\xff\xfe{}")

    @given(st.recursive(
        st.none() | st.booleans() | st.integers() | st.text(),
        lambda children: st.lists(children) | st.dictionaries(st.text(), children),
        max_leaves=20))
    def test_round_trip_property(self, value):
        assert from_text_object(to_text_object(value)) == value


class TestAddressValidity:
    def test_zero_ids_invalid(self):
        with pytest.raises(ValueError):
            make_address(0, 1)
        with pytest.raises(ValueError):
            make_address(1, 0)


@pytest.fixture(scope="module")
def vectors():
    import json
    import pathlib

    path = pathlib.Path(__file__).parent / "fixtures" / "wire-vectors.json"
    return json.loads(path.read_text())


class TestGoldenVectors:
    """Shared fixtures pinning the byte layout for other implementations."""

    def test_enough_cases(self, vectors):
        assert len(vectors["cases"]) >= 20
        assert vectors["prefix_size"] == 14
        assert vectors["max_message_length"] == MAX_MESSAGE_LENGTH

    def test_encode_matches_every_vector(self, vectors):
        import hashlib

        for case in vectors["cases"]:
            if "payload_hex" in case:
                payload = bytes.fromhex(case["payload_hex"])
            else:
                payload = bytes.fromhex(case["payload_repeat_hex"]) \
                    * case["payload_repeat_count"]
            frame = encode(msg(int(case["object_id"]),
                               case["component_id"], payload))
            if "frame_hex" in case:
                assert frame.hex() == case["frame_hex"], case["name"]
            else:
                assert len(frame) == case["frame_length"], case["name"]
                assert hashlib.sha256(frame).hexdigest() == \
                    case["frame_sha256"], case["name"]

    def test_decode_round_trips_every_vector(self, vectors):
        for case in vectors["cases"]:
            if "frame_hex" not in case:
                continue
            messages, rest = decode_stream(bytes.fromhex(case["frame_hex"]))
            assert rest == b""
            assert len(messages) == 1
            assert messages[0].address.object.value == int(case["object_id"])
            assert messages[0].address.component.value == case["component_id"]
            assert messages[0].payload.hex() == case.get("payload_hex", "")
