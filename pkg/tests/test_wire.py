import io
import random

import pytest
from hypothesis import given, strategies as st

from oracles import crc16_ccitt_false_bitwise, crc32_bitwise
from skyfeed.codec import EncodedFrame
from skyfeed.frames import Resolution
from skyfeed.wire import protocol as p
from skyfeed.wire.activation import (ALPHABET, DenialReason, KeyFormatError, authorize,
                                     crc16_ccitt_false, generate_key, load_allowlist, validate_key)

# -- CRCs ----------------------------------------------------------------------


def test_crc32_check_values():
    assert p.crc32(b"") == 0
    assert p.crc32(b"123456789") == 0xCBF43926


@given(st.binary(max_size=300))
def test_crc32_matches_bitwise_oracle(data):
    assert p.crc32(data) == crc32_bitwise(data) == p.crc32(data)


@given(st.binary(max_size=300))
def test_crc16_matches_bitwise_oracle(data):
    assert crc16_ccitt_false(data) == crc16_ccitt_false_bitwise(data)


def test_crc16_check_value():
    assert crc16_ccitt_false(b"123456789") == 0x29B1


# -- message framing -------------------------------------------------------------


def test_bye_bytes():
    # trailer frozen from the bitwise oracle over 04 00 00 00 00
    assert p.encode_message(p.BYE) == bytes([4, 0, 0, 0, 0, 0x33, 0xA2, 0x51, 0xDD])


def test_hello_length():
    data = p.encode_message(p.hello(generate_key("A" * 20)))
    assert len(data) == 1 + 4 + 25 + 4
    assert data[:6] == bytes([1, 0, 0, 0, 25, 1])


def test_roundtrip_simple():
    for msg in (p.BYE, p.hello("X" * 24), p.HelloAck(p.AckStatus.ACCEPTED, "n", "f").to_message()):
        assert p.decode_message(io.BytesIO(p.encode_message(msg))) == msg


messages = st.builds(p.WireMessage, st.sampled_from(list(p.MessageKind)), st.binary(max_size=400))


@given(messages)
def test_roundtrip_property(msg):
    data = p.encode_message(msg)
    assert len(data) == 5 + int.from_bytes(data[1:5], "big") + 4  # self-delimiting
    stream = io.BytesIO(data + b"trailing")
    assert p.decode_message(stream) == msg
    assert stream.read() == b"trailing"


def _frame_bytes():
    enc = EncodedFrame(True, bytes([4, 9, 2, 7]), Resolution(2, 2), seq=7, pts_micros=123456)
    return p.encode_message(p.frame_message(enc)), enc


def test_frame_payload_layout():
    data, enc = _frame_bytes()
    payload = data[5:-4]
    assert payload[:4] == (7).to_bytes(4, "big")
    assert payload[4] == 1
    assert payload[5:13] == (123456).to_bytes(8, "big")
    assert payload[13:17] == bytes([0, 2, 0, 2])
    assert payload[17:] == enc.payload
    assert p.parse_frame(p.decode_message(data)) == enc


def test_crc_flip_detected():
    data = bytearray(_frame_bytes()[0])
    data[-1] ^= 0x01
    with pytest.raises(p.CrcMismatchError):
        p.decode_message(bytes(data))


def test_unknown_kind():
    with pytest.raises(p.UnknownKindError):
        p.decode_message(bytes([0x7F, 0, 0, 0, 0, 0, 0, 0, 0]))


@pytest.mark.parametrize("cut", [0, 1, 4, 5, 8])
def test_truncation(cut):
    data = p.encode_message(p.WireMessage(p.MessageKind.FRAME, b"abcd"))
    with pytest.raises(p.TruncatedStreamError):
        p.decode_message(data[:cut])


def test_oversized_length_rejected_without_reading():
    with pytest.raises(p.ProtocolError):
        p.decode_message(bytes([3, 0xFF, 0xFF, 0xFF, 0xFF]), max_payload=1024)


@given(st.binary(max_size=64))
def test_arbitrary_bytes_never_crash(data):
    try:
        p.decode_message(data)
    except p.ProtocolError:
        pass


def test_hello_ack_roundtrip_and_limits():
    ack = p.HelloAck(p.AckStatus.DENIED, "SIM-PHANTOM-3P", "v01.02")
    assert p.HelloAck.from_message(ack.to_message()) == ack
    with pytest.raises(ValueError):
        p.HelloAck(p.AckStatus.ACCEPTED, "x" * 256, "").to_message()
    with pytest.raises(p.PayloadError):
        p.HelloAck.from_message(p.WireMessage(p.MessageKind.HELLO_ACK, bytes([0, 5, 65])))


# -- activation keys ---------------------------------------------------------------


def test_generate_key_check_digits():
    key = generate_key("A" * 20)
    assert len(key) == 24
    assert key[20:] == "%04X" % crc16_ccitt_false_bitwise(b"A" * 20) == "1277"
    assert validate_key(key)


@pytest.mark.parametrize("body", ["A" * 19, "A" * 21, "a" * 20, "A" * 19 + "-"])
def test_generate_key_bad_body(body):
    with pytest.raises(KeyFormatError):
        generate_key(body)


@given(st.text(alphabet=ALPHABET, min_size=20, max_size=20))
def test_generate_then_validate(body):
    assert validate_key(generate_key(body)).accepted


def test_denials():
    key = generate_key("DRONE0123456789ABCDE")
    assert validate_key(key[:23]).reason is DenialReason.LENGTH
    assert validate_key("a" + key[1:]).reason is DenialReason.ALPHABET
    changed = ("B" if key[0] != "B" else "C") + key[1:]
    assert validate_key(changed).reason is DenialReason.CHECKSUM


def test_single_edit_sweep_body_positions():
    key = generate_key("K3Y5W33PB0DYQX7Z0N1C")
    for pos in range(20):
        for ch in ALPHABET:
            if ch != key[pos]:
                assert validate_key(key[:pos] + ch + key[pos + 1:]).reason is DenialReason.CHECKSUM


def test_allowlist(tmp_path):
    k1, k2 = generate_key("A" * 20), generate_key("B" * 20)
    f = tmp_path / "keys.txt"
    f.write_text(f"# fleet keys\n{k1}  # primary\n\n", encoding="utf-8")
    allow = load_allowlist(f)
    assert allow == {k1}
    assert authorize(k1, allow)
    assert authorize(k2, allow).reason is DenialReason.NOT_ALLOWED
    assert authorize(k2, None)


def test_random_message_fuzz_roundtrip():
    rnd = random.Random(7)
    for _ in range(200):
        msg = p.WireMessage(rnd.choice(list(p.MessageKind)), rnd.randbytes(rnd.randrange(0, 100)))
        assert p.decode_message(p.encode_message(msg)) == msg
