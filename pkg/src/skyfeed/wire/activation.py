"""24-character activation keys: 20 body characters plus a 4-hex-digit CRC-16 check."""

from __future__ import annotations

import binascii
import enum
import re
from dataclasses import dataclass
from pathlib import Path

KEY_LENGTH = 24
BODY_LENGTH = 20
ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"
_ALPHABET_RE = re.compile(r"[0-9A-Z]*")


class KeyFormatError(ValueError):
    pass


class DenialReason(enum.Enum):
    LENGTH = "length"
    ALPHABET = "alphabet"
    CHECKSUM = "checksum"
    NOT_ALLOWED = "not_allowed"
    VERSION = "version"


@dataclass(frozen=True)
class KeyVerdict:
    accepted: bool
    reason: DenialReason | None = None

    def __bool__(self):
        return self.accepted


ACCEPTED = KeyVerdict(True)


def crc16_ccitt_false(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, unreflected, no final xor."""
    return binascii.crc_hqx(data, 0xFFFF)


def _check_digits(body: str) -> str:
    return f"{crc16_ccitt_false(body.encode('ascii')):04X}"


def generate_key(body: str) -> str:
    if len(body) != BODY_LENGTH:
        raise KeyFormatError(f"key body must be {BODY_LENGTH} characters, got {len(body)}")
    if not _ALPHABET_RE.fullmatch(body):
        raise KeyFormatError(f"key body must use [0-9A-Z] only: {body!r}")
    return body + _check_digits(body)


def validate_key(text: str) -> KeyVerdict:
    if len(text) != KEY_LENGTH:
        return KeyVerdict(False, DenialReason.LENGTH)
    if not _ALPHABET_RE.fullmatch(text):
        return KeyVerdict(False, DenialReason.ALPHABET)
    if text[BODY_LENGTH:] != _check_digits(text[:BODY_LENGTH]):
        return KeyVerdict(False, DenialReason.CHECKSUM)
    return ACCEPTED


def load_allowlist(path) -> frozenset[str]:
    """One key per line; blank lines and '#' comments ignored."""
    keys = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            keys.add(line)
    return frozenset(keys)


def authorize(key: str, allowlist: frozenset[str] | None = None) -> KeyVerdict:
    """Checksum validation, then allowlist membership when an allowlist is configured."""
    verdict = validate_key(key)
    if verdict and allowlist is not None and key not in allowlist:
        return KeyVerdict(False, DenialReason.NOT_ALLOWED)
    return verdict
