"""Fernet authenticated symmetric encryption (token version 0x80).

Tokens are url-safe base64 over:

    0x80 | timestamp u64 BE seconds | IV 16 bytes
    | AES-128-CBC ciphertext (PKCS7, always padded)
    | HMAC-SHA256 tag over everything before it

The token layout, padding, MAC handling, and TTL rules are implemented
here; only the raw AES block cipher comes from the ``cryptography``
package. Timestamp and IV are injectable so tests can be deterministic;
left unset they fall back to the wall clock and OS entropy.
"""

from __future__ import annotations

import base64
import binascii
import hmac as hmac_mod
import os
import random
import time
from dataclasses import dataclass
from math import ceil

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import (
    AuthenticationError,
    ExpiredTokenError,
    TokenFormatError,
    UnsupportedVersionError,
    ValidationError,
)

TOKEN_VERSION = 0x80
MAX_CLOCK_SKEW = 60
_BLOCK = 16
# version + timestamp + IV + HMAC tag; ciphertext sits in between
_OVERHEAD = 1 + 8 + 16 + 32


@dataclass(frozen=True)
class FernetKey:
    """A 32-byte split key: 16 signing bytes then 16 encryption bytes."""

    signing_key: bytes
    encryption_key: bytes

    def __post_init__(self):
        if len(self.signing_key) != 16 or len(self.encryption_key) != 16:
            raise ValidationError("signing and encryption halves must each be 16 bytes")

    @classmethod
    def from_bytes(cls, raw: bytes) -> "FernetKey":
        if len(raw) != 32:
            raise ValidationError(f"key material must be 32 bytes, got {len(raw)}")
        return cls(raw[:16], raw[16:])

    @classmethod
    def from_encoded(cls, encoded: str | bytes) -> "FernetKey":
        if isinstance(encoded, str):
            encoded = encoded.encode("ascii")
        try:
            raw = base64.urlsafe_b64decode(encoded)
        except (binascii.Error, ValueError) as exc:
            raise ValidationError(f"key is not url-safe base64: {exc}") from exc
        return cls.from_bytes(raw)

    def encoded(self) -> str:
        return base64.urlsafe_b64encode(self.signing_key + self.encryption_key).decode("ascii")


def generate_key(rng_seed: int | None = None) -> FernetKey:
    """Fresh key from OS entropy, or from a seeded PRNG (test use only)."""
    if rng_seed is None:
        return FernetKey.from_bytes(os.urandom(32))
    return FernetKey.from_bytes(random.Random(rng_seed).randbytes(32))


def token_length(plaintext_length: int) -> int:
    """Exact encoded token length for a plaintext of the given byte length."""
    raw = _OVERHEAD + _BLOCK * ((plaintext_length // _BLOCK) + 1)
    return 4 * ceil(raw / 3)


def _pkcs7_pad(data: bytes) -> bytes:
    n = _BLOCK - len(data) % _BLOCK
    return data + bytes([n]) * n


def _pkcs7_unpad(data: bytes) -> bytes:
    if not data or len(data) % _BLOCK:
        raise TokenFormatError("ciphertext is not a whole number of blocks")
    n = data[-1]
    if not 1 <= n <= _BLOCK or data[-n:] != bytes([n]) * n:
        raise TokenFormatError("invalid PKCS7 padding")
    return data[:-n]


def encrypt(
    key: FernetKey,
    plaintext: bytes,
    timestamp: int | None = None,
    iv: bytes | None = None,
) -> bytes:
    """Produce a Fernet token for ``plaintext``.

    Any byte sequence is encryptable; the empty plaintext still yields one
    full padding block.
    """
    if timestamp is None:
        timestamp = int(time.time())
    if not (0 <= timestamp < 2**64):
        raise ValidationError("timestamp must fit in 64 unsigned bits")
    if iv is None:
        iv = os.urandom(16)
    if len(iv) != 16:
        raise ValidationError(f"IV must be exactly 16 bytes, got {len(iv)}")
    encryptor = Cipher(algorithms.AES(key.encryption_key), modes.CBC(iv)).encryptor()
    ciphertext = encryptor.update(_pkcs7_pad(bytes(plaintext))) + encryptor.finalize()
    body = (
        bytes([TOKEN_VERSION])
        + timestamp.to_bytes(8, "big")
        + iv
        + ciphertext
    )
    tag = hmac_mod.new(key.signing_key, body, "sha256").digest()
    return base64.urlsafe_b64encode(body + tag)


def decrypt(
    key: FernetKey,
    token: bytes | str,
    ttl: int | None = None,
    now: int | None = None,
) -> bytes:
    """Verify and decrypt a token, returning the original plaintext.

    The HMAC is checked (constant time) before any decryption. With a
    ``ttl``, tokens older than ``ttl`` seconds or more than 60 s in the
    future are rejected.
    """
    if isinstance(token, str):
        try:
            token = token.encode("ascii")
        except UnicodeEncodeError as exc:
            raise TokenFormatError(f"token is not ASCII: {exc}") from exc
    try:
        data = base64.urlsafe_b64decode(token)
    except (binascii.Error, ValueError) as exc:
        raise TokenFormatError(f"token is not url-safe base64: {exc}") from exc
    # Re-encoding catches non-canonical base64 (stray bits in the final
    # symbol) that would otherwise alias to the same byte string.
    if base64.urlsafe_b64encode(data) != token:
        raise TokenFormatError("token is not canonical base64")
    if len(data) < _OVERHEAD + _BLOCK:
        raise TokenFormatError(f"token too short: {len(data)} decoded bytes")
    if data[0] != TOKEN_VERSION:
        raise UnsupportedVersionError(f"unknown token version 0x{data[0]:02x}")
    timestamp = int.from_bytes(data[1:9], "big")
    if ttl is not None:
        if now is None:
            now = int(time.time())
        if timestamp + ttl < now:
            raise ExpiredTokenError(f"token from {timestamp} expired at ttl={ttl}, now={now}")
        if timestamp > now + MAX_CLOCK_SKEW:
            raise ExpiredTokenError(f"token timestamp {timestamp} is too far in the future")
    tag = hmac_mod.new(key.signing_key, data[:-32], "sha256").digest()
    if not hmac_mod.compare_digest(tag, data[-32:]):
        raise AuthenticationError("HMAC verification failed")
    iv = data[9:25]
    ciphertext = data[25:-32]
    if len(ciphertext) % _BLOCK:
        raise TokenFormatError("ciphertext length is not a multiple of 16")
    decryptor = Cipher(algorithms.AES(key.encryption_key), modes.CBC(iv)).decryptor()
    padded = decryptor.update(ciphertext) + decryptor.finalize()
    return _pkcs7_unpad(padded)
