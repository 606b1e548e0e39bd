"""Deterministic randomness.

Every protocol random string ``R`` is a small hashable value (an int, or a
tuple for composed decoders).  ``FieldRNG(R, p)`` expands it through Philox, a
counter-based generator, so a round's draws depend only on ``R`` and on the
documented draw order of the protocol consuming it.
"""

from __future__ import annotations

import hashlib
from typing import Hashable

import numpy as np


def _encode(obj: Hashable) -> bytes:
    if isinstance(obj, bytes):
        return b"b" + len(obj).to_bytes(4, "big") + obj
    if isinstance(obj, str):
        raw = obj.encode()
        return b"s" + len(raw).to_bytes(4, "big") + raw
    if isinstance(obj, (bool, np.bool_)):
        return b"t" if obj else b"f"
    if isinstance(obj, (int, np.integer)):
        raw = str(int(obj)).encode()
        return b"i" + len(raw).to_bytes(4, "big") + raw
    if isinstance(obj, np.ndarray):
        arr = np.ascontiguousarray(obj, dtype=np.int64)
        return b"a" + _encode(arr.shape) + _encode(arr.tobytes())
    if isinstance(obj, tuple):
        return b"(" + b"".join(_encode(x) for x in obj) + b")"
    raise TypeError(f"cannot derive a seed from {type(obj).__name__}")


def derive_key(*parts: Hashable) -> int:
    """128-bit key from a tuple of ints, strings, bytes, integer arrays and tuples of these."""
    return int.from_bytes(hashlib.blake2b(_encode(tuple(parts)), digest_size=16).digest(), "big")


def hash_to_field(p: int, *parts: Hashable) -> int:
    """Pseudo-random field element keyed by ``parts``; used for random oracle tables."""
    return derive_key("oracle", *parts) % p


def hash_to_unit(*parts: Hashable) -> float:
    return derive_key("unit", *parts) / float(1 << 128)


class FieldRNG:
    """Uniform field elements from a seed; ``draws`` counts elements consumed."""

    def __init__(self, seed: Hashable, p: int, domain: str = "round"):
        self.p = p
        self._gen = np.random.Generator(np.random.Philox(key=derive_key(domain, seed)))
        self.draws = 0

    def elements(self, k: int) -> np.ndarray:
        self.draws += k
        return self._gen.integers(0, self.p, size=k, dtype=np.int64)

    def element(self) -> int:
        return int(self.elements(1)[0])

    def seed(self) -> int:
        """A fresh 63-bit seed for a sub-protocol."""
        return int(self._gen.integers(0, 1 << 63, dtype=np.int64))

    def uniform(self) -> float:
        return float(self._gen.random())
