"""Seedable hashing of byte-string words onto the unit interval (0, 1]."""
from __future__ import annotations

from dataclasses import dataclass
from hashlib import blake2b
from typing import Iterable

import numpy as np

#: Identifier written into the sketch file header for keyed BLAKE2b-64.
HASH_BLAKE2B_64 = 1

_TWO_64 = float(2**64)
_U64_MAX = 2**64 - 1


def _as_bytes(word: bytes | str) -> bytes:
    if isinstance(word, str):
        return word.encode("utf-8")
    return bytes(word)


@dataclass(frozen=True)
class UnitHash:
    """Keyed 64-bit BLAKE2b hash mapped to (0, 1] as ``(v + 1) / 2**64``.

    Identical words always map to the same point, which is what makes a
    repeated element invisible to the sketch.  ``str`` words are UTF-8
    encoded.
    """

    seed: int = 0
    hash_id: int = HASH_BLAKE2B_64

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _U64_MAX:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.hash_id != HASH_BLAKE2B_64:
            raise ValueError(f"unsupported hash id {self.hash_id}")
        # keyed state is copied per word instead of re-keyed
        object.__setattr__(self, "_proto", blake2b(digest_size=8, key=self.seed.to_bytes(8, "little")))

    def hash64(self, word: bytes | str) -> int:
        h = self._proto.copy()  # type: ignore[attr-defined]
        h.update(_as_bytes(word))
        return int.from_bytes(h.digest(), "little")

    def __call__(self, word: bytes | str) -> float:
        return hash_to_unit(self, word)

    def many(self, words: Iterable[bytes | str]) -> np.ndarray:
        """Hash a batch of words into a float64 array."""
        fresh = self._proto.copy  # type: ignore[attr-defined]
        out = []
        for w in words:
            h = fresh()
            h.update(w if isinstance(w, bytes) else _as_bytes(w))
            out.append((int.from_bytes(h.digest(), "little") + 1) / _TWO_64)
        return np.asarray(out, dtype=np.float64)


def unit_from_u64(v: int) -> float:
    """Map a 64-bit hash value to (0, 1]; ``v = 0`` gives ``2**-64``."""
    if not 0 <= v <= _U64_MAX:
        raise ValueError("v must fit in 64 unsigned bits")
    return (v + 1) / _TWO_64


def hash_to_unit(h: UnitHash, word: bytes | str) -> float:
    return unit_from_u64(h.hash64(word))
