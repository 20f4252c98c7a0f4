"""Deterministic per-cell seed derivation.

Every random draw in an experiment comes from a generator seeded with
``derive_seed(master, user_id, mechanism, eps_index)``, so results do not
depend on how cells are scheduled across workers.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit avalanche mixer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def hash64(text: str) -> int:
    """Stable 64-bit hash of a string (independent of PYTHONHASHSEED)."""
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


def derive_seed(master: int, user_id: str, mechanism: str, eps_index: int) -> int:
    h = mix64(master & MASK64)
    for part in (hash64(user_id), hash64(mechanism), eps_index & MASK64):
        h = mix64(h ^ part)
    return h
