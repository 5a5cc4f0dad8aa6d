"""Deterministic per-sample randomness.

Every random outcome in the toolkit is keyed by (seed, label...) through a
stable hash, never by draw order, so parallel execution and re-runs cannot
change results. The derivation is part of the toolkit's contract:

    key   = blake2b(str(part0) + "\\x1f" + str(part1) + ..., digest_size=8)
    value = little-endian uint64 of the digest

Uniform draws take the top 53 bits of the key: ``(key >> 11) / 2**53``.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stable_hash(*parts) -> int:
    """64-bit stable hash of the given parts (ints, strings)."""
    payload = b"\x1f".join(str(p).encode("utf-8") for p in parts)
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def uniform_draw(*parts) -> float:
    """One uniform float in [0, 1) derived from the parts."""
    return (stable_hash(*parts) >> 11) / float(1 << 53)


def derived_rng(*parts) -> np.random.Generator:
    """A numpy Generator seeded from the stable hash of the parts."""
    return np.random.default_rng(stable_hash(*parts))
