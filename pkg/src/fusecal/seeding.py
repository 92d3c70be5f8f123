"""Stable seed derivation for reproducible per-sample randomness."""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """Hash a tuple of identifiers into a 63-bit RNG seed.

    Stable across processes and Python versions (unlike hash()), so a
    sample's randomness is a pure function of (base_seed, day, log,
    frame, epoch, ...).
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
