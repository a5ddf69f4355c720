"""Deterministic sub-stream RNG derivation."""
from __future__ import annotations

import random


def derived_rng(*parts: object) -> random.Random:
    """A fresh RNG keyed by the joined parts.

    String seeding hashes the key with SHA-512 internally, so the stream is
    stable across runs, platforms, and call order; two call sites with the
    same key always see the same stream regardless of what was drawn
    elsewhere.
    """
    return random.Random("|".join(str(p) for p in parts))
