"""Deterministic derivation of independent RNG streams from one master seed.

Every random choice in a run is drawn from a stream labelled by purpose
("secrets", "measure", ...) and, in the harness, by trial index.  Streams
are derived by hashing the master seed together with the labels, so adding
or removing draws from one stream never shifts another, and per-trial
results are identical at any worker count.
"""

from __future__ import annotations

import hashlib
import random

__all__ = ["derive_seed", "spawn_rng"]


def derive_seed(master: int, *labels: object) -> int:
    """Map (master seed, labels) to a stable 64-bit child seed."""
    tag = str(int(master)) + "/" + "/".join(str(label) for label in labels)
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def spawn_rng(master: int, *labels: object) -> random.Random:
    """Return a ``random.Random`` seeded from the derived child seed."""
    return random.Random(derive_seed(master, *labels))
