"""Deterministic seed derivation.

Every random decision in the pipeline draws from a generator derived from
the master seed plus a string path naming the decision, so results are
independent of iteration order and reproducible across processes.
"""

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Collapse (master_seed, purpose, ...) into a stable 64-bit seed."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def rng_for(*parts) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))
