"""Deterministic random-stream derivation.

Every source of randomness in the package is a numpy Generator derived from
a master seed plus a string label, so independent mechanisms (and parallel
frontier cells) get independent, reproducible streams.
"""

import hashlib

import numpy as np


def derive_seed(master_seed: int, *labels) -> int:
    h = hashlib.sha256()
    h.update(str(int(master_seed)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "big")


def derive_rng(master_seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *labels))
