"""Counter-based seeding: every replication gets its own stream from (master, key...)."""

import numpy as np


def derive_seed(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))


def derive_rng(master: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *key))
