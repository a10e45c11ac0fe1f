"""
Seed Splitting
Counter-based per-trial random streams derived from one master seed, so
results do not depend on the order in which trials run.
"""

import numpy as np

STREAMS = {
    "extension": 1,
    "sqfn": 2,
    "condexp": 3,
    "counterexample": 4,
    "norms": 5,
}

_MASK64 = (1 << 64) - 1


def stream_id(name: str) -> int:
    return STREAMS.get(name, 0)


def trial_rng(master_seed: int, stream: int, trial: int) -> np.random.Generator:
    """Philox keyed by (master seed, stream) with the trial index in the counter"""
    key = (int(master_seed) & _MASK64) + (int(stream) << 64)
    counter = int(trial) << 128
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def suite_rng(master_seed: int, suite: str, trial: int = 0) -> np.random.Generator:
    return trial_rng(master_seed, stream_id(suite), trial)
