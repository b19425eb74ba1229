"""Counter-based RNG streams.

A stream is addressed by ``(seed, stream, purpose)``; every address maps to
an independent Philox generator, so episode ``i`` of a batch draws the same
numbers no matter which worker runs it or in what order.
"""
from dataclasses import dataclass

import numpy as np

BANDIT = 0
POLICY = 1
AUX = 2


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def to_list(self):
        return [int(self.seed), int(self.stream)]


def derive(master_seed, index):
    return RngSeed(int(master_seed), int(index))


def generator(seed, purpose, *extra):
    ss = np.random.SeedSequence(entropy=int(seed.seed), spawn_key=(int(seed.stream), int(purpose), *map(int, extra)))
    return np.random.Generator(np.random.Philox(ss))
