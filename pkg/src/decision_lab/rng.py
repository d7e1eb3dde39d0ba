"""Partition-invariant seeding for Monte Carlo replication loops.

Replications are grouped in fixed-size chunks. Chunk ``i`` draws from a
generator keyed on ``(master_seed, i)`` only, so results do not depend on
the order chunks are evaluated in or on how many workers evaluate them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

from .errors import ConfigurationError

T = TypeVar("T")

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


@dataclass(frozen=True)
class SeedPlan:
    master_seed: int = 0
    chunk_size: int = 4096

    def __post_init__(self):
        check_seed(self.master_seed)
        if int(self.chunk_size) < 1:
            raise ConfigurationError("chunk_size must be a positive integer")

    def n_chunks(self, reps: int) -> int:
        return -(-int(reps) // self.chunk_size)

    def chunk_bounds(self, i: int, reps: int) -> tuple[int, int]:
        lo = i * self.chunk_size
        return lo, min(lo + self.chunk_size, int(reps))

    def chunk_rng(self, i: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(int(i),))
        return np.random.Generator(np.random.PCG64(seq))

    def map_chunks(
        self,
        reps: int,
        work: Callable[[np.random.Generator, int, int], T],
        threads: int = 1,
    ) -> list[T]:
        """Run ``work(rng, start, stop)`` once per chunk, results in chunk order."""
        n = self.n_chunks(reps)

        def one(i: int) -> T:
            lo, hi = self.chunk_bounds(i, reps)
            return work(self.chunk_rng(i), lo, hi)

        if threads is None or threads <= 1 or n <= 1:
            return [one(i) for i in range(n)]
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(one, range(n)))


def as_seed_plan(seed_plan: SeedPlan | int | None) -> SeedPlan:
    if seed_plan is None:
        return SeedPlan()
    if isinstance(seed_plan, SeedPlan):
        return seed_plan
    return SeedPlan(master_seed=check_seed(seed_plan))
