"""Monte Carlo estimates and reproducible fan-out over worker streams."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import RandomSource


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo probability estimate with its standard error."""

    value: float
    se: float
    n: int

    def __float__(self):
        return self.value

    def __format__(self, spec):
        return format(self.value, spec)

    @classmethod
    def proportion(cls, hits) -> "MCEstimate":
        hits = np.asarray(hits, dtype=bool)
        n = hits.size
        p = float(hits.mean())
        return cls(p, math.sqrt(p * (1 - p) / n), n)

    @classmethod
    def from_counts(cls, hits: int, n: int) -> "MCEstimate":
        p = hits / n
        return cls(p, math.sqrt(p * (1 - p) / n), n)

    @classmethod
    def mean(cls, values) -> "MCEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
        return cls(float(values.mean()), se, n)


def split(n: int, parts: int) -> list[int]:
    """Split ``n`` draws into ``parts`` near-equal chunk sizes."""
    parts = max(1, min(parts, n))
    base, extra = divmod(n, parts)
    return [base + (i < extra) for i in range(parts)]


def fan_out(
    func: Callable,
    n: int,
    src: RandomSource,
    workers: int = 1,
    args: Sequence = (),
) -> list:
    """Run ``func(*args, count, stream)`` over chunks of ``n`` draws.

    Chunk ``j`` always draws from ``src.spawn(j)``, so the result depends on
    ``(seed, workers)`` only, not on scheduling. ``func`` must be a module
    level function when ``workers > 1``.
    """
    counts = split(n, workers)
    streams = [src.spawn(j) for j in range(len(counts))]
    if len(counts) == 1:
        return [func(*args, counts[0], streams[0])]
    with ProcessPoolExecutor(max_workers=len(counts)) as pool:
        futures = [pool.submit(func, *args, c, s) for c, s in zip(counts, streams)]
        return [f.result() for f in futures]
