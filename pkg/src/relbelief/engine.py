"""Discretized relative belief inference.

A parameter range is cut into bins of width ``delta`` (the meaningful
difference). Prior and posterior bin masses give the relative belief ratio
per bin, and from it the plausible region, the implausible region, the
estimate and relative belief credible regions.

Bins are half open, ``[edge_i, edge_{i+1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MASS_TOL = 1e-9


class GridError(ValueError):
    pass


class EmptyHistogramError(ValueError):
    pass


class InconsistentMassError(ValueError):
    """Posterior mass sits in a bin the prior says is impossible."""


@dataclass(frozen=True, eq=False)
class Grid:
    edges: np.ndarray
    midpoints: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        mids = np.asarray(self.midpoints, dtype=float)
        if edges.ndim != 1 or len(edges) < 2:
            raise GridError("a grid needs at least one bin")
        if len(mids) != len(edges) - 1:
            raise GridError("one midpoint per bin")
        if not np.all(np.diff(edges) > 0):
            raise GridError("edges must be strictly increasing")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "midpoints", mids)

    @classmethod
    def regular(cls, lo: float, delta: float, count: int) -> "Grid":
        if delta <= 0:
            raise GridError("delta must be positive")
        if count < 1:
            raise GridError("a grid needs at least one bin")
        i = np.arange(count + 1)
        edges = lo + i * delta
        mids = lo + (i[1:] - 0.5) * delta
        return cls(edges, mids)

    @classmethod
    def from_range(cls, lo: float, hi: float, delta: float) -> "Grid":
        """Regular grid on [lo, hi]; (hi - lo) / delta must be an integer."""
        count = (hi - lo) / delta
        k = int(round(count))
        if k < 1 or abs(count - k) > 1e-9 * max(1.0, k):
            raise GridError(f"(hi - lo) / delta = {count} is not a positive integer")
        return cls.regular(lo, delta, k)

    @property
    def lo(self) -> float:
        return float(self.edges[0])

    @property
    def hi(self) -> float:
        return float(self.edges[-1])

    @property
    def delta(self) -> float:
        """Common bin width (nan for a relabelled, irregular grid)."""
        w = np.diff(self.edges)
        return float(w[0]) if np.allclose(w, w[0], rtol=1e-9, atol=0) else float("nan")

    def __len__(self):
        return len(self.midpoints)

    def locate(self, values) -> np.ndarray:
        """Bin index of each value, -1 when it falls outside [lo, hi)."""
        values = np.asarray(values, dtype=float)
        idx = np.searchsorted(self.edges, values, side="right") - 1
        idx[(values < self.edges[0]) | (values >= self.edges[-1])] = -1
        return idx

    def relabel(self, f: Callable[[np.ndarray], np.ndarray]) -> "Grid":
        """Carry the bins through a strictly increasing map ``f``."""
        return Grid(f(self.edges), f(self.midpoints))


def build_grid(samples, delta: float, tail_prob: float = 0.001, origin: float = 0.0) -> Grid:
    """Grid covering the central ``1 - tail_prob`` of ``samples``.

    The range runs between the empirical ``tail_prob/2`` and
    ``1 - tail_prob/2`` quantiles and is widened outward so that every edge
    sits on ``origin + j * delta``.
    """
    samples = np.asarray(samples, dtype=float)
    samples = samples[np.isfinite(samples)]
    if len(samples) < 1000:
        raise GridError("need at least 1000 samples to place a grid")
    if delta <= 0:
        raise GridError("delta must be positive")
    if not 0 <= tail_prob < 1:
        raise GridError("tail_prob must lie in [0, 1)")
    lo, hi = np.quantile(samples, [tail_prob / 2, 1 - tail_prob / 2])
    if hi <= lo:
        raise GridError("samples are degenerate, cannot place a grid")
    j_lo = np.floor((lo - origin) / delta + 1e-12)
    j_hi = np.ceil((hi - origin) / delta - 1e-12)
    if j_hi <= j_lo:
        j_hi = j_lo + 1
    return Grid.regular(origin + j_lo * delta, delta, int(j_hi - j_lo))


def histogram_mass(samples, grid: Grid) -> np.ndarray:
    """Proportion of in-range samples per bin (out-of-range ones are dropped)."""
    idx = grid.locate(samples)
    idx = idx[idx >= 0]
    if len(idx) == 0:
        raise EmptyHistogramError("no samples fall inside the grid")
    counts = np.bincount(idx, minlength=len(grid)).astype(float)
    return counts / counts.sum()


def relative_belief(prior_mass, posterior_mass) -> np.ndarray:
    """Bin-wise ratio posterior/prior.

    A bin empty under both gets 1 (no evidence either way); a bin with
    posterior mass but no prior mass means the two grids disagree and raises.
    """
    prior = np.asarray(prior_mass, dtype=float)
    post = np.asarray(posterior_mass, dtype=float)
    if prior.shape != post.shape:
        raise ValueError("prior and posterior masses differ in length")
    for name, m in (("prior", prior), ("posterior", post)):
        if np.any(m < 0) or abs(m.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"{name} mass must be a probability vector")
    empty = prior == 0
    if np.any(post[empty] > 0):
        raise InconsistentMassError("posterior mass in a bin with zero prior mass")
    rb = np.ones_like(prior)
    rb[~empty] = post[~empty] / prior[~empty]
    return rb


@dataclass(frozen=True, eq=False)
class DiscreteBeliefs:
    grid: Grid
    prior_mass: np.ndarray
    posterior_mass: np.ndarray
    rb: np.ndarray = field(init=False)

    def __post_init__(self):
        prior = np.asarray(self.prior_mass, dtype=float)
        post = np.asarray(self.posterior_mass, dtype=float)
        if len(prior) != len(self.grid):
            raise ValueError("one prior mass per grid bin")
        rb = relative_belief(prior, post)
        # a full-grid plausible region would put total posterior mass above 1
        if np.all(rb > 1):
            raise AssertionError("every bin has RB > 1, masses cannot both sum to 1")
        for arr in (prior, post, rb):
            arr.setflags(write=False)
        object.__setattr__(self, "prior_mass", prior)
        object.__setattr__(self, "posterior_mass", post)
        object.__setattr__(self, "rb", rb)

    @classmethod
    def from_samples(cls, grid: Grid, prior_samples, posterior_samples) -> "DiscreteBeliefs":
        return cls(grid, histogram_mass(prior_samples, grid), histogram_mass(posterior_samples, grid))

    @classmethod
    def from_weights(cls, grid: Grid, prior_weights, posterior_weights) -> "DiscreteBeliefs":
        """Normalize unnormalized bin weights into masses first."""
        pw = np.asarray(prior_weights, dtype=float)
        qw = np.asarray(posterior_weights, dtype=float)
        return cls(grid, pw / pw.sum(), qw / qw.sum())

    def relabel(self, f) -> "DiscreteBeliefs":
        return DiscreteBeliefs(self.grid.relabel(f), self.prior_mass, self.posterior_mass)

    def integral(self) -> float:
        """Sum of rb * prior mass; equals 1 for any valid pair of masses."""
        return float(np.sum(self.rb * self.prior_mass))


@dataclass(frozen=True, eq=False)
class Region:
    """A set of grid bins with its prior and posterior content."""

    grid: Grid
    bins: np.ndarray
    posterior_content: float
    prior_content: float

    @property
    def intervals(self) -> list[tuple[float, float]]:
        """Contiguous runs of bins merged into [lo, hi) intervals."""
        if len(self.bins) == 0:
            return []
        b = np.sort(self.bins)
        breaks = np.flatnonzero(np.diff(b) > 1)
        starts = np.r_[b[0], b[breaks + 1]]
        stops = np.r_[b[breaks], b[-1]]
        e = self.grid.edges
        return [(float(e[s]), float(e[t + 1])) for s, t in zip(starts, stops)]

    @property
    def touches_lower(self) -> bool:
        return len(self.bins) > 0 and int(np.min(self.bins)) == 0

    @property
    def touches_upper(self) -> bool:
        return len(self.bins) > 0 and int(np.max(self.bins)) == len(self.grid) - 1

    @property
    def is_empty(self) -> bool:
        return len(self.bins) == 0

    @property
    def is_full(self) -> bool:
        return len(self.bins) == len(self.grid)

    def __contains__(self, value) -> bool:
        i = int(self.grid.locate([value])[0])
        return i >= 0 and i in set(self.bins.tolist())


def _region(beliefs: DiscreteBeliefs, mask) -> Region:
    bins = np.flatnonzero(mask)
    return Region(
        beliefs.grid,
        bins,
        float(beliefs.posterior_mass[bins].sum()),
        float(beliefs.prior_mass[bins].sum()),
    )


def plausible_region(beliefs: DiscreteBeliefs) -> Region:
    """Bins with evidence in favor, rb > 1."""
    region = _region(beliefs, beliefs.rb > 1)
    assert not region.is_full
    return region


def implausible_region(beliefs: DiscreteBeliefs) -> Region:
    """Bins with evidence against, rb < 1."""
    return _region(beliefs, beliefs.rb < 1)


def rb_estimate(beliefs: DiscreteBeliefs) -> float:
    """Midpoint of the bin with the largest rb (first such bin on ties)."""
    return float(beliefs.grid.midpoints[int(np.argmax(beliefs.rb))])


def credible_region(beliefs: DiscreteBeliefs, gamma: float) -> Region:
    """Relative belief credible region {rb >= r_gamma}.

    r_gamma is the largest r with posterior mass of {rb < r} at most 1 - gamma,
    which makes the posterior content at least gamma.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    levels, inverse = np.unique(beliefs.rb, return_inverse=True)
    weight = np.bincount(inverse, weights=beliefs.posterior_mass, minlength=len(levels))
    below = np.r_[0.0, np.cumsum(weight)[:-1]]  # posterior mass of {rb < levels[j]}
    j = int(np.flatnonzero(below <= 1 - gamma).max())
    return _region(beliefs, beliefs.rb >= levels[j])
