"""Poisson rate known to lie in a bounded interval (l0, u0).

The prior is a gamma (shape, rate) truncated to (l0, u0). With T the sum
of n counts the posterior is gamma(alpha0 + T, beta0 + n) truncated to the
same interval, so the relative belief ratio of the neighbourhood
[lambda - delta/2, lambda + delta/2) has a closed form in incomplete gamma
functions. Biases are Monte Carlo proportions over draws of T, or exact
sums over its pmf.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from . import engine
from .core import BracketError, DomainError, RandomSource, bisect, draw_poisson, expand_bracket, gamma_cdf, gamma_pdf
from .mc import MCEstimate

DEFAULT_LAMBDA = 6.2
TABLE_HEADER_LAMBDA = 6.5


class ElicitationError(ValueError):
    pass


@dataclass(frozen=True)
class ConstrainedPoissonSpec:
    l0: float = 3.0
    u0: float = 10.0
    l1: float = 3.5
    u1: float = 9.5
    m0: float = 6.5
    gamma: float = 0.99
    n: int = 1
    delta: float = 0.5

    def __post_init__(self):
        if not 0 < self.l0 < self.l1 < self.u1 < self.u0:
            raise DomainError("need 0 < l0 < l1 < u1 < u0")
        if not math.isfinite(self.u0):
            raise DomainError("the support must be bounded")
        if not self.l1 < self.m0 < self.u1:
            raise DomainError("the mode must lie in (l1, u1)")
        if not 0 < self.gamma < 1:
            raise DomainError("gamma must lie in (0, 1)")
        if self.n < 1 or self.delta <= 0:
            raise DomainError("need n >= 1 and delta > 0")

    def with_n(self, n: int) -> "ConstrainedPoissonSpec":
        return replace(self, n=n)

    def grid(self, delta: Optional[float] = None) -> engine.Grid:
        return engine.Grid.from_range(self.l0, self.u0, delta or self.delta)


@dataclass(frozen=True)
class GammaPrior:
    """gamma(alpha, rate=beta) truncated to (l0, u0)."""

    alpha: float
    beta: float
    l0: float
    u0: float

    def __post_init__(self):
        if not (self.alpha >= 1 and self.beta > 0):
            raise DomainError("gamma prior needs alpha >= 1 and beta > 0")

    @property
    def mode(self) -> float:
        return (self.alpha - 1.0) / self.beta

    def _z(self, alpha, beta):
        return gamma_cdf(self.u0, alpha, beta) - gamma_cdf(self.l0, alpha, beta)

    def pdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        inside = (lam >= self.l0) & (lam <= self.u0)
        return np.where(inside, gamma_pdf(np.maximum(lam, 0.0), self.alpha, self.beta) / self._z(self.alpha, self.beta), 0.0)

    def cdf(self, lam):
        lam = np.clip(np.asarray(lam, dtype=float), self.l0, self.u0)
        lo = gamma_cdf(self.l0, self.alpha, self.beta)
        return (gamma_cdf(lam, self.alpha, self.beta) - lo) / self._z(self.alpha, self.beta)

    def mass(self, edges) -> np.ndarray:
        return np.diff(self.cdf(edges))

    def sample(self, src: RandomSource, size):
        lo, hi = gamma_cdf(self.l0, self.alpha, self.beta), gamma_cdf(self.u0, self.alpha, self.beta)
        u = lo + (hi - lo) * src.rng.uniform(size=size)
        return np.clip(special.gammaincinv(self.alpha, u) / self.beta, self.l0, self.u0)

    def neighbourhood_rb(self, n: int, totals, lo: float, hi: float) -> np.ndarray:
        """RB of [lo, hi) given the total count of n observations, one value per total."""
        lo, hi = max(lo, self.l0), min(hi, self.u0)
        if not lo < hi:
            raise DomainError("the neighbourhood misses the support")
        t = np.asarray(totals, dtype=float)
        a, b = self.alpha + t, self.beta + n
        with np.errstate(invalid="ignore", divide="ignore"):
            post = _interval_prob(lo, hi, a, b) / _interval_prob(self.l0, self.u0, a, b)
        prior = _interval_prob(lo, hi, self.alpha, self.beta) / _interval_prob(self.l0, self.u0, self.alpha, self.beta)
        # totals so extreme that both masses underflow carry negligible probability
        return np.nan_to_num(np.asarray(post / prior), nan=0.0)


def _interval_prob(lo, hi, a, b):
    """Gamma(a, rate b) probability of (lo, hi), from whichever tail avoids cancellation."""
    a = np.asarray(a, dtype=float)
    lower = special.gammainc(a, b * hi) - special.gammainc(a, b * lo)
    upper = special.gammaincc(a, b * lo) - special.gammaincc(a, b * hi)
    return np.where(a / b < 0.5 * (lo + hi), lower, upper)


def elicit_gamma(spec: ConstrainedPoissonSpec) -> tuple[float, float]:
    """(alpha0, beta0) with mode m0 and gamma probability on (l1, u1)."""
    if 1.0 - spec.gamma < 1e-10:
        # beta0 grows without bound as gamma -> 1 and cdf differences cannot resolve the target
        raise ElicitationError(f"gamma = {spec.gamma} is too close to 1; beta0 diverges")

    def excess(beta):
        a = 1.0 + spec.m0 * beta
        return gamma_cdf(spec.u1, a, beta) - gamma_cdf(spec.l1, a, beta) - spec.gamma

    try:
        bracket = expand_bracket(excess, 1e-6, 1.0, tolerance=1e-12, max_expand=60)
    except BracketError as exc:
        raise ElicitationError(f"no rate gives probability {spec.gamma} to (l1, u1): {exc}") from exc
    beta = bisect(excess, bracket)
    return 1.0 + spec.m0 * beta, beta


def gamma_prior(spec: ConstrainedPoissonSpec) -> GammaPrior:
    return GammaPrior(*elicit_gamma(spec), spec.l0, spec.u0)


def draw_totals(src: RandomSource, lam: float, n: int, N: int, via_counts: bool = False) -> np.ndarray:
    """N draws of the sum of n Poisson(lam) counts."""
    if via_counts:
        return draw_poisson(src, lam, (N, n)).sum(axis=1)
    return draw_poisson(src, n * lam, N)


def _support(n: int, lam: float) -> np.ndarray:
    m = n * lam
    return np.arange(0, int(m + 12.0 * math.sqrt(m) + 40.0))


def _neighbourhood(lam: float, delta: float) -> tuple[float, float]:
    return lam - delta / 2.0, lam + delta / 2.0


def _alternatives(spec: ConstrainedPoissonSpec, lam: float, delta: float) -> list[float]:
    alts = [a for a in (lam - delta, lam + delta) if spec.l0 < a < spec.u0]
    if not alts:
        warnings.warn(f"no alternative at distance {delta} from {lam} inside the support")
    return alts


def poisson_bias_against(
    spec: ConstrainedPoissonSpec,
    prior: GammaPrior,
    lambda_star: float = DEFAULT_LAMBDA,
    delta: Optional[float] = None,
    N: int = 100_000,
    src: Optional[RandomSource] = None,
    exact: bool = False,
) -> MCEstimate:
    """M(RB(lambda* neighbourhood | T) <= 1 | lambda*)."""
    lo, hi = _neighbourhood(lambda_star, delta or spec.delta)
    if exact:
        t = _support(spec.n, lambda_star)
        rb = prior.neighbourhood_rb(spec.n, t, lo, hi)
        return MCEstimate(float(stats.poisson.pmf(t, spec.n * lambda_star)[rb <= 1].sum()), 0.0, 0)
    t = draw_totals(src or RandomSource(0), lambda_star, spec.n, N)
    u, inv = np.unique(t, return_inverse=True)
    rb = prior.neighbourhood_rb(spec.n, u, lo, hi)[inv]
    return MCEstimate.proportion(rb <= 1)


def poisson_bias_in_favor(
    spec: ConstrainedPoissonSpec,
    prior: GammaPrior,
    lambda_star: float = DEFAULT_LAMBDA,
    delta: Optional[float] = None,
    N: int = 100_000,
    src: Optional[RandomSource] = None,
    exact: bool = False,
) -> MCEstimate:
    """max over lambda* -+ delta inside the support of M(RB(lambda* neighbourhood | T) >= 1 | alternative).

    Zero when neither alternative lies inside (l0, u0).
    """
    delta = delta or spec.delta
    lo, hi = _neighbourhood(lambda_star, delta)
    src = src or RandomSource(0)
    ests = []
    for j, alt in enumerate(_alternatives(spec, lambda_star, delta)):
        if exact:
            t = _support(spec.n, alt)
            rb = prior.neighbourhood_rb(spec.n, t, lo, hi)
            ests.append(MCEstimate(float(stats.poisson.pmf(t, spec.n * alt)[rb >= 1].sum()), 0.0, 0))
        else:
            t = draw_totals(src.spawn(j), alt, spec.n, N)
            u, inv = np.unique(t, return_inverse=True)
            ests.append(MCEstimate.proportion(prior.neighbourhood_rb(spec.n, u, lo, hi)[inv] >= 1))
    return max(ests, key=lambda e: e.value, default=MCEstimate(0.0, 0.0, 0))


def _weighted(values: Sequence[MCEstimate], weights) -> MCEstimate:
    w = np.asarray(weights, dtype=float)
    v = np.array([e.value for e in values])
    se = np.array([e.se for e in values])
    return MCEstimate(float(np.sum(w * v)), float(math.sqrt(np.sum((w * se) ** 2))), int(sum(e.n for e in values)))


@dataclass(frozen=True)
class ConfidenceRow:
    n: int
    frequentist: float
    bayes: float
    worst_lambda: float
    bayes_se: float


def poisson_confidence_table(
    spec: ConstrainedPoissonSpec,
    prior: GammaPrior,
    n_list: Sequence[int],
    delta: Optional[float] = None,
    src: Optional[RandomSource] = None,
    N: int = 100_000,
    exact: bool = False,
) -> list[ConfidenceRow]:
    """Per n: 1 - max of the bias against over the grid, and 1 - its prior-weighted average.

    The average weights each grid midpoint by the prior mass of its bin.
    """
    delta = delta or spec.delta
    src = src or RandomSource(0)
    grid = spec.grid(delta)
    mass = prior.mass(grid.edges)
    rows = []
    for i, n in enumerate(n_list):
        sp = spec.with_n(n)
        ests = [
            poisson_bias_against(sp, prior, lam, delta, N, src.spawn(i).spawn(j), exact)
            for j, lam in enumerate(grid.midpoints)
        ]
        vals = np.array([e.value for e in ests])
        j = int(np.argmax(vals))
        avg = _weighted(ests, mass)
        rows.append(ConfidenceRow(n, 1.0 - float(vals[j]), 1.0 - avg.value, float(grid.midpoints[j]), avg.se))
    return rows


def poisson_estimation_bias_in_favor(
    spec: ConstrainedPoissonSpec,
    prior: GammaPrior,
    delta: Optional[float] = None,
    N: int = 100_000,
    src: Optional[RandomSource] = None,
    exact: bool = False,
) -> MCEstimate:
    """Bias in favor averaged over the grid midpoints with prior bin masses as weights."""
    delta = delta or spec.delta
    src = src or RandomSource(0)
    grid = spec.grid(delta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ests = [
            poisson_bias_in_favor(spec, prior, lam, delta, N, src.spawn(j), exact)
            for j, lam in enumerate(grid.midpoints)
        ]
    return _weighted(ests, prior.mass(grid.edges))


def bias_against_curve(spec, prior, lams, delta=None, N=100_000, src=None, exact=False) -> np.ndarray:
    src = src or RandomSource(0)
    return np.array([poisson_bias_against(spec, prior, lam, delta, N, src.spawn(j), exact).value for j, lam in enumerate(lams)])


def bias_in_favor_curve(spec, prior, lams, delta=None, N=100_000, src=None, exact=False) -> np.ndarray:
    src = src or RandomSource(0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return np.array(
            [poisson_bias_in_favor(spec, prior, lam, delta, N, src.spawn(j), exact).value for j, lam in enumerate(lams)]
        )


@dataclass
class Inference:
    beliefs: engine.DiscreteBeliefs
    estimate: float
    plausible: engine.Region
    implausible: engine.Region


def infer(spec: ConstrainedPoissonSpec, prior: GammaPrior, total: int) -> Inference:
    """Grid inference from the total count of spec.n observations."""
    grid = spec.grid()
    post = GammaPrior(prior.alpha + total, prior.beta + spec.n, prior.l0, prior.u0)
    beliefs = engine.DiscreteBeliefs(grid, prior.mass(grid.edges), post.mass(grid.edges))
    return Inference(
        beliefs,
        engine.rb_estimate(beliefs),
        engine.plausible_region(beliefs),
        engine.implausible_region(beliefs),
    )
