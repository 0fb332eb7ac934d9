"""Normal mean known to lie in a bounded interval (l0, u0).

Two elicited priors are supported: a beta on the interval and a normal
truncated to it. Biases use the histogram approximation of the prior
predictive of xbar: draw mu from the prior and xbar | mu, bin xbar over
(l0 - 3 s, u0 + 3 s) with s = sigma0 / sqrt(n), and estimate the relative
belief ratio of mu* on each bin as (bin probability under N(mu*, s^2)) /
(bin proportion).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import engine
from .core import (
    BracketError,
    DomainError,
    RandomSource,
    RootBracket,
    beta_cdf,
    beta_pdf,
    bisect,
    draw_beta,
    draw_truncated_normal,
    expand_bracket,
    normal_cdf,
    normal_pdf,
)
from .mc import MCEstimate


class ElicitationError(ValueError):
    pass


@dataclass(frozen=True)
class ConstrainedNormalSpec:
    l0: float = 0.0
    u0: float = 10.0
    l1: float = 0.5
    u1: float = 9.5
    m0: float = 5.0
    gamma: float = 0.99
    sigma0_sq: float = 1.0
    n: int = 10
    delta: float = 0.5

    def __post_init__(self):
        if not self.l0 < self.u0:
            raise DomainError("need l0 < u0")
        if not (math.isfinite(self.l0) and math.isfinite(self.u0)):
            raise DomainError("the support must be bounded")
        if not self.l0 <= self.l1 < self.u1 <= self.u0:
            raise DomainError("need l0 <= l1 < u1 <= u0")
        if not self.l1 < self.m0 < self.u1:
            raise DomainError("the mode must lie in (l1, u1)")
        if not 0 < self.gamma < 1:
            raise DomainError("gamma must lie in (0, 1)")
        if self.sigma0_sq <= 0 or self.n < 1 or self.delta <= 0:
            raise DomainError("need sigma0_sq > 0, n >= 1 and delta > 0")

    @property
    def s(self) -> float:
        """Standard deviation of the sample mean."""
        return math.sqrt(self.sigma0_sq / self.n)

    def with_n(self, n: int) -> "ConstrainedNormalSpec":
        return replace(self, n=n)

    def grid(self, delta: Optional[float] = None) -> engine.Grid:
        """Candidate means l0 + (i - 1/2) delta."""
        return engine.Grid.from_range(self.l0, self.u0, delta or self.delta)


@dataclass(frozen=True)
class ConstrainedPrior:
    """Beta(a, b) rescaled to (l0, u0), or N(a, b^2) truncated to it."""

    kind: str
    a: float
    b: float
    l0: float
    u0: float

    def __post_init__(self):
        if self.kind not in ("beta", "truncnorm"):
            raise DomainError(f"unknown prior kind {self.kind!r}")
        if self.kind == "beta" and not (self.a >= 1 and self.b >= 1):
            raise DomainError("beta prior needs alpha0, beta0 >= 1")
        if self.kind == "truncnorm" and not self.b > 0:
            raise DomainError("truncated normal prior needs tau0 > 0")

    @property
    def width(self) -> float:
        return self.u0 - self.l0

    def _z(self, mu):
        return (np.asarray(mu, dtype=float) - self.a) / self.b

    def _norm_const(self):
        return normal_cdf((self.u0 - self.a) / self.b) - normal_cdf((self.l0 - self.a) / self.b)

    def pdf(self, mu):
        mu = np.asarray(mu, dtype=float)
        inside = (mu >= self.l0) & (mu <= self.u0)
        if self.kind == "beta":
            x = np.clip((mu - self.l0) / self.width, 0.0, 1.0)
            d = beta_pdf(x, self.a, self.b) / self.width
        else:
            d = normal_pdf(self._z(mu)) / (self.b * self._norm_const())
        return np.where(inside, d, 0.0)

    def cdf(self, mu):
        mu = np.clip(np.asarray(mu, dtype=float), self.l0, self.u0)
        if self.kind == "beta":
            return beta_cdf((mu - self.l0) / self.width, self.a, self.b)
        lo = normal_cdf((self.l0 - self.a) / self.b)
        return (normal_cdf(self._z(mu)) - lo) / self._norm_const()

    def mass(self, edges) -> np.ndarray:
        return np.diff(self.cdf(edges))

    def sample(self, src: RandomSource, size):
        if self.kind == "beta":
            return self.l0 + self.width * draw_beta(src, self.a, self.b, size)
        return draw_truncated_normal(src, self.a, self.b, self.l0, self.u0, size)

    def mode(self) -> float:
        if self.kind == "beta":
            if self.a == 1 and self.b == 1:
                return 0.5 * (self.l0 + self.u0)
            return self.l0 + self.width * (self.a - 1) / (self.a + self.b - 2)
        return float(np.clip(self.a, self.l0, self.u0))


# ---------------------------------------------------------------------------
# elicitation

def _beta_params(spec: ConstrainedNormalSpec, tau0: float) -> tuple[float, float]:
    w = spec.u0 - spec.l0
    return tau0 * (spec.m0 - spec.l0) / w + 1.0, tau0 * (spec.u0 - spec.m0) / w + 1.0


def elicit_beta(spec: ConstrainedNormalSpec) -> tuple[float, float]:
    """(alpha0, beta0) with mode m0 and probability gamma on (l1, u1).

    Both parameters are tied to the concentration tau0 = alpha0 + beta0 - 2
    through the mode, and tau0 is found by bisection.
    """
    if (spec.l1, spec.u1) == (spec.l0, spec.u0):
        return 1.0, 1.0
    w = spec.u0 - spec.l0
    xl, xu = (spec.l1 - spec.l0) / w, (spec.u1 - spec.l0) / w

    def excess(tau0):
        a, b = _beta_params(spec, tau0)
        return beta_cdf(xu, a, b) - beta_cdf(xl, a, b) - spec.gamma

    if excess(0.0) >= 0:
        raise ElicitationError("the uniform prior already exceeds gamma on (l1, u1)")
    try:
        bracket = expand_bracket(excess, 0.0, 1.0, tolerance=1e-12)
    except BracketError as exc:
        raise ElicitationError(str(exc)) from exc
    return _beta_params(spec, bisect(excess, bracket))


def elicit_truncnorm(spec: ConstrainedNormalSpec, mu0: Optional[float] = None) -> tuple[float, float]:
    """(mu0, tau0) so that N(mu0, tau0^2) truncated to (l0, u0) gives (l1, u1) probability gamma.

    As tau0 grows the content falls to (u1 - l1) / (u0 - l0), so gamma has to
    exceed that ratio.
    """
    mu0 = spec.m0 if mu0 is None else mu0
    floor = (spec.u1 - spec.l1) / (spec.u0 - spec.l0)
    if spec.gamma <= floor:
        raise ElicitationError(
            f"gamma = {spec.gamma} does not exceed (u1 - l1)/(u0 - l0) = {floor}; tau0 would be infinite"
        )

    def excess(tau):
        num = normal_cdf((spec.u1 - mu0) / tau) - normal_cdf((spec.l1 - mu0) / tau)
        den = normal_cdf((spec.u0 - mu0) / tau) - normal_cdf((spec.l0 - mu0) / tau)
        return spec.gamma - num / den

    w = spec.u0 - spec.l0
    try:
        bracket = expand_bracket(excess, 1e-6 * w, w, tolerance=1e-12, max_expand=60)
    except BracketError as exc:
        raise ElicitationError(str(exc)) from exc
    return mu0, bisect(excess, bracket)


def beta_prior(spec: ConstrainedNormalSpec) -> ConstrainedPrior:
    return ConstrainedPrior("beta", *elicit_beta(spec), spec.l0, spec.u0)


def truncnorm_prior(spec: ConstrainedNormalSpec) -> ConstrainedPrior:
    return ConstrainedPrior("truncnorm", *elicit_truncnorm(spec), spec.l0, spec.u0)


# ---------------------------------------------------------------------------
# histogram approximation of the prior predictive

def default_k(n: int) -> int:
    return 4000 if n >= 500 else 1000


@dataclass(frozen=True, eq=False)
class PredictiveHistogram:
    edges: np.ndarray
    proportions: np.ndarray
    s: float

    def probs(self, mu) -> np.ndarray:
        """Bin probabilities under N(mu, s^2), one row per mean."""
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        c = normal_cdf((self.edges[None, :] - mu[:, None]) / self.s)
        return np.diff(c, axis=1)

    def rb(self, mu_star) -> np.ndarray:
        """Estimated RB(mu* | xbar in bin); +inf on bins no predictive draw reached."""
        p = self.probs(mu_star)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = p / self.proportions[None, :]
        r[:, self.proportions == 0] = np.inf
        return r


def predictive_histogram(
    spec: ConstrainedNormalSpec, prior: ConstrainedPrior, N: int, k: int, src: RandomSource
) -> PredictiveHistogram:
    s = spec.s
    mu = prior.sample(src, N)
    xbar = src.rng.normal(mu, s)
    edges = np.linspace(spec.l0 - 3 * s, spec.u0 + 3 * s, k + 1)
    counts, _ = np.histogram(xbar, edges)
    return PredictiveHistogram(edges, counts / N, s)


def _chunks(x, size=256):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    for i in range(0, len(x), size):
        yield x[i:i + size]


def bias_against_values(hist: PredictiveHistogram, mus) -> np.ndarray:
    """M(RB(mu | xbar) <= 1 | mu) for each mu, from one predictive histogram."""
    out = []
    for chunk in _chunks(mus):
        p = hist.probs(chunk)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(hist.proportions > 0, p / hist.proportions, np.inf)
        out.append(np.sum(np.where(r <= 1, p, 0.0), axis=1))
    return np.concatenate(out)


def _alternatives(mu, sep, l0, u0):
    alts = np.stack([mu - sep, mu + sep], axis=1)
    valid = (alts > l0) & (alts < u0)
    return alts, valid


def bias_in_favor_values(hist: PredictiveHistogram, mus, separation: float, l0: float, u0: float) -> np.ndarray:
    """max over mu -+ separation (inside the support) of M(RB(mu | xbar) >= 1 | alternative)."""
    out = []
    for chunk in _chunks(mus):
        p = hist.probs(chunk)
        with np.errstate(divide="ignore", invalid="ignore"):
            favor = np.where(hist.proportions > 0, p / hist.proportions, np.inf) >= 1
        alts, valid = _alternatives(chunk, separation, l0, u0)
        best = np.zeros(len(chunk))
        for j in range(2):
            q = hist.probs(alts[:, j])
            v = np.sum(np.where(favor, q, 0.0), axis=1)
            best = np.maximum(best, np.where(valid[:, j], v, 0.0))
        out.append(best)
    return np.concatenate(out)


def bias_against_histogram(
    spec: ConstrainedNormalSpec,
    prior: ConstrainedPrior,
    mu_star: float,
    N: int = 100_000,
    k: Optional[int] = None,
    src: Optional[RandomSource] = None,
) -> float:
    """Histogram estimate of M(RB(mu* | xbar) <= 1 | mu*)."""
    hist = predictive_histogram(spec, prior, N, k or default_k(spec.n), src or RandomSource(0))
    return float(bias_against_values(hist, [mu_star])[0])


def bias_in_favor_normal(
    spec: ConstrainedNormalSpec,
    prior: ConstrainedPrior,
    mu_star: float,
    delta: Optional[float] = None,
    N: int = 100_000,
    k: Optional[int] = None,
    src: Optional[RandomSource] = None,
) -> float:
    """Bias in favor of mu* against the alternatives mu* -+ delta."""
    delta = delta or spec.delta
    hist = predictive_histogram(spec, prior, N, k or default_k(spec.n), src or RandomSource(0))
    alts, valid = _alternatives(np.array([mu_star]), delta, spec.l0, spec.u0)
    if not valid.any():
        warnings.warn(f"no alternative at distance {delta} from {mu_star} inside the support")
    return float(bias_in_favor_values(hist, [mu_star], delta, spec.l0, spec.u0)[0])


def estimation_bias_in_favor(
    spec: ConstrainedNormalSpec,
    prior: ConstrainedPrior,
    delta: Optional[float] = None,
    N: int = 100_000,
    k: Optional[int] = None,
    src: Optional[RandomSource] = None,
    n_prior: int = 10_000,
) -> MCEstimate:
    """Bias in favor averaged over mu drawn from the prior."""
    src = src or RandomSource(0)
    delta = delta or spec.delta
    hist = predictive_histogram(spec, prior, N, k or default_k(spec.n), src.spawn(0))
    mus = prior.sample(src.spawn(1), n_prior)
    return MCEstimate.mean(bias_in_favor_values(hist, mus, delta, spec.l0, spec.u0))


@dataclass(frozen=True)
class ConfidenceRow:
    n: int
    frequentist: float  # 1 - max over the mu grid of the bias against
    bayes: float  # 1 - prior average of the bias against
    worst_mu: float
    bayes_se: float


def confidence_table(
    spec: ConstrainedNormalSpec,
    prior: ConstrainedPrior,
    n_list: Sequence[int],
    src: RandomSource,
    N: int = 100_000,
    k: Optional[int] = None,
    grid_delta: float = 0.1,
    n_prior: int = 10_000,
) -> list[ConfidenceRow]:
    """Frequentist lower bound and Bayesian coverage of the plausible region per n."""
    rows = []
    for i, n in enumerate(n_list):
        sp = spec.with_n(n)
        sub = src.spawn(i)
        hist = predictive_histogram(sp, prior, N, k or default_k(n), sub.spawn(0))
        grid = sp.grid(grid_delta)
        curve = bias_against_values(hist, grid.midpoints)
        j = int(np.argmax(curve))
        avg = MCEstimate.mean(bias_against_values(hist, prior.sample(sub.spawn(1), n_prior)))
        rows.append(ConfidenceRow(n, 1.0 - float(curve[j]), 1.0 - avg.value, float(grid.midpoints[j]), avg.se))
    return rows


def bias_against_curve(
    spec: ConstrainedNormalSpec,
    prior: ConstrainedPrior,
    mus,
    src: RandomSource,
    N: int = 100_000,
    k: Optional[int] = None,
) -> np.ndarray:
    hist = predictive_histogram(spec, prior, N, k or default_k(spec.n), src)
    return bias_against_values(hist, mus)


def bias_in_favor_curve(
    spec: ConstrainedNormalSpec,
    prior: ConstrainedPrior,
    mus,
    src: RandomSource,
    delta: Optional[float] = None,
    N: int = 100_000,
    k: Optional[int] = None,
) -> np.ndarray:
    hist = predictive_histogram(spec, prior, N, k or default_k(spec.n), src)
    return bias_in_favor_values(hist, mus, delta or spec.delta, spec.l0, spec.u0)


# ---------------------------------------------------------------------------
# inference for an observed sample mean

def posterior_weights(spec: ConstrainedNormalSpec, prior: ConstrainedPrior, grid: engine.Grid, xbar, points: int = 33):
    """Unnormalized posterior bin weights (Simpson rule), one row per xbar."""
    e = grid.edges
    t = np.linspace(0.0, 1.0, points)
    mu = e[:-1, None] + np.diff(e)[:, None] * t[None, :]
    w = np.ones(points)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w = w[None, :] * np.diff(e)[:, None] / (3.0 * (points - 1))
    dens = prior.pdf(mu) * w
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    lik = normal_pdf((xbar[:, None, None] - mu[None]) / spec.s)
    return np.sum(lik * dens[None], axis=2)


@dataclass
class Inference:
    beliefs: engine.DiscreteBeliefs
    estimate: float
    plausible: engine.Region
    implausible: engine.Region


def infer(spec: ConstrainedNormalSpec, prior: ConstrainedPrior, xbar: float) -> Inference:
    grid = spec.grid()
    beliefs = engine.DiscreteBeliefs.from_weights(
        grid, prior.mass(grid.edges), posterior_weights(spec, prior, grid, xbar)[0]
    )
    return Inference(
        beliefs,
        engine.rb_estimate(beliefs),
        engine.plausible_region(beliefs),
        engine.implausible_region(beliefs),
    )
