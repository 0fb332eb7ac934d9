"""Inference for a ratio of normal means, psi = mu / nu.

Two samples of sizes m and n with known common variance sigma0^2 reduce to
(xbar, ybar). Independent conjugate priors mu ~ N(mu0, tau10^2) and
nu ~ N(nu0, tau20^2) give closed forms for the prior and posterior density
of psi, hence for its relative belief ratio. Biases are estimated by drawing
data from the conditional prior predictive given psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import engine
from .core import (
    BracketError,
    DomainError,
    RandomSource,
    RootBracket,
    bisect,
    expand_bracket,
    log_normal_partial_moment,
    normal_cdf,
    normal_partial_moment,
    normal_quantile,
    normal_sf,
)
from .mc import MCEstimate, fan_out


class ElicitationError(ValueError):
    pass


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class FiellerModel:
    mu0: float
    tau10: float
    nu0: float
    tau20: float
    sigma0_sq: float = 1.0
    m: int = 10
    n: int = 10

    def __post_init__(self):
        if not (self.tau10 > 0 and self.tau20 > 0 and self.sigma0_sq > 0):
            raise DomainError("prior and sampling scales must be positive")
        if self.m < 1 or self.n < 1:
            raise DomainError("sample sizes must be at least 1")

    def with_sizes(self, m: int, n: int) -> "FiellerModel":
        return replace(self, m=m, n=n)


@dataclass(frozen=True)
class PsiConditional:
    """nu | psi is proportional to |nu| times a N(nu0_psi, tau20_psi_sq) density."""

    psi: float
    tau20_psi_sq: float
    nu0_psi: float
    z0: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "z0", -self.nu0_psi / math.sqrt(self.tau20_psi_sq))


def _conditional_arrays(psi, mu0, tau10, nu0, tau20):
    psi = np.asarray(psi, dtype=float)
    t2 = 1.0 / (psi**2 / tau10**2 + 1.0 / tau20**2)
    nu = t2 * (psi * mu0 / tau10**2 + nu0 / tau20**2)
    return t2, nu


def psi_conditional(model: FiellerModel, psi: float) -> PsiConditional:
    t2, nu = _conditional_arrays(psi, model.mu0, model.tau10, model.nu0, model.tau20)
    return PsiConditional(float(psi), float(t2), float(nu))


# ---------------------------------------------------------------------------
# elicitation

def _solve_scale(lo: float, hi: float, center: float, gamma: float) -> float:
    """Scale tau with N(center, tau^2) giving (lo, hi) probability gamma."""

    def excess(tau):
        return normal_cdf((hi - center) / tau) - normal_cdf((lo - center) / tau) - gamma

    width = hi - lo
    if excess(1e-8 * width) < 0:
        raise ElicitationError(
            f"no N({center}, tau^2) puts probability {gamma} on ({lo}, {hi})"
        )
    try:
        bracket = expand_bracket(excess, 1e-8 * width, width, tolerance=1e-12)
    except BracketError as exc:
        raise ElicitationError(str(exc)) from exc
    return bisect(excess, bracket)


def elicit_fieller(m1, m2, r1, r2, psi0, gamma=0.99) -> dict:
    """Prior hyperparameters from virtual-certainty intervals.

    mu lies in (m1, m2) and psi in (r1, r2) with probability gamma; mu0 is
    the centre of (m1, m2), nu0 = mu0 / psi0, and tau20 puts probability
    gamma on (m1 / r2, m2 / r1).
    """
    if not (m1 < m2 and r1 < r2 and r1 < psi0 < r2 and 0 < gamma < 1):
        raise DomainError("need m1 < m2, r1 < psi0 < r2 and 0 < gamma < 1")
    if r1 <= 0:
        raise DomainError("the ratio interval must be positive to bound nu")
    mu0 = 0.5 * (m1 + m2)
    tau10 = _solve_scale(m1, m2, mu0, gamma)
    nu0 = mu0 / psi0
    tau20 = _solve_scale(m1 / r2, m2 / r1, nu0, gamma)
    return {"mu0": mu0, "tau10": tau10, "nu0": nu0, "tau20": tau20}


# ---------------------------------------------------------------------------
# closed-form densities

def log_psi_density(psi, mu0, tau10, nu0, tau20):
    """Log density of mu/nu for independent N(mu0, tau10^2), N(nu0, tau20^2)."""
    psi = np.asarray(psi, dtype=float)
    t2, nu = _conditional_arrays(psi, mu0, tau10, nu0, tau20)
    c = nu / np.sqrt(t2)
    # phi(c) + c Phi(c) - c/2 is half of E|c + Z|
    half_abs = 0.5 * (normal_partial_moment(c) + normal_partial_moment(-c))
    out = (
        math.log(2.0)
        + np.log(t2)
        - 0.5 * math.log(2 * math.pi)
        - math.log(tau10 * tau20)
        - 0.5 * t2 * (mu0 - nu0 * psi) ** 2 / (tau10**2 * tau20**2)
        + np.log(half_abs)
    )
    return float(out) if out.ndim == 0 else out


def psi_density(psi, mu0, tau10, nu0, tau20):
    return np.exp(log_psi_density(psi, mu0, tau10, nu0, tau20))


@dataclass(frozen=True)
class Posterior:
    mu: float
    var_mu: float
    nu: float
    var_nu: float


def posterior_params(model: FiellerModel, xbar, ybar) -> Posterior:
    """Conjugate updates of (mu, nu) given the sample means."""
    var_mu = 1.0 / (model.m / model.sigma0_sq + 1.0 / model.tau10**2)
    var_nu = 1.0 / (model.n / model.sigma0_sq + 1.0 / model.tau20**2)
    mu = var_mu * (model.m * np.asarray(xbar) / model.sigma0_sq + model.mu0 / model.tau10**2)
    nu = var_nu * (model.n * np.asarray(ybar) / model.sigma0_sq + model.nu0 / model.tau20**2)
    return Posterior(mu, var_mu, nu, var_nu)


def prior_density(psi, model: FiellerModel):
    return psi_density(psi, model.mu0, model.tau10, model.nu0, model.tau20)


def posterior_density(psi, model: FiellerModel, xbar, ybar):
    post = posterior_params(model, xbar, ybar)
    return psi_density(psi, post.mu, math.sqrt(post.var_mu), post.nu, math.sqrt(post.var_nu))


def rb_exact(psi, model: FiellerModel, xbar, ybar):
    """Relative belief ratio of psi, vectorized over psi and the data."""
    log_prior = log_psi_density(psi, model.mu0, model.tau10, model.nu0, model.tau20)
    if not np.all(np.isfinite(log_prior)):
        raise FloatingPointError(f"prior density of psi underflows at {psi}")
    post = posterior_params(model, xbar, ybar)
    log_post = log_psi_density(
        psi, post.mu, math.sqrt(post.var_mu), post.nu, math.sqrt(post.var_nu)
    )
    return np.exp(log_post - log_prior)


# ---------------------------------------------------------------------------
# pivotal region

@dataclass(frozen=True)
class PivotalRegion:
    kind: str  # "interval", "exclusive", "whole_line" or "half_line"
    bounds: tuple = ()

    @property
    def is_absurd(self) -> bool:
        return self.kind == "whole_line"

    def __str__(self):
        if self.kind == "interval":
            return "({:.3f}, {:.3f})".format(*self.bounds)
        if self.kind == "exclusive":
            return "(-inf, {:.3f}) U ({:.3f}, inf)".format(*self.bounds)
        if self.kind == "half_line":
            return "({:.3f}, {:.3f})".format(*self.bounds)
        return "whole line (absurd)"


def pivotal_region(xbar, ybar, m, n, sigma0_sq, gamma=0.95) -> PivotalRegion:
    """Invert the Fieller pivotal (xbar - psi ybar) / (sigma0 sqrt(1/m + psi^2/n)).

    The region is {psi : a psi^2 + b psi + c <= 0}.
    """
    z2 = normal_quantile((1 + gamma) / 2) ** 2
    a = ybar**2 - z2 * sigma0_sq / n
    b = -2.0 * xbar * ybar
    c = xbar**2 - z2 * sigma0_sq / m
    if abs(a) <= 1e-12:
        if b == 0:
            return PivotalRegion("whole_line" if c <= 0 else "empty")
        root = -c / b
        return PivotalRegion("half_line", (root, math.inf) if b < 0 else (-math.inf, root))
    disc = b * b - 4 * a * c
    if a > 0:
        s = math.sqrt(disc)
        return PivotalRegion("interval", tuple(sorted(((-b - s) / (2 * a), (-b + s) / (2 * a)))))
    if disc <= 0:
        return PivotalRegion("whole_line")
    s = math.sqrt(disc)
    return PivotalRegion("exclusive", tuple(sorted(((-b - s) / (2 * a), (-b + s) / (2 * a)))))


# ---------------------------------------------------------------------------
# conditional prior sampler for nu given psi
#
# With z = (nu - nu0_psi) / tau20_psi the target is g(z) ~ |z - z0| phi(z), a
# two-part mixture split at z0. Below z0 the normalizer is
# z0 Phi(z0) + phi(z0) = E[(z0 - Z)^+]; above it, E[(Z - z0)^+].

def mixture_weight(z0):
    """Probability p(z0) that a draw from g falls at or below z0."""
    lower = normal_partial_moment(-np.asarray(z0, dtype=float))
    upper = normal_partial_moment(np.asarray(z0, dtype=float))
    return lower / (lower + upper)


def mixture_log_odds(z0):
    z0 = np.asarray(z0, dtype=float)
    return log_normal_partial_moment(-z0) - log_normal_partial_moment(z0)


def lower_branch_cdf(z, z0):
    """G1, the cdf of the part of g below z0 (equal to 1 above z0)."""
    z, z0 = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(z0, dtype=float))
    zc = np.minimum(z, z0)
    # z0 Phi(z) + phi(z), split into two non-negative pieces
    num = normal_partial_moment(-zc) + (z0 - zc) * normal_cdf(zc)
    return np.minimum(num / normal_partial_moment(-z0), 1.0)


def upper_branch_cdf(z, z0):
    """G0, the cdf of the part of g above z0 (equal to 0 below z0)."""
    z, z0 = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(z0, dtype=float))
    zc = np.maximum(z, z0)
    tail = normal_partial_moment(zc) + (zc - z0) * normal_sf(zc)
    return np.maximum(1.0 - tail / normal_partial_moment(z0), 0.0)


def _invert(cdf, u, z0, lower: bool, eps: float, max_expand: int, tol: float = 1e-10):
    """Invert one branch cdf by bracket expansion then bisection."""
    step = np.maximum(np.abs(z0 - eps) if lower else np.abs(z0 + eps), eps)
    fixed = z0.copy()
    moving = np.zeros_like(z0)
    todo = np.ones(u.shape, dtype=bool)
    for i in range(max_expand + 1):
        cand = (-i if lower else i) * step[todo]
        g = cdf(cand, z0[todo])
        ok = g <= u[todo] if lower else g >= u[todo]
        idx = np.flatnonzero(todo)
        moving[idx[ok]] = cand[ok]
        todo[idx[ok]] = False
        if not todo.any():
            break
    else:
        raise SamplerError(f"bracket expansion exceeded {max_expand} steps")
    lo, hi = (moving, fixed) if lower else (fixed, moving)
    width = float(np.max(hi - lo)) if lo.size else 0.0
    iters = int(math.ceil(math.log2(max(width, tol) / tol))) + 1
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = cdf(mid, z0) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sample_standardized(z0, src: RandomSource, size=None, eps: float = 0.1, max_expand: int = 10_000):
    """Draws z from g(z) proportional to |z - z0| phi(z)."""
    z0 = np.broadcast_to(np.asarray(z0, dtype=float), size if size is not None else np.shape(z0)).astype(float)
    shape = z0.shape
    z0 = z0.ravel()
    pick = src.rng.uniform(size=z0.shape)
    u = src.rng.uniform(size=z0.shape)
    low = pick < mixture_weight(z0)
    z = np.empty_like(z0)
    if low.any():
        z[low] = _invert(lower_branch_cdf, u[low], z0[low], True, eps, max_expand)
    if (~low).any():
        z[~low] = _invert(upper_branch_cdf, u[~low], z0[~low], False, eps, max_expand)
    return z.reshape(shape)


def sample_nu_given_psi(model: FiellerModel, psi, src: RandomSource, size=None, **kw):
    """Draws from the conditional prior of nu given psi."""
    t2, nu0 = _conditional_arrays(psi, model.mu0, model.tau10, model.nu0, model.tau20)
    if size is not None:
        t2, nu0 = np.broadcast_to(t2, size), np.broadcast_to(nu0, size)
    sd = np.sqrt(t2)
    return nu0 + sd * sample_standardized(-nu0 / sd, src, size, **kw)


def sample_conditional_predictive(model: FiellerModel, psi, src: RandomSource, size=None):
    """(xbar, ybar) from the conditional prior predictive given psi."""
    nu = sample_nu_given_psi(model, psi, src, size)
    ybar = src.rng.normal(nu, math.sqrt(model.sigma0_sq / model.n))
    xbar = src.rng.normal(np.asarray(psi) * nu, math.sqrt(model.sigma0_sq / model.m))
    return xbar, ybar


def sample_prior(model: FiellerModel, src: RandomSource, size):
    mu = src.rng.normal(model.mu0, model.tau10, size)
    nu = src.rng.normal(model.nu0, model.tau20, size)
    return mu, nu


# ---------------------------------------------------------------------------
# biases

def _count_rb(model, psi0, psi_gen, against: bool, count, src):
    xbar, ybar = sample_conditional_predictive(model, psi_gen, src, count)
    rb = rb_exact(psi0, model, xbar, ybar)
    return int(np.sum(rb <= 1) if against else np.sum(rb >= 1))


def bias_against(model: FiellerModel, psi0: float, N: int, src: RandomSource, workers: int = 1) -> MCEstimate:
    """M(RB(psi0 | data) <= 1 | psi0) with data from the conditional predictive."""
    hits = fan_out(_count_rb, N, src, workers, (model, psi0, psi0, True))
    return MCEstimate.from_counts(sum(hits), N)


def bias_in_favor(
    model: FiellerModel,
    psi0: float,
    delta: float,
    N: int,
    src: RandomSource,
    separation: Optional[float] = None,
    workers: int = 1,
) -> MCEstimate:
    """Larger of M(RB(psi0 | data) >= 1 | psi0 -+ separation); separation defaults to delta/2."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    sep = 0.5 * delta if separation is None else separation
    best = None
    for j, alt in enumerate((psi0 - sep, psi0 + sep)):
        hits = fan_out(_count_rb, N, src.spawn(j), workers, (model, psi0, alt, False))
        est = MCEstimate.from_counts(sum(hits), N)
        if best is None or est.value > best.value:
            best = est
    return best


def _prior_against(model, count, src):
    # (mu, nu) from the prior then data: the joint law of (psi, data)
    mu, nu = sample_prior(model, src, count)
    xbar = src.rng.normal(mu, math.sqrt(model.sigma0_sq / model.m))
    ybar = src.rng.normal(nu, math.sqrt(model.sigma0_sq / model.n))
    return int(np.sum(rb_exact(mu / nu, model, xbar, ybar) <= 1))


def prior_bias_against(model: FiellerModel, N: int, src: RandomSource, workers: int = 1) -> MCEstimate:
    """Bias against averaged over psi from its prior (one minus Bayesian coverage)."""
    hits = fan_out(_prior_against, N, src, workers, (model,))
    return MCEstimate.from_counts(sum(hits), N)


def _in_favor_batch(model, psis, sep, inner, src):
    """Max over psi -+ sep of the proportion with RB(psi | data) >= 1, per psi."""
    best = np.zeros(len(psis))
    for j, s in enumerate((-sep, sep)):
        gen = np.repeat(psis + s, inner)
        xbar, ybar = sample_conditional_predictive(model, gen, src.spawn(j), gen.shape)
        rb = rb_exact(np.repeat(psis, inner), model, xbar, ybar)
        best = np.maximum(best, (rb >= 1).reshape(len(psis), inner).mean(axis=1))
    return best


def _prior_in_favor(model, sep, inner, count, src):
    mu, nu = sample_prior(model, src.spawn(0), count)
    psis = mu / nu
    out = []
    for k, start in enumerate(range(0, count, 50)):
        out.append(_in_favor_batch(model, psis[start:start + 50], sep, inner, src.spawn(k + 1)))
    return np.concatenate(out)


def prior_bias_in_favor(
    model: FiellerModel,
    delta: float,
    n_psi: int,
    inner: int,
    src: RandomSource,
    separation: Optional[float] = None,
    workers: int = 1,
) -> MCEstimate:
    """Bias in favor averaged over ``n_psi`` prior draws of psi, ``inner`` datasets each."""
    sep = 0.5 * delta if separation is None else separation
    values = np.concatenate(fan_out(_prior_in_favor, n_psi, src, workers, (model, sep, inner)))
    return MCEstimate.mean(values)


def bias_against_curve(model: FiellerModel, psi_grid, N: int, src: RandomSource) -> tuple[np.ndarray, np.ndarray]:
    psi_grid = np.asarray(psi_grid, dtype=float)
    vals = np.array([bias_against(model, p, N, src.spawn(i)).value for i, p in enumerate(psi_grid)])
    return vals, np.sqrt(vals * (1 - vals) / N)


def bias_in_favor_curve(model: FiellerModel, psi_grid, delta: float, N: int, src: RandomSource, separation=None):
    psi_grid = np.asarray(psi_grid, dtype=float)
    return np.array([
        bias_in_favor(model, p, delta, N, src.spawn(i), separation).value for i, p in enumerate(psi_grid)
    ])


@dataclass
class BiasReport:
    psi_grid: np.ndarray
    bias_against: np.ndarray
    bias_against_se: np.ndarray
    max_bias_against: float
    argmax_psi: float
    prior_bias_against: MCEstimate
    bias_in_favor: Optional[np.ndarray] = None
    prior_bias_in_favor: Optional[MCEstimate] = None

    @property
    def confidence_lower_bound(self) -> float:
        """Coverage of the plausible region is at least this for every psi."""
        return 1.0 - self.max_bias_against

    @property
    def bayes_coverage(self) -> float:
        return 1.0 - self.prior_bias_against.value


def bias_report(
    model: FiellerModel,
    psi_grid,
    delta: float,
    N: int,
    src: RandomSource,
    n_psi: int = 1000,
    inner: int = 10_000,
    with_favor: bool = True,
    workers: int = 1,
) -> BiasReport:
    """Bias-against curve with its maximum, plus prior-averaged biases."""
    psi_grid = np.asarray(psi_grid, dtype=float)
    curve, se = bias_against_curve(model, psi_grid, N, src.spawn(0))
    i = int(np.argmax(curve))
    report = BiasReport(
        psi_grid,
        curve,
        se,
        float(curve[i]),
        float(psi_grid[i]),
        prior_bias_against(model, N, src.spawn(1), workers),
    )
    if with_favor:
        report.bias_in_favor = bias_in_favor_curve(model, psi_grid, delta, N, src.spawn(2))
        report.prior_bias_in_favor = prior_bias_in_favor(model, delta, n_psi, inner, src.spawn(3), workers=workers)
    return report


# ---------------------------------------------------------------------------
# discretized inference

@dataclass
class Inference:
    beliefs: engine.DiscreteBeliefs
    estimate: float
    plausible: engine.Region
    implausible: engine.Region


def infer(
    model: FiellerModel,
    xbar: float,
    ybar: float,
    delta: float,
    N: int,
    src: RandomSource,
    tail_prob: float = 0.001,
    origin: Optional[float] = None,
) -> Inference:
    """Histogram-based relative belief inference for psi at resolution delta.

    The grid spans the central part of N prior draws of psi; prior and
    posterior bin masses come from N draws each. By default bin midpoints
    fall on multiples of delta.
    """
    origin = 0.5 * delta if origin is None else origin
    mu, nu = sample_prior(model, src.spawn(0), N)
    prior_psi = mu / nu
    post = posterior_params(model, xbar, ybar)
    rng = src.spawn(1).rng
    post_psi = rng.normal(post.mu, math.sqrt(post.var_mu), N) / rng.normal(post.nu, math.sqrt(post.var_nu), N)
    grid = engine.build_grid(prior_psi, delta, tail_prob, origin)
    beliefs = engine.DiscreteBeliefs.from_samples(grid, prior_psi, post_psi)
    return Inference(
        beliefs,
        engine.rb_estimate(beliefs),
        engine.plausible_region(beliefs),
        engine.implausible_region(beliefs),
    )


def exact_beliefs(model: FiellerModel, grid: engine.Grid, xbar, ybar, points: int = 9) -> engine.DiscreteBeliefs:
    """Bin masses from the closed-form densities (Simpson rule within each bin)."""
    e = grid.edges
    t = np.linspace(0.0, 1.0, points)
    x = e[:-1, None] + (e[1:] - e[:-1])[:, None] * t[None, :]
    w = np.ones(points)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w = w[None, :] * (e[1:] - e[:-1])[:, None] / (3.0 * (points - 1))
    prior = np.sum(prior_density(x, model) * w, axis=1)
    postd = np.sum(posterior_density(x, model, xbar, ybar) * w, axis=1)
    return engine.DiscreteBeliefs.from_weights(grid, prior, postd)


# ---------------------------------------------------------------------------
# worked settings

EXAMPLE1_DATA = {"xbar": 20.188, "ybar": 10.699}


def example1_model(m: int = 10, n: int = 10) -> FiellerModel:
    hyper = elicit_fieller(10.0, 25.0, 1.0, 3.0, 2.0, 0.99)
    return FiellerModel(**hyper, sigma0_sq=1.0, m=m, n=n)


def cox_problem(variant: str, prior_var: float = 3.0):
    """Cox's problems A and B: sigma0^2 / n = 1 with m = n, vague normal priors."""
    variant = variant.upper()
    sd = math.sqrt(prior_var)
    if variant == "A":
        model = FiellerModel(12.0, sd, 0.0, sd, sigma0_sq=1.0, m=1, n=1)
        return model, 10.0, 0.5
    if variant == "B":
        model = FiellerModel(0.0, sd, 0.0, sd, sigma0_sq=1.0, m=1, n=1)
        return model, 0.5, 0.5
    raise ValueError(f"unknown Cox variant {variant!r}")
