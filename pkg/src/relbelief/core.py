"""Special functions, bisection and seeded random streams.

Every scalar routine here also accepts numpy arrays, since the Monte Carlo
loops elsewhere evaluate them on whole batches of draws at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    """An argument lies outside the domain of a distribution or function."""


class BracketError(ValueError):
    """A root bracket does not straddle a sign change."""


def _check(cond, message: str) -> None:
    if not np.all(cond):
        raise DomainError(message)


def _out(x):
    # hand back Python floats for scalar input
    return float(x) if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# normal distribution

def normal_pdf(z):
    z = np.asarray(z, dtype=float)
    return _out(np.exp(-0.5 * z * z) / SQRT_2PI)


def normal_logpdf(z):
    z = np.asarray(z, dtype=float)
    return _out(-0.5 * z * z - LOG_SQRT_2PI)


def normal_cdf(z):
    """Standard normal cdf; accurate in relative terms deep into the lower tail."""
    return _out(special.ndtr(np.asarray(z, dtype=float)))


def normal_sf(z):
    """Upper tail 1 - Phi(z), computed without cancellation."""
    return _out(special.ndtr(-np.asarray(z, dtype=float)))


def normal_quantile(p):
    p = np.asarray(p, dtype=float)
    _check((p > 0.0) & (p < 1.0), "normal_quantile needs 0 < p < 1")
    return _out(special.ndtri(p))


def mills_ratio(z):
    """(1 - Phi(z)) / phi(z), stable for large positive z."""
    z = np.asarray(z, dtype=float)
    return _out(math.sqrt(math.pi / 2.0) * special.erfcx(z / math.sqrt(2.0)))


def normal_partial_moment(a):
    """E[(Z - a)^+] = phi(a) - a (1 - Phi(a)) for standard normal Z.

    Always positive. For large positive ``a`` the two terms nearly cancel, so
    that branch factors out phi(a) and uses the scaled Mills ratio.
    """
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    pos = a > 0
    ap = a[pos]
    out[pos] = normal_pdf(ap) * (1.0 - ap * mills_ratio(ap))
    an = a[~pos]
    out[~pos] = normal_pdf(an) - an * special.ndtr(-an)
    return _out(out)


def log_normal_partial_moment(a):
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    pos = a > 0
    ap = a[pos]
    out[pos] = normal_logpdf(ap) + np.log1p(-ap * mills_ratio(ap))
    an = a[~pos]
    out[~pos] = np.log(normal_pdf(an) - an * special.ndtr(-an))
    return _out(out)


# ---------------------------------------------------------------------------
# beta and gamma

def beta_cdf(x, a, b):
    """Regularized incomplete beta I_x(a, b)."""
    x = np.asarray(x, dtype=float)
    _check((x >= 0.0) & (x <= 1.0), "beta_cdf needs 0 <= x <= 1")
    _check((np.asarray(a) > 0) & (np.asarray(b) > 0), "beta_cdf needs a, b > 0")
    return _out(special.betainc(a, b, x))


def beta_pdf(x, a, b):
    x = np.asarray(x, dtype=float)
    _check((np.asarray(a) > 0) & (np.asarray(b) > 0), "beta_pdf needs a, b > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = (
            special.xlogy(a - 1.0, x)
            + special.xlog1py(b - 1.0, -x)
            - special.betaln(a, b)
        )
    out = np.where((x >= 0.0) & (x <= 1.0), np.exp(logd), 0.0)
    return _out(out)


def gamma_cdf(x, shape, rate):
    """Regularized lower incomplete gamma P(shape, rate * x)."""
    x = np.asarray(x, dtype=float)
    _check(x >= 0.0, "gamma_cdf needs x >= 0")
    _check((np.asarray(shape) > 0) & (np.asarray(rate) > 0), "gamma_cdf needs shape, rate > 0")
    return _out(special.gammainc(shape, rate * x))


def gamma_pdf(x, shape, rate):
    x = np.asarray(x, dtype=float)
    _check((np.asarray(shape) > 0) & (np.asarray(rate) > 0), "gamma_pdf needs shape, rate > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = (
            shape * np.log(rate)
            + special.xlogy(shape - 1.0, x)
            - rate * x
            - special.gammaln(shape)
        )
    return _out(np.where(x >= 0.0, np.exp(logd), 0.0))


# ---------------------------------------------------------------------------
# root finding

@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tolerance: float = 1e-9

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tolerance > 0:
            raise BracketError("tolerance must be positive")


def bisect(f: Callable[[float], float], bracket: RootBracket, max_iter: int = 500) -> float:
    """Root of ``f`` on ``bracket`` by bisection.

    Stops when the bracket is narrower than the tolerance or ``|f|`` falls
    below it.
    """
    lo, hi, tol = bracket.lo, bracket.hi, bracket.tolerance
    flo, fhi = f(lo), f(hi)
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"f has the same sign at {lo} and {hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= tol or hi - lo <= tol:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tolerance: float = 1e-9,
    factor: float = 2.0,
    max_expand: int = 200,
) -> RootBracket:
    """Grow ``hi`` geometrically until ``f`` changes sign on [lo, hi]."""
    flo = f(lo)
    for _ in range(max_expand):
        if np.sign(f(hi)) != np.sign(flo):
            return RootBracket(lo, hi, tolerance)
        lo, hi = hi, hi * factor
        flo = f(lo)
    raise BracketError(f"no sign change found up to {hi}")


# ---------------------------------------------------------------------------
# random streams

class RandomSource:
    """A reproducible random stream identified by ``(seed, stream)``.

    Streams come from numpy's Philox counter-based generator keyed through a
    ``SeedSequence`` spawn key, so distinct stream indices are independent and
    any stream can be recreated without touching the others. ``spawn`` derives
    child streams for worker fan-out.
    """

    def __init__(self, seed: int, stream: int = 0, _path: tuple[int, ...] = ()):
        if seed < 0 or seed >= 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if stream < 0:
            raise DomainError("stream index must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        self._path = tuple(_path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *self._path))
        self.rng = np.random.Generator(np.random.Philox(ss))

    def spawn(self, index: int) -> "RandomSource":
        return RandomSource(self.seed, self.stream, (*self._path, int(index)))

    def __repr__(self):
        path = "".join(f"/{i}" for i in self._path)
        return f"RandomSource(seed={self.seed}, stream={self.stream}{path})"


def draw_uniform(src: RandomSource, size=None, low: float = 0.0, high: float = 1.0):
    if not low < high:
        raise DomainError("uniform needs low < high")
    return src.rng.uniform(low, high, size)


def draw_normal(src: RandomSource, size=None, mean=0.0, sd=1.0):
    _check(np.asarray(sd) >= 0, "normal needs sd >= 0")
    return src.rng.normal(mean, sd, size)


def draw_beta(src: RandomSource, a: float, b: float, size=None):
    if not (a > 0 and b > 0):
        raise DomainError("beta needs a, b > 0")
    return src.rng.beta(a, b, size)


def draw_gamma(src: RandomSource, shape: float, rate: float, size=None):
    if not (shape > 0 and rate > 0):
        raise DomainError("gamma needs shape, rate > 0")
    return src.rng.gamma(shape, 1.0 / rate, size)


def draw_poisson(src: RandomSource, lam, size=None):
    _check(np.asarray(lam) >= 0, "poisson needs lambda >= 0")
    return src.rng.poisson(lam, size)


def draw_truncated_normal(src: RandomSource, mean: float, sd: float, lo: float, hi: float, size=None):
    """Normal(mean, sd^2) restricted to (lo, hi), by inverting the cdf."""
    if not (sd > 0 and lo < hi):
        raise DomainError("truncated normal needs sd > 0 and lo < hi")
    a, b = (lo - mean) / sd, (hi - mean) / sd
    u = src.rng.uniform(size=size)
    # work in whichever tail keeps the cdf values away from 1
    if a > 0:
        sa, sb = special.ndtr(-a), special.ndtr(-b)
        z = -special.ndtri(sa - u * (sa - sb))
    else:
        ca, cb = special.ndtr(a), special.ndtr(b)
        z = special.ndtri(ca + u * (cb - ca))
    return np.clip(mean + sd * z, lo, hi)
