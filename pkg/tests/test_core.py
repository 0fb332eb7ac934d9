import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from relbelief import core
from relbelief.core import (
    BracketError,
    DomainError,
    RandomSource,
    RootBracket,
    beta_cdf,
    bisect,
    gamma_cdf,
    mills_ratio,
    normal_cdf,
    normal_partial_moment,
    normal_pdf,
    normal_quantile,
)

mpmath.mp.dps = 40


@pytest.mark.parametrize("z, expected", [(0.0, 0.3989422804), (1.0, 0.2419707245), (-1.0, 0.2419707245)])
def test_normal_pdf_values(z, expected):
    assert normal_pdf(z) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("z", [-37.0, -20.0, -8.0, -3.0, -0.5, 0.0, 0.7, 2.5758293, 6.0])
def test_normal_cdf_against_mpmath(z):
    exact = float(mpmath.ncdf(z))
    assert normal_cdf(z) == pytest.approx(exact, rel=1e-12, abs=1e-15)


def test_normal_cdf_spec_points():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(2.5758293) == pytest.approx(0.995, abs=1e-9)
    assert normal_cdf(-8.0) < 1e-14
    assert normal_cdf(-8.0) < normal_pdf(8.0) / 8.0


def test_normal_cdf_symmetry_and_monotone():
    z = np.linspace(-10, 10, 2001)
    c = normal_cdf(z)
    assert np.all(np.diff(c) >= 0)
    assert np.max(np.abs(normal_cdf(-z) + c - 1.0)) < 1e-12


@pytest.mark.parametrize("p, expected", [(0.5, 0.0), (0.975, 1.959964), (0.995, 2.575829)])
def test_normal_quantile_values(p, expected):
    assert normal_quantile(p) == pytest.approx(expected, abs=1e-6)


def test_quantile_inverts_cdf():
    p = np.concatenate([np.geomspace(1e-6, 0.5, 200), 1 - np.geomspace(1e-6, 0.5, 200)])
    assert np.max(np.abs(normal_cdf(normal_quantile(p)) - p)) < 1e-8


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_normal_quantile_domain(p):
    with pytest.raises(DomainError):
        normal_quantile(p)


@pytest.mark.parametrize("z", [0.1, 1.0, 5.0, 12.0, 40.0])
def test_mills_ratio_against_mpmath(z):
    exact = float(mpmath.erfc(z / mpmath.sqrt(2)) / 2 / mpmath.npdf(z))
    assert mills_ratio(z) == pytest.approx(exact, rel=1e-12)


def test_mills_ratio_inequality_grid():
    z = np.linspace(0.1, 10.0, 1000)
    r = core.normal_sf(z) / normal_pdf(z)
    assert np.all(r < 1.0 / z)
    assert np.all(mills_ratio(z) < 1.0 / z)


@pytest.mark.parametrize("a", [-30.0, -2.0, 0.0, 1.5, 8.0, 30.0])
def test_partial_moment_against_quadrature(a):
    exact = mpmath.quad(lambda t: (t - a) * mpmath.npdf(t), [a, mpmath.inf])
    assert normal_partial_moment(a) == pytest.approx(float(exact), rel=1e-10)


def test_partial_moment_positive_on_grid():
    # beyond a ~ 37 the value is below the smallest double; the log stays finite
    a = np.linspace(-35, 35, 1401)
    assert np.all(normal_partial_moment(a) > 0)
    wide = np.linspace(-50, 50, 2001)
    assert np.all(np.isfinite(core.log_normal_partial_moment(wide)))


def test_log_partial_moment_matches_mpmath_far_tail():
    a = mpmath.mpf(45)
    exact = mpmath.log(mpmath.npdf(a) - a * mpmath.erfc(a / mpmath.sqrt(2)) / 2)
    assert core.log_normal_partial_moment(45.0) == pytest.approx(float(exact), rel=1e-10)


@pytest.mark.parametrize("x, a, b", [(0.5, 1, 1), (0.5, 2.2, 2.2), (0.95, 2.2, 2.2), (0.05, 2.2, 3.1), (0.3, 0.5, 7.0)])
def test_beta_cdf(x, a, b):
    exact = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert beta_cdf(x, a, b) == pytest.approx(exact, abs=1e-12)


def test_beta_cdf_quadrature():
    quad, _ = integrate.quad(lambda t: core.beta_pdf(t, 2.2, 2.2), 0, 0.95)
    assert beta_cdf(0.95, 2.2, 2.2) == pytest.approx(quad, abs=1e-10)


@pytest.mark.parametrize("x", [0.0, 3.0, 6.5, 10.0, 1e4])
def test_gamma_cdf(x):
    exact = float(mpmath.gammainc(37.20, 0, 5.57 * x, regularized=True))
    assert gamma_cdf(x, 37.20, 5.57) == pytest.approx(exact, abs=1e-12)


def test_gamma_cdf_quadrature():
    quad, _ = integrate.quad(lambda t: core.gamma_pdf(t, 37.2, 5.57), 0, 6.5)
    assert gamma_cdf(6.5, 37.2, 5.57) == pytest.approx(quad, abs=1e-10)


@pytest.mark.parametrize(
    "fn, args",
    [(beta_cdf, (1.2, 1, 1)), (beta_cdf, (0.5, 0, 1)), (gamma_cdf, (-1.0, 2, 1)), (gamma_cdf, (1.0, 2, 0))],
)
def test_cdf_domain_errors(fn, args):
    with pytest.raises(DomainError):
        fn(*args)


def test_bisect_linear():
    assert bisect(lambda x: x - 3, RootBracket(0, 10, 1e-9)) == pytest.approx(3, abs=1e-9)


def test_bisect_elicitation_equation():
    tau = bisect(lambda t: normal_cdf(7.5 / t) - normal_cdf(-7.5 / t) - 0.99, RootBracket(0.1, 100, 1e-12))
    assert tau == pytest.approx(2.912, abs=5e-4)


def test_bisect_bad_brackets():
    with pytest.raises(BracketError):
        bisect(lambda x: x * x + 1, RootBracket(-1, 1))
    with pytest.raises(BracketError):
        RootBracket(1, 1)
    with pytest.raises(BracketError):
        core.expand_bracket(lambda x: 1.0, 0.0, 1.0, max_expand=5)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 10))
def test_bisect_finds_linear_roots(root, slope):
    x = bisect(lambda t: slope * (t - root), RootBracket(-100, 100, 1e-10))
    assert abs(x - root) < 1e-8


def test_random_source_reproducible():
    a = RandomSource(7, 3).rng.normal(size=5)
    b = RandomSource(7, 3).rng.normal(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RandomSource(7, 4).rng.normal(size=5))
    assert np.array_equal(RandomSource(7).spawn(2).rng.random(3), RandomSource(7).spawn(2).rng.random(3))


def test_random_streams_uncorrelated():
    x = RandomSource(1, 0).rng.normal(size=100_000)
    y = RandomSource(1, 1).rng.normal(size=100_000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.02


@pytest.mark.parametrize("seed, stream", [(-1, 0), (2**64, 0), (0, -1)])
def test_random_source_validation(seed, stream):
    with pytest.raises(DomainError):
        RandomSource(seed, stream)


def _ks(draws, cdf):
    return stats.kstest(draws, cdf).statistic


def test_sampler_moments(src):
    assert abs(core.draw_normal(src.spawn(0), 100_000).mean()) < 0.02
    assert abs(core.draw_poisson(src.spawn(1), 6.2, 100_000).mean() - 6.2) < 0.04
    assert abs(core.draw_beta(src.spawn(2), 2.2, 2.2, 100_000).mean() - 0.5) < 0.01


@pytest.mark.parametrize(
    "draw, cdf",
    [
        (lambda s: core.draw_uniform(s, 100_000, 2, 5), stats.uniform(2, 3).cdf),
        (lambda s: core.draw_normal(s, 100_000, 1.0, 2.0), stats.norm(1, 2).cdf),
        (lambda s: core.draw_beta(s, 2.2, 2.2, 100_000), stats.beta(2.2, 2.2).cdf),
        (lambda s: core.draw_gamma(s, 37.2, 5.57, 100_000), stats.gamma(37.2, scale=1 / 5.57).cdf),
        (lambda s: core.draw_truncated_normal(s, 5, 1.92, 0, 10, 100_000), stats.truncnorm(-5 / 1.92, 5 / 1.92, 5, 1.92).cdf),
        (lambda s: core.draw_truncated_normal(s, 0, 1, 8, 9, 100_000), stats.truncnorm(8, 9).cdf),
    ],
)
def test_sampler_kolmogorov_distance(src, draw, cdf):
    assert _ks(draw(src), cdf) < 0.01


def test_poisson_sampler_distribution(src):
    x = core.draw_poisson(src, 6.2, 100_000)
    k = np.arange(30)
    emp = np.searchsorted(np.sort(x), k, side="right") / x.size
    assert np.max(np.abs(emp - stats.poisson.cdf(k, 6.2))) < 0.01


def test_truncated_normal_far_tail_stays_inside(src):
    x = core.draw_truncated_normal(src, 0.0, 1.0, 30.0, 31.0, 1000)
    assert np.all((x >= 30) & (x <= 31))


@pytest.mark.parametrize("bad", [lambda s: core.draw_beta(s, 0, 1), lambda s: core.draw_gamma(s, 1, -1),
                                 lambda s: core.draw_truncated_normal(s, 0, 1, 2, 1), lambda s: core.draw_uniform(s, 1, 1, 1)])
def test_sampler_domain_errors(src, bad):
    with pytest.raises(DomainError):
        bad(src)


def test_scalar_inputs_give_floats():
    for v in (normal_pdf(0.3), normal_cdf(0.3), mills_ratio(1.0), normal_partial_moment(0.2), beta_cdf(0.2, 2, 2)):
        assert isinstance(v, float)
    assert math.isfinite(normal_quantile(1e-300))
