import numpy as np
import pytest
from scipy import integrate, stats

from relbelief import constrained_poisson as cp
from relbelief.core import DomainError, RandomSource

from .oracles import poisson_bias_against

SPEC = cp.ConstrainedPoissonSpec()


@pytest.fixture(scope="module")
def prior():
    return cp.gamma_prior(SPEC)


def test_elicit_golden(prior):
    assert (prior.alpha, prior.beta) == pytest.approx((37.20, 5.57), abs=0.05)


def test_elicit_content_and_mode(prior):
    g = stats.gamma(prior.alpha, scale=1 / prior.beta)
    assert g.cdf(9.5) - g.cdf(3.5) == pytest.approx(0.99, abs=1e-6)
    assert prior.mode == pytest.approx(6.5, abs=1e-9)


@pytest.mark.parametrize("gamma", [0.9, 0.95, 0.999])
def test_elicit_round_trip(gamma):
    spec = cp.ConstrainedPoissonSpec(gamma=gamma, m0=5.0)
    p = cp.gamma_prior(spec)
    g = stats.gamma(p.alpha, scale=1 / p.beta)
    assert g.cdf(spec.u1) - g.cdf(spec.l1) == pytest.approx(gamma, abs=1e-6)
    assert p.mode == pytest.approx(5.0, abs=1e-9)


def test_elicit_concentration_grows_with_gamma():
    betas = [cp.elicit_gamma(cp.ConstrainedPoissonSpec(gamma=g))[1] for g in (0.9, 0.99, 0.9999)]
    assert betas[0] < betas[1] < betas[2]
    with pytest.raises(cp.ElicitationError):
        cp.elicit_gamma(cp.ConstrainedPoissonSpec(gamma=1 - 1e-15))


@pytest.mark.parametrize("kw", [dict(l0=0), dict(l1=2), dict(m0=9.9), dict(gamma=0), dict(n=0), dict(delta=-1)])
def test_spec_validation(kw):
    with pytest.raises(DomainError):
        cp.ConstrainedPoissonSpec(**kw)


def test_truncated_prior_normalized(prior):
    assert integrate.quad(prior.pdf, 3, 10)[0] == pytest.approx(1.0, abs=1e-10)
    assert prior.mass(SPEC.grid().edges).sum() == pytest.approx(1.0, abs=1e-12)


def test_prior_sampler_within_support(prior, src):
    x = prior.sample(src, 100_000)
    assert x.min() >= 3 and x.max() <= 10
    grid = np.linspace(3.5, 9.5, 13)
    emp = np.searchsorted(np.sort(x), grid) / x.size
    assert np.max(np.abs(emp - prior.cdf(grid))) < 0.01


def test_neighbourhood_rb_against_scipy(prior):
    t = np.array([0, 3, 6, 12, 40])
    lo, hi = 5.95, 6.45
    got = prior.neighbourhood_rb(1, t, lo, hi)

    def trunc(a, b):
        g = stats.gamma(a, scale=1 / b)
        return (g.cdf(hi) - g.cdf(lo)) / (g.cdf(10) - g.cdf(3))

    want = trunc(prior.alpha + t, prior.beta + 1) / trunc(prior.alpha, prior.beta)
    np.testing.assert_allclose(got, want, rtol=1e-8)


def test_neighbourhood_outside_support(prior):
    with pytest.raises(DomainError):
        prior.neighbourhood_rb(1, [3], 11, 12)


@pytest.mark.parametrize("n, delta", [(1, 0.5), (10, 0.5), (20, 1.0), (100, 0.5)])
def test_bias_against_paths_agree(prior, n, delta):
    sp = SPEC.with_n(n)
    oracle = poisson_bias_against(prior.alpha, prior.beta, 3, 10, n, 6.2, delta)
    exact = cp.poisson_bias_against(sp, prior, 6.2, delta, exact=True)
    mc = cp.poisson_bias_against(sp, prior, 6.2, delta, 100_000, RandomSource(n))
    assert exact.value == pytest.approx(oracle, abs=1e-10)
    assert mc.value == pytest.approx(oracle, abs=max(4 * mc.se, 1e-3))


def test_sum_of_counts_matches_total(src):
    a = cp.draw_totals(src.spawn(0), 6.2, 10, 100_000, via_counts=True)
    b = cp.draw_totals(src.spawn(1), 6.2, 10, 100_000)
    k = np.arange(20, 110)
    ca = np.searchsorted(np.sort(a), k, side="right") / a.size
    cb = np.searchsorted(np.sort(b), k, side="right") / b.size
    assert np.max(np.abs(ca - cb)) < 0.01
    assert np.max(np.abs(ca - stats.poisson.cdf(k, 62))) < 0.01


@pytest.mark.parametrize("delta", [0.5, 1.0])
def test_table_five_nonincreasing_in_n(prior, delta):
    ests = [cp.poisson_bias_against(SPEC.with_n(n), prior, 6.2, delta, 100_000, RandomSource(n)) for n in (1, 10, 20, 50, 100, 500)]
    for a, b in zip(ests, ests[1:]):
        assert b.value <= a.value + 2 * np.hypot(a.se, b.se)


def test_bias_against_vanishes(prior):
    assert cp.poisson_bias_against(SPEC.with_n(5000), prior, 6.2, 0.5, exact=True).value < 1e-3


def test_confidence_rows(prior):
    rows = cp.poisson_confidence_table(SPEC, prior, [1, 100], 1.0, RandomSource(2), exact=True)
    assert rows[1].frequentist == pytest.approx(0.986, abs=0.01)
    assert rows[1].bayes == pytest.approx(0.991, abs=0.01)
    for r in rows:
        assert r.bayes >= r.frequentist
    (row,) = cp.poisson_confidence_table(SPEC, prior, [1], 0.5, RandomSource(2), N=100_000)
    assert row.frequentist == pytest.approx(0.581, abs=0.02)
    assert row.bayes == pytest.approx(0.667, abs=0.02)


def test_bias_in_favor_paths_agree(prior):
    sp = SPEC.with_n(10)
    exact = cp.poisson_bias_in_favor(sp, prior, 6.2, 1.0, exact=True)
    mc = cp.poisson_bias_in_favor(sp, prior, 6.2, 1.0, 100_000, RandomSource(4))
    assert mc.value == pytest.approx(exact.value, abs=4 * mc.se)


def test_estimation_bias_in_favor_large_n(prior):
    est = cp.poisson_estimation_bias_in_favor(SPEC.with_n(500), prior, 1.0, exact=True)
    assert est.value == pytest.approx(0.002, abs=0.01)


def test_bias_in_favor_without_alternatives(prior):
    with pytest.warns(UserWarning):
        est = cp.poisson_bias_in_favor(SPEC, prior, 6.2, 8.0, exact=True)
    assert est.value == 0.0


def test_curves(prior):
    lams = np.array([4.0, 6.2, 9.0])
    ba = cp.bias_against_curve(SPEC, prior, lams, exact=True)
    bf = cp.bias_in_favor_curve(SPEC, prior, lams, exact=True)
    assert ba.shape == bf.shape == (3,)
    assert np.all((ba >= 0) & (ba <= 1) & (bf >= 0) & (bf <= 1))


def test_infer_posterior_is_updated_gamma(prior):
    sp = SPEC.with_n(10)
    res = cp.infer(sp, prior, 62)
    post = stats.gamma(prior.alpha + 62, scale=1 / (prior.beta + 10))
    edges = sp.grid().edges
    want = np.diff(post.cdf(edges)) / (post.cdf(10) - post.cdf(3))
    np.testing.assert_allclose(res.beliefs.posterior_mass, want, atol=1e-12)
    assert 6.0 <= res.estimate <= 6.5
    assert 6.2 in res.plausible and not res.plausible.is_full
