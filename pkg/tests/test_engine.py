import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from relbelief import engine
from relbelief.engine import (
    DiscreteBeliefs,
    EmptyHistogramError,
    Grid,
    GridError,
    InconsistentMassError,
    build_grid,
    credible_region,
    histogram_mass,
    implausible_region,
    plausible_region,
    rb_estimate,
    relative_belief,
)


def _beliefs(prior, post, lo=0.0, delta=1.0):
    prior, post = np.asarray(prior, float), np.asarray(post, float)
    return DiscreteBeliefs(Grid.regular(lo, delta, len(prior)), prior / prior.sum(), post / post.sum())


def test_regular_grid_midpoints():
    g = Grid.regular(0.0, 0.5, 20)
    assert len(g) == 20
    assert g.midpoints[0] == 0.25 and g.midpoints[-1] == 9.75
    assert g.delta == 0.5 and g.lo == 0.0 and g.hi == 10.0


def test_from_range_requires_integral_count():
    assert len(Grid.from_range(3.0, 10.0, 0.5)) == 14
    with pytest.raises(GridError):
        Grid.from_range(0.0, 1.0, 0.3)


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(np.array([0.0, 1.0, 0.5]), np.array([0.5, 0.7]))
    with pytest.raises(GridError):
        Grid.regular(0, -1, 3)


def test_locate_half_open():
    g = Grid.regular(0.0, 1.0, 3)
    assert g.locate([0.0, 0.999, 1.0, 2.5, 3.0, -0.1]).tolist() == [0, 0, 1, 2, -1, -1]


def test_build_grid_unit_interval(src):
    g = build_grid(src.rng.uniform(0, 1, 5000), 0.1, tail_prob=0.0)
    assert len(g) == 10
    np.testing.assert_allclose(g.midpoints, np.arange(0.05, 1.0, 0.1), atol=1e-12)


def test_build_grid_normal_tails(src):
    x = src.rng.normal(size=100_000)
    q = np.quantile(x, [0.0005, 0.9995])
    assert q == pytest.approx([-3.29, 3.29], abs=0.1)
    g = build_grid(x, 0.1)
    # edges snap outward by less than one bin
    assert q[0] - 0.1 < g.lo <= q[0] and q[1] <= g.hi < q[1] + 0.1


def test_build_grid_origin_shifts_edges(src):
    g = build_grid(src.rng.normal(size=10_000), 0.1, origin=0.05)
    k = (g.edges - 0.05) / 0.1
    np.testing.assert_allclose(k, np.round(k), atol=1e-9)


def test_build_grid_errors():
    with pytest.raises(GridError):
        build_grid(np.ones(5000), 0.1)
    with pytest.raises(GridError):
        build_grid(np.arange(10.0), 0.1)


def test_histogram_mass_examples(src):
    g = Grid.regular(0.0, 0.5, 2)
    np.testing.assert_allclose(histogram_mass([0.1, 0.1, 0.6, 0.9], g), [0.5, 0.5])
    u = histogram_mass(src.rng.uniform(size=100_000), Grid.regular(0, 0.1, 10))
    assert np.all(np.abs(u - 0.1) < 0.01)
    with pytest.raises(EmptyHistogramError):
        histogram_mass([5.0, 6.0], g)


def test_histogram_drops_out_of_range():
    np.testing.assert_allclose(histogram_mass([0.2, 0.7, 9.0], Grid.regular(0, 0.5, 2)), [0.5, 0.5])


@pytest.mark.parametrize(
    "prior, post, expected",
    [((0.5, 0.5), (0.5, 0.5), (1.0, 1.0)), ((0.5, 0.5), (0.8, 0.2), (1.6, 0.4)), ((0.5, 0.0, 0.5), (0.6, 0.0, 0.4), (1.2, 1.0, 0.8))],
)
def test_relative_belief_examples(prior, post, expected):
    np.testing.assert_allclose(relative_belief(prior, post), expected)


def test_relative_belief_inconsistent_mass():
    with pytest.raises(InconsistentMassError):
        relative_belief([1.0, 0.0], [0.9, 0.1])
    with pytest.raises(ValueError):
        relative_belief([0.5, 0.6], [0.5, 0.5])


def test_beliefs_are_read_only():
    b = _beliefs([1, 1], [3, 1])
    with pytest.raises(ValueError):
        b.rb[0] = 5.0


def test_no_update_gives_empty_regions():
    b = _beliefs([1, 2, 3], [1, 2, 3])
    assert plausible_region(b).is_empty and implausible_region(b).is_empty


def test_region_contents_and_intervals():
    b = _beliefs([1, 1, 1, 1, 1], [3, 0.5, 2, 2, 0.5])
    pl = plausible_region(b)
    assert pl.bins.tolist() == [0, 2, 3]
    assert pl.intervals == [(0.0, 1.0), (2.0, 4.0)]
    assert pl.posterior_content == pytest.approx(7 / 8)
    assert pl.prior_content == pytest.approx(0.6)
    assert pl.touches_lower and not pl.touches_upper
    assert 2.5 in pl and 1.5 not in pl
    assert implausible_region(b).bins.tolist() == [1, 4]


def test_rb_estimate_and_ties():
    assert rb_estimate(DiscreteBeliefs(Grid.regular(0, 1, 3), np.array([1, 1, 1]) / 3, np.array([1, 2, 1]) / 4)) == 1.5
    assert rb_estimate(_beliefs([1, 1, 1], [1, 1, 1])) == 0.5


def test_credible_two_bin_example():
    b = _beliefs([0.5, 0.5], [0.7, 0.3])
    assert credible_region(b, 0.6).bins.tolist() == [0]
    assert credible_region(b, 0.75).bins.tolist() == [0, 1]


def test_credible_small_gamma_is_argmax():
    b = _beliefs([1, 1, 1, 1], [1, 4, 2, 1])
    assert credible_region(b, 1e-6).bins.tolist() == [1]


def test_credible_inside_plausible():
    b = _beliefs([1, 1, 1, 1, 1], [1, 3, 5, 3, 0.5])
    pl = plausible_region(b)
    for g in np.linspace(0.05, pl.posterior_content, 20):
        assert set(credible_region(b, g).bins) <= set(pl.bins)


def test_credible_gamma_domain():
    with pytest.raises(ValueError):
        credible_region(_beliefs([1, 1], [1, 2]), 1.0)


mass_value = st.one_of(st.just(0.0), st.floats(1e-6, 10.0))
masses = st.lists(mass_value, min_size=2, max_size=40)


@settings(max_examples=200, deadline=None)
@given(masses, st.data())
def test_plausible_never_full_and_integral(prior, data):
    prior = np.asarray(prior)
    assume(prior.sum() > 0)
    post = np.asarray(data.draw(st.lists(mass_value, min_size=len(prior), max_size=len(prior))))
    post = np.where(prior > 0, post, 0.0)
    assume(post.sum() > 0)
    b = _beliefs(prior, post)
    assert not plausible_region(b).is_full
    assert b.integral() == pytest.approx(1.0, abs=1e-9)
    for g in (0.1, 0.5, 0.9, 0.99):
        assert credible_region(b, g).posterior_content >= g - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=3, max_size=30), st.integers(0, 2**32 - 1))
def test_relabel_invariance(prior, seed):
    rng = np.random.default_rng(seed)
    post = rng.gamma(1.0, size=len(prior))
    b = _beliefs(prior, post, lo=0.1, delta=0.3)
    for f in (np.exp, np.cbrt, lambda x: 5 * x - 2, np.log):
        r = b.relabel(f)
        np.testing.assert_array_equal(r.rb, b.rb)
        assert int(np.argmax(r.rb)) == int(np.argmax(b.rb))
        assert rb_estimate(r) == pytest.approx(float(f(np.asarray(rb_estimate(b)))))
        assert plausible_region(r).bins.tolist() == plausible_region(b).bins.tolist()
        assert plausible_region(r).posterior_content == plausible_region(b).posterior_content
        assert credible_region(r, 0.8).bins.tolist() == credible_region(b, 0.8).bins.tolist()


def test_from_samples_histograms(src):
    g = Grid.regular(-4, 0.5, 16)
    b = DiscreteBeliefs.from_samples(g, src.rng.normal(size=50_000), src.rng.normal(0.5, 0.5, 50_000))
    assert rb_estimate(b) == pytest.approx(0.75, abs=0.5)
    assert b.integral() == pytest.approx(1.0, abs=1e-9)


def test_module_exports():
    import relbelief

    for name in relbelief.__all__:
        assert hasattr(relbelief, name)
    assert relbelief.plausible_region is engine.plausible_region
