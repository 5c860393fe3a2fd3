import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerbounds.dist import SupportBounds, WeightedSample
from layerbounds.exceptions import DataError, DomainError


def uniform4():
    return WeightedSample([1, 2, 3, 4])


class TestConstruction:
    def test_weights_normalized_and_raw_sum_kept(self):
        s = WeightedSample([3.0, 1.0], [2.0, 6.0])
        np.testing.assert_allclose(s.values, [1.0, 3.0])
        np.testing.assert_allclose(s.weights, [0.75, 0.25])
        assert s.raw_weight_sum == 8.0

    def test_ties_are_merged(self):
        s = WeightedSample([1, 1, 2], [1, 1, 2])
        assert len(s) == 2
        np.testing.assert_allclose(s.weights, [0.5, 0.5])

    def test_effective_size(self):
        assert WeightedSample([1, 2, 3, 4]).effective_size == pytest.approx(4.0)
        assert WeightedSample([1, 2], [1, 3]).effective_size == pytest.approx(16 / 10)

    @pytest.mark.parametrize("values, weights", [
        ([], None),
        ([1.0, np.nan], None),
        ([1.0, 2.0], [1.0, -1.0]),
        ([1.0, 2.0], [0.0, 0.0]),
        ([1.0, 2.0], [1.0]),
    ])
    def test_rejects_bad_input(self, values, weights):
        with pytest.raises((DataError, DomainError, ValueError)):
            WeightedSample(values, weights)

    def test_arrays_are_read_only(self):
        s = uniform4()
        with pytest.raises(ValueError):
            s.values[0] = 10

    def test_support_bounds_order(self):
        with pytest.raises(DataError):
            SupportBounds(1.0, 0.0)
        assert SupportBounds(0, 1).bounded
        assert not SupportBounds().bounded


class TestQuantileAndCdf:
    def test_atom_boundary(self):
        s = WeightedSample([1, 3])
        assert s.quantile(0.5) == 1
        assert s.quantile(0.75) == 3

    @pytest.mark.parametrize("u", [1e-9, 0.3, 1.0])
    def test_point_mass(self, u):
        assert WeightedSample([2.0]).quantile(u) == 2.0

    def test_mean_and_cdf(self):
        s = WeightedSample([1, 3])
        assert s.mean() == 2
        assert s.cdf(1) == 0.5
        assert s.cdf(0.9) == 0
        assert s.cdf(3) == 1

    def test_quantile_domain(self):
        with pytest.raises(DomainError):
            uniform4().quantile(-0.1)
        assert uniform4().quantile(0.0) == 1
        with pytest.raises(DomainError):
            uniform4().quantile(1.5)


class TestTruncatedMeans:
    def test_lower_half(self):
        assert uniform4().lower_truncated_mean(0.5) == pytest.approx(1.5)

    def test_partial_atom(self):
        assert uniform4().lower_truncated_mean(0.625) == pytest.approx((0.25 + 0.5 + 0.375) / 0.625)
        assert uniform4().lower_truncated_mean(0.625) == pytest.approx(1.8)

    def test_partial_atom_against_monte_carlo(self):
        rng = np.random.default_rng(7)
        u = rng.uniform(0, 0.625, size=2_000_000)
        draws = np.array([1, 2, 3, 4])[np.minimum((u * 4).astype(int), 3)]
        se = draws.std() / np.sqrt(draws.size)
        assert abs(uniform4().lower_truncated_mean(0.625) - draws.mean()) < 3 * se

    def test_upper_half_and_no_truncation(self):
        assert uniform4().upper_truncated_mean(0.5) == pytest.approx(3.5)
        assert uniform4().upper_truncated_mean(1.0) == pytest.approx(2.5)
        assert uniform4().lower_truncated_mean(1.0) == pytest.approx(2.5)

    def test_binary_closed_forms(self):
        s = WeightedSample.binary(0.5)
        assert s.lower_truncated_mean(0.8) == pytest.approx(max(0.0, 1 - 0.5 / 0.8))
        assert s.upper_truncated_mean(0.8) == pytest.approx(min(1.0, 0.5 / 0.8))

    def test_gamma_one_within_tolerance_is_clamped(self):
        s = uniform4()
        assert s.upper_truncated_mean(1 + 5e-13) == pytest.approx(2.5)

    @pytest.mark.parametrize("g", [0.0, -0.1, 1.1, np.nan])
    def test_gamma_domain(self, g):
        with pytest.raises(DomainError):
            uniform4().lower_truncated_mean(g)

    def test_vectorized_matches_scalar(self):
        s = WeightedSample(np.random.default_rng(1).normal(size=50))
        g = np.linspace(0.01, 1, 40)
        np.testing.assert_allclose(s.lower_truncated_mean(g), [s.lower_truncated_mean(x) for x in g])
        np.testing.assert_allclose(s.upper_truncated_mean(g), [s.upper_truncated_mean(x) for x in g])

    def test_random_samples_against_monte_carlo(self, rng):
        for _ in range(5):
            vals = rng.normal(size=30)
            w = rng.random(30)
            s = WeightedSample(vals, w)
            g = rng.uniform(0.05, 1.0)
            u = rng.uniform(0, g, size=400_000)
            draws = s.quantile(u)
            se = draws.std() / np.sqrt(draws.size)
            assert abs(s.lower_truncated_mean(g) - draws.mean()) < 3 * se + 1e-12
            draws = s.quantile(1 - u)
            assert abs(s.upper_truncated_mean(g) - draws.mean()) < 3 * draws.std() / np.sqrt(draws.size) + 1e-12


samples = st.lists(
    st.tuples(st.floats(-50, 50, allow_nan=False), st.floats(0.01, 10)), min_size=1, max_size=25,
).map(lambda rows: WeightedSample([r[0] for r in rows], [r[1] for r in rows]))
gammas = st.floats(1e-3, 1.0)


@settings(max_examples=300, deadline=None)
@given(samples, gammas, gammas)
def test_monotone_nesting(s, g1, g2):
    lo_g, hi_g = sorted((g1, g2))
    eps = 1e-9 * (1 + np.abs(s.values).max())
    lo_small, lo_big = s.lower_truncated_mean(lo_g), s.lower_truncated_mean(hi_g)
    up_small, up_big = s.upper_truncated_mean(lo_g), s.upper_truncated_mean(hi_g)
    assert s.values[0] - eps <= lo_small <= lo_big + eps
    assert lo_big <= s.mean() + eps <= up_big + 2 * eps
    assert up_big <= up_small + eps <= s.values[-1] + 2 * eps


def test_monotone_nesting_bulk():
    """Vectorized sweep over 10^4 random samples."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10_000):
        n = rng.integers(1, 12)
        s = WeightedSample(rng.normal(size=n) * 5, rng.random(n) + 0.01)
        g = np.sort(rng.uniform(1e-3, 1.0, size=6))
        lo = s.lower_truncated_mean(g)
        up = s.upper_truncated_mean(g)
        worst = max(worst, np.max(np.diff(lo), initial=0) * -1, np.max(np.diff(up), initial=0),
                    lo[-1] - s.mean(), s.mean() - up[-1], s.values[0] - lo[0], up[0] - s.values[-1])
    assert worst < 1e-9


def test_mixture_constructor():
    a, b = WeightedSample([0.0]), WeightedSample([1.0])
    m = WeightedSample.mixture([(0.25, a), (0.75, b)])
    assert m.mean() == pytest.approx(0.75)
