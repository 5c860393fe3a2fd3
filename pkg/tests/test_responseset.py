import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerbounds.exceptions import (
    ConfigurationError, DataError, DegenerateLayerError, FalsificationError,
)
from layerbounds.responseset import (
    LEE, STAYERS_GE_DOWN, STRONG_MONO, TABLE1, UP_GE_DOWN, IdentifiedSet, LinearConstraint,
    PropensityTable, RestrictionSet, ResponseType, all_types, polygon_contains, smallest_type,
    two_type_closed_form_ranges, two_type_profile, type_index, zero_type,
)

HH, LL, HL, LH = ResponseType(2, 2), ResponseType(1, 1), ResponseType(2, 1), ResponseType(1, 2)
LEE_ONLY = RestrictionSet((LEE,))


def random_table(rng, K=2, monotone=True):
    while True:
        treated = rng.dirichlet(np.ones(K + 1))
        control = rng.dirichlet(np.ones(K + 1))
        if not monotone or treated[0] <= control[0]:
            return PropensityTable(np.vstack([control, treated]))


class TestTypes:
    def test_indexing_round_trip(self):
        for K in (1, 2, 3):
            types = all_types(K)
            assert len(types) == (K + 1) ** 2
            assert [type_index(t, K) for t in types] == list(range(len(types)))

    def test_layers(self):
        t = ResponseType(1, 2)
        assert (t.layer(0), t.layer(1)) == (1, 2)
        assert t.always_employed and not t.is_stayer


class TestPropensityTable:
    def test_from_employment(self, table1):
        assert table1(0, 1) == pytest.approx(0.289)
        assert table1(0, 0) == pytest.approx(0.313)
        assert table1.employment_rate(1) == pytest.approx(0.711)

    @pytest.mark.parametrize("probs", [
        [[0.5, 0.6], [0.5, 0.5]],
        [[-0.1, 1.1], [0.5, 0.5]],
        [[0.5, 0.5, 0.0]],
    ])
    def test_rejects(self, probs):
        with pytest.raises((DataError, ConfigurationError)):
            PropensityTable(np.array(probs))


class TestRestrictions:
    def test_lee_zeroes_downward_exits(self):
        assert LEE_ONLY.zero_types(1) == {ResponseType(1, 0)}
        assert LEE_ONLY.zero_types(2) == {ResponseType(1, 0), ResponseType(2, 0)}

    def test_zero_type_adds(self):
        rs = RestrictionSet((LEE, zero_type(HL)))
        assert HL in rs.zero_types(2)
        names = [c.name for c in rs.expand(2)]
        assert names.count("p(2, 1)=0") == 1

    def test_strong_mono_zeroes_all_downward(self):
        z = RestrictionSet((STRONG_MONO,)).zero_types(2)
        assert z == {ResponseType(1, 0), ResponseType(2, 0), HL}

    def test_restriction_union(self):
        rs = LEE_ONLY + STAYERS_GE_DOWN + LEE
        assert rs.labels() == ["lee", "stayers-ge-down"]

    def test_bad_constraint_length(self):
        c = LinearConstraint((1.0, -1.0), ">=", 0.0, "short")
        with pytest.raises(ConfigurationError):
            IdentifiedSet(TABLE1, RestrictionSet((LEE,), (c,)))

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            RestrictionSet(("nope",))

    def test_smallest_skips_ruled_out_types(self):
        rs = RestrictionSet((LEE, smallest_type(HL)))
        rows = [c.name for c in rs.expand(2) if c.op == ">="]
        assert "p(1, 0)>=p(2, 1)" not in rows
        assert "p(0, 0)>=p(2, 1)" in rows


class TestIdentifiedSet:
    def test_table1_feasible(self, table1):
        assert not IdentifiedSet(table1, LEE_ONLY).is_empty()

    def test_swapped_rows_infeasible(self, table1):
        iset = IdentifiedSet(table1.swapped(), LEE_ONLY)
        assert iset.is_empty()
        with pytest.raises(FalsificationError) as err:
            iset.min_prob(HH)
        assert err.value.certificate > 0

    def test_boundary_k1_is_feasible(self):
        pt = PropensityTable(np.array([[0.4, 0.6], [0.4, 0.6]]))
        assert not IdentifiedSet(pt, LEE_ONLY).is_empty()

    def test_table1_ranges(self, table1):
        iset = IdentifiedSet(table1, LEE_ONLY)
        assert iset.min_prob(HH) == pytest.approx(0.373041 - 0.302886, abs=1e-12)
        assert iset.max_prob(HH) == pytest.approx(0.373041, abs=1e-12)
        assert iset.min_prob(LL) == pytest.approx(0.0, abs=1e-12)
        assert iset.max_prob(LL) == pytest.approx(0.302886, abs=1e-12)

    def test_gamma_lower(self, table1):
        iset = IdentifiedSet(table1, LEE_ONLY)
        assert iset.gamma_lower(HH, 1) == pytest.approx(0.070155 / 0.408114, abs=1e-12)
        assert iset.gamma_lower(HH, 0) == pytest.approx(0.070155 / 0.373041, abs=1e-12)
        assert iset.gamma_lower(LL, 1) == 0.0

    def test_gamma_degenerate(self):
        pt = PropensityTable(np.array([[0.5, 0.5, 0.0], [0.4, 0.3, 0.3]]))
        with pytest.raises(DegenerateLayerError):
            IdentifiedSet(pt, LEE_ONLY).gamma_lower(HH, 0)

    def test_feasible_point_is_contained(self, table1):
        iset = IdentifiedSet(table1, RestrictionSet((LEE, STAYERS_GE_DOWN)))
        assert iset.contains(iset.feasible_point())

    def test_closed_forms_match_lp_on_random_tables(self, rng):
        for _ in range(200):
            pt = random_table(rng)
            iset = IdentifiedSet(pt, LEE_ONLY)
            for t, (lo, hi) in two_type_closed_form_ranges(pt).items():
                assert iset.min_prob(t) == pytest.approx(lo, abs=1e-12)
                assert iset.max_prob(t) == pytest.approx(hi, abs=1e-12)

    def test_tightening_never_widens(self, rng):
        chain = [LEE, STAYERS_GE_DOWN, UP_GE_DOWN, zero_type(HL)]
        for _ in range(30):
            pt = random_table(rng)
            prev = None
            for k in range(1, len(chain) + 1):
                iset = IdentifiedSet(pt, RestrictionSet(tuple(chain[:k])))
                if iset.is_empty():
                    break
                cur = {t: iset.prob_range(t) for t in iset.types}
                if prev:
                    for t in cur:
                        assert cur[t][0] >= prev[t][0] - 1e-10
                        assert cur[t][1] <= prev[t][1] + 1e-10
                prev = cur


class TestTwoTypeProfile:
    def test_true_values(self, table1):
        prof = two_type_profile(table1, 0.373041, 0.278886)
        assert prof.feasible
        assert prof.probs[HL] == pytest.approx(0.0, abs=1e-12)
        assert prof.probs[LH] == pytest.approx(0.035073, abs=1e-12)
        assert prof.probs[ResponseType(0, 0)] == pytest.approx(0.289, abs=1e-12)

    def test_above_max_is_infeasible(self, table1):
        assert not two_type_profile(table1, 0.38, 0.1).feasible

    def test_zero_stayers(self, table1):
        prof = two_type_profile(table1, 0.0, 0.0)
        assert prof.probs[LH] == pytest.approx(0.313959)
        assert prof.probs[HL] == pytest.approx(0.373041)

    def test_profile_satisfies_marginals(self, table1):
        prof = two_type_profile(table1, 0.2, 0.1)
        iset = IdentifiedSet(table1, LEE_ONLY)
        assert iset.contains(prof.vector()) == prof.feasible


class TestPolygon:
    def test_lee_polygon(self, table1):
        poly = IdentifiedSet(table1, LEE_ONLY).vertices_2d()
        xs, ys = zip(*poly)
        assert min(xs) == pytest.approx(0.0, abs=1e-12)
        assert max(xs) == pytest.approx(0.302886, abs=1e-12)
        assert min(ys) == pytest.approx(0.070155, abs=1e-12)
        assert max(ys) == pytest.approx(0.373041, abs=1e-12)
        area = 0.5 * sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]))
        assert area > 0  # counterclockwise

    def test_zero_hl_collapses_to_segment(self, table1):
        poly = IdentifiedSet(table1, RestrictionSet((LEE, zero_type(HL)))).vertices_2d()
        assert len(poly) == 2
        assert all(y == pytest.approx(0.373041, abs=1e-12) for _, y in poly)

    def test_single_point(self):
        pt = PropensityTable(np.array([[0.2, 0.3, 0.5], [0.2, 0.3, 0.5]]))
        poly = IdentifiedSet(pt, RestrictionSet((STRONG_MONO,))).vertices_2d()
        assert len(poly) == 1
        np.testing.assert_allclose(poly[0], (0.3, 0.5), atol=1e-12)

    def test_membership_matches_profile_feasibility(self, table1):
        poly = IdentifiedSet(table1, LEE_ONLY).vertices_2d()
        for x, y in itertools.product(np.linspace(0, 0.31, 25), np.linspace(0, 0.38, 25)):
            inside = polygon_contains(poly, np.array([x]), np.array([y]), tol=1e-9)[0]
            prof = two_type_profile(table1, y, x, tol=1e-9)
            assert bool(inside) == prof.feasible


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.6), st.floats(0.0, 0.6), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_falsification_characterization(n1, n0, s1, s0):
    treated = np.array([n1, (1 - n1) * s1, (1 - n1) * (1 - s1)])
    control = np.array([n0, (1 - n0) * s0, (1 - n0) * (1 - s0)])
    iset = IdentifiedSet(PropensityTable(np.vstack([control, treated])), LEE_ONLY)
    if abs(n1 - n0) > 1e-9:
        assert iset.is_empty() == (n1 > n0)
