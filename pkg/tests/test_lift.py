"""Lift algebra: construction, evaluation, composition, canonical form.

The property layer drives randomly generated exact lifts through the
identities every degree-one increasing PWL lift must satisfy; the exact
backend turns each of them into a decidable equality.
"""
import math
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

import pwlrotor as pr
from pwlrotor import errors

from conftest import rational_grid


@st.composite
def rational_lifts(draw, max_pieces=5):
    """A random exact lift: distinct breaks, positive slopes, degree one.

    Slopes come from positive weights normalised so the total rise over
    one period is exactly 1; the cyclic closure is then automatic.
    """
    n = draw(st.integers(1, max_pieces))
    denom = draw(st.integers(7, 60))
    ks = draw(st.lists(st.integers(0, denom - 1), min_size=n, max_size=n, unique=True))
    breaks = sorted(Fr(k, denom) for k in ks)
    weights = [draw(st.integers(1, 9)) for _ in range(n)]
    gaps = [
        (breaks[k + 1] if k + 1 < n else breaks[0] + 1) - breaks[k] for k in range(n)
    ]
    total = sum(w * g for w, g in zip(weights, gaps))
    slopes = [Fr(w) / total for w in weights]
    phi0 = Fr(draw(st.integers(-2, 2))) + Fr(draw(st.integers(0, 9)), 10)
    values = [phi0]
    for k in range(n - 1):
        values.append(values[-1] + slopes[k] * gaps[k])
    return pr.make_lift(breaks, values)


points = st.fractions(min_value=-3, max_value=3, max_denominator=997)


class TestConstruction:
    def test_empty_input(self):
        with pytest.raises(errors.EmptyInput):
            pr.make_lift([], [])

    def test_length_mismatch(self):
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(0), Fr(1, 2)], [Fr(1, 4)])

    def test_breaks_out_of_order(self):
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(1, 2), Fr(1, 4)], [Fr(0), Fr(1, 2)])

    def test_duplicate_break(self):
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(1, 4), Fr(1, 4)], [Fr(0), Fr(1, 2)])

    def test_break_outside_fundamental_domain(self):
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(1)], [Fr(3, 2)])
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(-1, 4)], [Fr(0)])

    def test_non_increasing_values(self):
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(0), Fr(1, 2)], [Fr(1, 2), Fr(1, 2)])

    def test_wrap_slope_must_be_positive(self):
        # values[-1] >= values[0] + 1 makes the wrap piece non-increasing
        with pytest.raises(errors.NonMonotone):
            pr.make_lift([Fr(0), Fr(1, 2)], [Fr(0), Fr(3, 2)])

    def test_rational_backend_refuses_floats(self):
        with pytest.raises(errors.BackendMismatch):
            pr.make_lift([0.0], [0.5], backend=pr.RATIONAL)

    def test_backend_inference(self):
        assert pr.make_lift([Fr(0)], [Fr(1, 2)]).backend is pr.RATIONAL
        assert pr.make_lift([0.0], [0.5]).backend is pr.FLOAT

    def test_slopes_derived_not_supplied(self):
        f = pr.make_lift([Fr(0), Fr(1, 3)], [Fr(1, 7), Fr(3, 7)])
        assert f.slopes == (Fr(6, 7), Fr(15, 14))

    def test_rigid(self):
        r = pr.rigid(Fr(2, 5))
        assert r.is_rigid
        assert r.rigid_shift == Fr(2, 5)
        assert r(Fr(1, 10)) == Fr(1, 2)

    def test_json_round_trip_exact(self):
        f = pr.make_lift([Fr(0), Fr(3, 7)], [Fr(1, 7), Fr(1)])
        g = pr.lift_from_json(f.to_json())
        assert g.breaks == f.breaks and g.values == f.values
        assert g.backend is pr.RATIONAL

    def test_json_round_trip_float(self):
        f = pr.make_lift([0.0, 0.3], [0.1, 0.9])
        g = pr.lift_from_json(f.to_json())
        assert g.breaks == f.breaks and g.values == f.values

    def test_json_rational_payload_rejects_float_scalars(self):
        bad = {"breaks": [0.0], "values": ["1/2"], "backend": "rational"}
        with pytest.raises(errors.BackendMismatch):
            pr.lift_from_json(bad)


class TestEvaluation:
    def test_inverse_round_trip_at_1000_points(self, coelho_q3):
        f = coelho_q3
        for x in rational_grid(1000):
            assert f.inverse(f(x)) == x

    def test_inverse_round_trip_float(self):
        f = pr.herman_shifted(math.sqrt(2.0)).lift(0.013)
        for i in range(1000):
            x = (i * 0.7391) % 1.0
            assert abs(f.inverse(f(x)) - x) <= 1e-12

    def test_degree_one_at_1000_points(self, coelho_q2):
        for x in rational_grid(1000):
            assert coelho_q2(x + 1) - coelho_q2(x) == 1

    def test_evaluation_below_first_break(self):
        # b_1 need not be 0; the wrap piece covers [0, b_1)
        f = pr.make_lift([Fr(1, 4), Fr(1, 2)], [Fr(1, 2), Fr(7, 8)])
        # wrap piece has slope 5/6: f(0) = (7/8 - 1) + (5/6)(1/2) = 7/24
        assert f(Fr(0)) == Fr(7, 24)
        assert f.inverse(f(Fr(1, 8))) == Fr(1, 8)

    def test_circle_wraps(self, coelho_q2):
        x = Fr(9, 10)
        assert 0 <= coelho_q2.circle(x) < 1
        assert coelho_q2.circle(x) == pr.frac(coelho_q2(x))


class TestAlgebraProperties:
    @settings(max_examples=120, deadline=None)
    @given(rational_lifts(), points)
    def test_round_trip(self, f, x):
        assert f.inverse(f(x)) == x
        assert f(f.inverse(x)) == x

    @settings(max_examples=120, deadline=None)
    @given(rational_lifts(), points)
    def test_degree_one(self, f, x):
        assert f(x + 1) - f(x) == 1

    @settings(max_examples=60, deadline=None)
    @given(rational_lifts(3), rational_lifts(3), rational_lifts(3), points)
    def test_compose_associative_on_evaluation(self, f, g, h, x):
        left = pr.compose(pr.compose(f, g), h)
        right = pr.compose(f, pr.compose(g, h))
        assert left(x) == right(x) == f(g(h(x)))

    @settings(max_examples=60, deadline=None)
    @given(rational_lifts(3), st.integers(1, 3), st.integers(1, 3), points)
    def test_power_additivity(self, f, j, k, x):
        assert pr.power(f, j + k)(x) == pr.compose(pr.power(f, j), pr.power(f, k))(x)

    @settings(max_examples=120, deadline=None)
    @given(rational_lifts())
    def test_jump_product_telescopes_to_one(self, f):
        assert pr.jump_product(f) == 1

    @settings(max_examples=120, deadline=None)
    @given(rational_lifts(), points)
    def test_canonicalize_idempotent_and_evaluation_preserving(self, f, x):
        c = pr.canonicalize(f)
        assert c(x) == f(x)
        cc = pr.canonicalize(c)
        assert cc.breaks == c.breaks and cc.values == c.values

    @settings(max_examples=80, deadline=None)
    @given(rational_lifts(), points)
    def test_invert_matches_pointwise_inverse(self, f, x):
        g = pr.invert(f)
        assert g(f(x)) == x
        assert pr.invert(g)(x) == f(x)

    @settings(max_examples=80, deadline=None)
    @given(rational_lifts(3), rational_lifts(3))
    def test_sup_difference_symmetric_and_dominating(self, f, g):
        d = pr.sup_difference(f, g)
        assert d == pr.sup_difference(g, f)
        for x in rational_grid(40):
            assert abs(f(x) - g(x)) <= d

    @settings(max_examples=80, deadline=None)
    @given(rational_lifts())
    def test_sup_difference_to_self_is_zero(self, f):
        assert pr.sup_difference(f, f) == 0


class TestCanonicalForm:
    def test_collapses_fake_breaks(self):
        # middle marked point has equal one-sided slopes: not a real break
        f = pr.make_lift([Fr(0), Fr(1, 4), Fr(1, 2)], [Fr(0), Fr(1, 4), Fr(1, 2)])
        c = pr.canonicalize(f)
        assert c.is_rigid
        assert c.rigid_shift == 0

    def test_power_of_exact_involution_is_rigid(self, coelho_q2):
        sq = pr.canonicalize(pr.power(coelho_q2, 2))
        assert sq.is_rigid
        assert sq.rigid_shift == 1

    def test_genuine_break_indices(self, coelho_q3):
        assert coelho_q3.genuine_break_indices() == [0, 1]

    def test_jump_values(self):
        f = pr.make_lift([Fr(0), Fr(3, 7)], [Fr(1, 7), Fr(1)])
        # slopes (2, 1/4): jump at break k is right/left slope
        assert pr.jump(f, 0) == Fr(2) / Fr(1, 4)
        assert pr.jump(f, 1) == Fr(1, 4) / Fr(2)
        assert pr.jump_product(f) == 1


class TestPieceCap:
    def test_cap_enforced(self):
        f = pr.refraction(2.0, 1.14).lift(0.0)
        with pytest.raises(errors.Overflow):
            pr.power(f, 50, cap=40)

    def test_cap_roomy_enough_passes(self):
        f = pr.refraction(2.0, 1.14).lift(0.0)
        assert pr.power(f, 50, cap=10**4).n <= 104
