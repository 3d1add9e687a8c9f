"""Conjugacy to rigid rotations: partitions, verdicts, h, densities, growth."""
import math
from fractions import Fraction as Fr

import pytest

import pwlrotor as pr
from pwlrotor import errors
from pwlrotor.backend import RationalBackend

from conftest import rational_grid

LOCKED = pr.herman_offset(Fr(1, 2), Fr(1, 50)).lift(Fr(1, 200))  # rho = 1/2, not conjugate


class TestBreakOrbitPartition:
    def test_coelho_single_orbit(self, coelho_q3):
        part = pr.break_orbit_partition(coelho_q3)
        assert isinstance(part, pr.OrbitPartition)
        assert (part.p, part.q, part.K) == (1, 3, 1)
        assert part.landmarks() == [Fr(0), Fr(1, 7), Fr(3, 7)]

    def test_critical_refraction_single_orbit(self, refr_critical):
        f = refr_critical.lift(0.0)
        part = pr.break_orbit_partition(f)
        assert isinstance(part, pr.OrbitPartition)
        assert (part.p, part.q, part.K) == (4, 5, 1)
        marks = part.landmarks()
        assert len(marks) == 5
        for b in f.breaks:
            assert min(abs(b - x) for x in marks) < 1e-9

    def test_herman_closure(self, herman_32):
        part = pr.break_orbit_partition(herman_32.lift(0))
        assert (part.p, part.q, part.K) == (1, 2, 1)
        assert part.landmarks() == [Fr(0), Fr(2, 5)]

    def test_locked_map_reports_drift(self):
        res = pr.break_orbit_partition(LOCKED)
        assert isinstance(res, pr.NotPeriodic)
        assert res.q == 2
        assert res.drift != 0
        j = res.to_json()
        assert j["q"] == 2 and j["drift"] == "3/400"

    def test_unresolvable_rotation_raises(self):
        f = pr.coelho(Fr(3, 10), Fr(11, 20)).lift(0)
        with pytest.raises(errors.RotationIrrational):
            pr.break_orbit_partition(f, q_cap=30)

    def test_partition_json(self, coelho_q3):
        j = pr.break_orbit_partition(coelho_q3).to_json()
        assert j["p"] == 1 and j["q"] == 3
        assert len(j["orbits"]) == 1


class TestVerdicts:
    CONJUGATE = [
        pr.coelho(Fr(1, 3), Fr(1, 3)).lift(0),
        pr.coelho(Fr(1, 7), Fr(3, 7)).lift(0),
        pr.herman_shifted(Fr(3, 2)).lift(0),
        pr.refraction(2.0, pr.gmm_critical_beta(2.0)).lift(0.0),
    ]
    NOT_CONJUGATE = [
        LOCKED,
        pr.refraction(2.0, 1.14).lift(0.0),
    ]

    @pytest.mark.parametrize("idx", range(len(CONJUGATE)))
    def test_conjugate_iff_power_is_rigid(self, idx):
        # the partition route and the canonical-power route must agree
        f = self.CONJUGATE[idx]
        v = pr.is_conjugate_to_rigid(f)
        assert isinstance(v, pr.Conjugate)
        P = pr.canonicalize(pr.power(f, v.q))
        assert P.is_rigid
        assert f.backend.eq_point(P.rigid_shift, v.p)

    @pytest.mark.parametrize("idx", range(len(NOT_CONJUGATE)))
    def test_not_conjugate_iff_power_is_not_rigid(self, idx):
        f = self.NOT_CONJUGATE[idx]
        v = pr.is_conjugate_to_rigid(f)
        assert isinstance(v, pr.NotConjugate)
        assert not pr.canonicalize(pr.power(f, v.q)).is_rigid

    def test_undecided_when_no_rational_certificate(self):
        f = pr.coelho(Fr(3, 10), Fr(11, 20)).lift(0)
        v = pr.is_conjugate_to_rigid(f, q_cap=30)
        assert isinstance(v, pr.Undecided)
        assert v.enclosure is not None

    def test_verdict_json_tags(self):
        assert pr.is_conjugate_to_rigid(self.CONJUGATE[0]).to_json()["verdict"] == "conjugate"
        assert pr.is_conjugate_to_rigid(LOCKED).to_json()["verdict"] == "not_conjugate"

    def test_cancellations_multiply_to_one(self):
        for f in self.CONJUGATE:
            v = pr.is_conjugate_to_rigid(f)
            chk = pr.check_trivial_cancellations(f, v.partition)
            if isinstance(f.backend, RationalBackend):
                assert chk.global_product == 1
                assert all(p == 1 for p in chk.per_orbit)
            else:
                assert abs(chk.global_product - 1) <= 1e-12
                assert all(abs(p - 1) <= 1e-12 for p in chk.per_orbit)


class TestBuildConjugacy:
    def test_pins_first_break_to_zero(self, coelho_q3):
        h = pr.build_conjugacy(coelho_q3)
        assert h(Fr(0)) == 0

    def test_h_is_a_homeomorphism(self, coelho_q3):
        h = pr.build_conjugacy(coelho_q3)
        assert all(s > 0 for s in h.slopes)
        for x in rational_grid(100):
            assert h(x + 1) - h(x) == 1

    def test_conjugacy_equation_exact(self, coelho_q3):
        h = pr.build_conjugacy(coelho_q3)
        shifts = set()
        for x in rational_grid(1000):
            d = h(coelho_q3(x)) - h(x) - Fr(1, 3)
            assert d.denominator == 1  # h o f - r_{p/q} o h takes integer values
            shifts.add(d)
        assert len(shifts) == 1  # ... and a constant one

    def test_conjugacy_equation_float(self, refr_critical):
        f = refr_critical.lift(0.0)
        h = pr.build_conjugacy(f)
        d0 = h(f(0.0)) - h(0.0) - 0.8
        assert abs(d0 - round(d0)) <= 1e-10
        worst = 0.0
        for i in range(1000):
            x = (i * 0.61803398875) % 1.0
            d = h(f(x)) - h(x) - 0.8
            worst = max(worst, abs(d - round(d0)))
        assert worst <= 1e-10

    def test_conjugates_to_the_rigid_rotation(self, coelho_q2):
        h = pr.build_conjugacy(coelho_q2)
        g = pr.canonicalize(pr.compose(pr.compose(h, coelho_q2), pr.invert(h)))
        assert g.is_rigid
        assert pr.frac(g.rigid_shift) == Fr(1, 2)

    def test_rigid_input_gives_identity(self):
        h = pr.build_conjugacy(pr.rigid(Fr(2, 5)))
        assert h.is_rigid and h.rigid_shift == 0

    def test_raises_on_locked_map(self):
        with pytest.raises(errors.NotConjugateError):
            pr.build_conjugacy(LOCKED)


class TestInvariantDensity:
    def test_exact_closed_form(self, herman_32):
        rho = pr.invariant_density(herman_32.lift(0))
        assert rho.cuts == (Fr(0), Fr(2, 5))
        assert rho.values == (Fr(5, 4), Fr(5, 6))
        assert rho.mass() == 1

    def test_float_closed_form(self, herman_sqrt2):
        lam = math.sqrt(2.0)
        rho = pr.invariant_density(herman_sqrt2.lift(0.0))
        assert len(rho.cuts) == 2
        assert abs(rho.cuts[1] - 1 / (1 + lam)) <= 1e-12
        assert abs(rho.values[0] - (1 + lam) / 2) <= 1e-12
        assert abs(rho.values[1] - (1 + 1 / lam) / 2) <= 1e-12

    def test_rigid_map_has_uniform_density(self):
        rho = pr.invariant_density(pr.rigid(Fr(2, 5)))
        assert rho.values == (Fr(1),)
        assert rho.mass() == 1

    def test_evaluation_and_cdf(self, herman_32):
        rho = pr.invariant_density(herman_32.lift(0))
        assert rho(Fr(1, 5)) == Fr(5, 4)
        assert rho(Fr(1, 2)) == Fr(5, 6)
        phi = rho.cdf_lift()
        assert phi(Fr(0)) == 0
        assert phi(Fr(1)) == 1  # total mass again, as the lift's degree

    def test_verify_invariance_exact_zero(self, herman_32):
        f = herman_32.lift(0)
        assert pr.verify_invariance(f, pr.invariant_density(f)) == 0

    def test_verify_invariance_float(self, herman_sqrt2):
        f = herman_sqrt2.lift(0.0)
        assert pr.verify_invariance(f, pr.invariant_density(f)) <= 1e-12

    def test_density_json_and_csv(self, herman_32):
        rho = pr.invariant_density(herman_32.lift(0))
        j = rho.to_json()
        assert j["cuts"] == ["0", "2/5"] and j["densities"] == ["5/4", "5/6"]
        rows = rho.to_csv_rows()
        assert len(rows) == 2 and len(rows[0]) == 2

    def test_raises_on_locked_map(self):
        with pytest.raises(errors.NotConjugateError):
            pr.invariant_density(LOCKED)


class TestGrowth:
    def test_conjugate_break_counts_bounded(self, coelho_q2):
        counts = pr.break_count_growth(coelho_q2, 50)
        assert max(counts) <= 2  # q*K = 2*1

    def test_conjugate_slopes_bounded(self, coelho_q2):
        slopes = pr.derivative_growth(coelho_q2, 50)
        assert max(slopes) <= 2  # s_M^(q-1) = 2^1

    def test_critical_refraction_bounded(self, refr_critical):
        f = refr_critical.lift(0.0)
        counts = pr.break_count_growth(f, 50)
        slopes = pr.derivative_growth(f, 50)
        s_M = max(f.slopes)
        assert max(counts) <= 5  # q*K = 5*1
        assert max(slopes) <= s_M**4 * (1 + 1e-9)

    def test_locked_map_violates_both_bounds(self):
        f = pr.refraction(2.0, 1.14).lift(0.0)
        counts = pr.break_count_growth(f, 50)
        slopes = pr.derivative_growth(f, 50)
        s_M = max(f.slopes)
        assert max(counts) > 6  # would be q*K if it were conjugate
        assert max(slopes) > s_M**5
