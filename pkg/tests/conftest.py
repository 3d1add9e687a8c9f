"""Shared fixtures: the handful of maps the suite keeps coming back to."""
import math
from fractions import Fraction as Fr

import pytest

import pwlrotor as pr

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def herman_sqrt2():
    """Two-slope family at lam = sqrt(2); mu = 0 is its rho = 1/2 closure."""
    return pr.herman_shifted(SQRT2)


@pytest.fixture(scope="session")
def herman_32():
    """Rational twin (lam = 3/2) for exact-backend assertions."""
    return pr.herman_shifted(Fr(3, 2))


@pytest.fixture(scope="session")
def refr_critical():
    """Refraction family at alpha = 2, beta at the period-5 closure."""
    return pr.refraction(2.0, pr.gmm_critical_beta(2.0))


@pytest.fixture(scope="session")
def coelho_q2():
    """Tuned coelho map with f^2 = Id exactly (rho = 1/2)."""
    return pr.coelho(Fr(1, 3), Fr(1, 3)).lift(0)


@pytest.fixture(scope="session")
def coelho_q3():
    """Tuned coelho map with f^3 = Id exactly (rho = 1/3)."""
    return pr.coelho(Fr(1, 7), Fr(3, 7)).lift(0)


def rational_grid(n, denom=9973):
    """n distinct rationals in [0, 1) with a fixed prime denominator."""
    step = max(1, denom // n)
    return [Fr((i * step) % denom, denom) for i in range(n)]
