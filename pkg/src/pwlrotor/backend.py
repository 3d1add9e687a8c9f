"""Numeric backends: exact rationals and tolerance-governed floats.

The map algebra in this package is written against plain Python numbers.
A backend object supplies the two things that genuinely differ between
representations: how raw inputs are coerced, and how equality and sign
questions are decided.  Exact data are ``fractions.Fraction`` values, so
every comparison is decidable; float data are IEEE doubles, and every
equality test is routed through an explicit tolerance policy instead of
``==``.

The float policy uses two scales: ``eps_x`` for positions and values (the
quantities that enter break/orbit coincidence tests) and ``eps_s`` for
slopes (which accumulate multiplicative error under composition).  Sign
decisions additionally honour a ``decision_band``: a quantity within the
band of zero is *undecided* rather than signed, so callers can degrade to
an enclosure instead of asserting a wrong strict inequality.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import BackendMismatch

Num = Union[Fraction, float]


@dataclass(frozen=True)
class RationalBackend:
    """Exact arithmetic on ``Fraction``.  Refuses floats outright."""

    tag = "rational"

    def coerce(self, x) -> Fraction:
        if isinstance(x, float):
            raise BackendMismatch(
                "the exact backend refuses floats (got %r); pass a Fraction, "
                "an int, or a 'p/q' string" % (x,)
            )
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        raise TypeError("cannot coerce %r to an exact scalar" % (x,))

    def eq_point(self, a, b) -> bool:
        return a == b

    def eq_slope(self, a, b) -> bool:
        return a == b

    def sign(self, x, band=None) -> Optional[int]:
        """Exact sign; the band is irrelevant here."""
        if x > 0:
            return 1
        if x < 0:
            return -1
        return 0

    def scalar_to_json(self, x):
        return str(Fraction(x))

    def scalar_from_json(self, v) -> Fraction:
        if isinstance(v, float):
            raise BackendMismatch(
                "rational payloads must encode scalars as 'p/q' strings or "
                "integers, not JSON floats (got %r)" % (v,)
            )
        return self.coerce(v)


@dataclass(frozen=True)
class FloatBackend:
    """IEEE doubles with an explicit tolerance policy.

    eps_x: equality scale for positions and values.
    eps_s: equality scale for slopes.
    decision_band: half-width of the dead zone around zero inside which
        ``sign`` declines to answer (returns ``None``).
    """

    eps_x: float = 1e-12
    eps_s: float = 1e-10
    decision_band: float = 1e-10

    tag = "float"

    def coerce(self, x) -> float:
        if isinstance(x, (int, float, Fraction)):
            return float(x)
        if isinstance(x, str):
            return float(Fraction(x))
        raise TypeError("cannot coerce %r to a float scalar" % (x,))

    def eq_point(self, a, b) -> bool:
        return abs(a - b) <= self.eps_x

    def eq_slope(self, a, b) -> bool:
        return abs(a - b) <= self.eps_s

    def sign(self, x, band=None) -> Optional[int]:
        half = self.decision_band if band is None else band
        if x > half:
            return 1
        if x < -half:
            return -1
        return None

    def scalar_to_json(self, x):
        return float(x)

    def scalar_from_json(self, v) -> float:
        return self.coerce(v)


Backend = Union[RationalBackend, FloatBackend]

RATIONAL = RationalBackend()
FLOAT = FloatBackend()


def backend_from_tag(tag: str, **tolerances) -> Backend:
    if tag == "rational":
        if tolerances:
            raise ValueError("the rational backend takes no tolerances")
        return RATIONAL
    if tag == "float":
        return FloatBackend(**tolerances) if tolerances else FLOAT
    raise ValueError("unknown backend tag %r (expected 'rational' or 'float')" % (tag,))


def infer_backend(entries) -> Backend:
    """Pick a backend from raw data: floats anywhere means float."""
    for x in entries:
        if isinstance(x, float):
            return FLOAT
    return RATIONAL
