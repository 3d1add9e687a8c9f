"""Rotation numbers of PWL circle lifts: enclosures, exact values, locking.

Three complementary tools live here.

* :func:`birkhoff_enclosure` — iterate the orbit of 0 and use the classical
  bound ``|F^m(0) - m rho| < 1`` to trap the rotation number in an interval
  of width ``2/m``.  Cheap, rigorous, never exact.
* :func:`exact_rotation` — walk the Stern-Brocot tree.  For a candidate
  ``p/q`` the sign of ``E(x) = F^q(x) - x - p`` over the marked points of
  the explicit lift of ``F^q`` decides ``rho`` against ``p/q``: ``min E > 0``
  means ``rho > p/q``, ``max E < 0`` means ``rho < p/q``, and a zero or sign
  change certifies ``rho = p/q`` together with a periodic witness.  In the
  float backend each strict sign must clear a decision band; inside the
  band the search degrades to the current enclosure instead of guessing.
* :func:`mode_lock_interval` — for a monotone one-parameter family, locate
  the parameter interval on which ``rho = p/q`` by bisecting the two sign
  functions ``max E`` (lower edge) and ``min E`` (upper edge) separately,
  which keeps width-zero intervals (conjugacy pinches) honest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import errors, kernel
from .backend import FloatBackend, Num, RationalBackend
from .lift import DEFAULT_PIECE_CAP, PwlLift, canonicalize, compose, frac, power

_ABOVE = "above"
_BELOW = "below"
_HIT = "hit"
_UNDECIDED = "undecided"


def _scalar_json(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


@dataclass(frozen=True)
class RotationResult:
    """Outcome of a rotation-number computation.

    ``kind`` is ``"exact"`` (with ``p``, ``q``, and a periodic ``witness``)
    or ``"enclosure"`` (with rigorous bounds ``lo <= rho <= hi``).  Both
    kinds populate ``lo``/``hi`` so consumers can treat them uniformly.
    """

    kind: str
    p: Optional[int]
    q: Optional[int]
    lo: Num
    hi: Num
    witness: Optional[Num] = None
    iterations: Optional[int] = None

    @classmethod
    def exact(cls, p: int, q: int, witness, iterations=None) -> "RotationResult":
        value = Fraction(p, q)
        return cls(
            kind="exact",
            p=value.numerator,
            q=value.denominator,
            lo=value,
            hi=value,
            witness=witness,
            iterations=iterations,
        )

    @classmethod
    def enclosure(cls, lo, hi, iterations=None) -> "RotationResult":
        return cls(kind="enclosure", p=None, q=None, lo=lo, hi=hi, iterations=iterations)

    @property
    def value(self) -> Fraction:
        if self.kind != "exact":
            raise errors.RotationIrrational("no exact rational value; only an enclosure")
        return Fraction(self.p, self.q)

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "q": self.q,
            "lo": _scalar_json(self.lo),
            "hi": _scalar_json(self.hi),
            "witness": _scalar_json(self.witness),
            "iterations": self.iterations,
        }


def birkhoff_enclosure(f: PwlLift, m: int, x0=0) -> RotationResult:
    """Trap the rotation number via ``m`` orbit steps from ``x0``.

    Uses the bound ``|F^m(x) - x - m rho| < 1``, so the enclosure has
    width exactly ``2/m``.  Float lifts run through the compiled kernel
    (winding tracked separately from the fractional position); exact lifts
    iterate in rational arithmetic and the result is fully rigorous.
    """
    if m < 1:
        raise ValueError("need at least one iterate, got m=%d" % m)
    x0 = f.backend.coerce(x0)
    if not (0 <= x0 < 1):
        x0 = frac(x0)
    if isinstance(f.backend, RationalBackend):
        x = x0
        for _ in range(m):
            x = f(x)
        disp = x - x0
        return RotationResult.enclosure((disp - 1) / m, (disp + 1) / m, iterations=m)
    breaks = np.asarray(f.breaks, dtype=float)
    values = np.asarray(f.values, dtype=float)
    slopes = np.asarray(f.slopes, dtype=float)
    wind, x_end = kernel.iterate(breaks, values, slopes, float(x0), m)
    disp = wind + (x_end - float(x0))
    return RotationResult.enclosure((disp - 1.0) / m, (disp + 1.0) / m, iterations=m)


def _edge_values(P: PwlLift, p) -> list:
    """``E(x) = P(x) - x - p`` at the marked points of ``P``.

    ``E`` is PWL and periodic, so its extrema over the circle are attained
    on this list.
    """
    return [P(b) - b - p for b in P.breaks]


def _find_witness(P: PwlLift, p):
    """A root of ``E`` once min/max straddle zero; None if none is found."""
    backend = P.backend
    is_float = isinstance(backend, FloatBackend)
    vals = _edge_values(P, p)
    n = P.n
    for k in range(n):
        ek = vals[k]
        if (is_float and abs(ek) <= backend.eps_x) or (not is_float and ek == 0):
            return P.breaks[k]
        e_next = vals[(k + 1) % n]
        if (ek > 0 > e_next) or (ek < 0 < e_next):
            # strict sign change inside the piece; slope != 1 there
            root = P.breaks[k] + ek / (1 - P.slopes[k])
            return frac(root)
    return None


def _classify(P: PwlLift, p) -> Tuple[str, Optional[Num]]:
    vals = _edge_values(P, p)
    mn = min(vals)
    mx = max(vals)
    backend = P.backend
    if isinstance(backend, RationalBackend):
        if mn > 0:
            return _ABOVE, None
        if mx < 0:
            return _BELOW, None
        return _HIT, _find_witness(P, p)
    band = backend.decision_band
    if mn > band:
        return _ABOVE, None
    if mx < -band:
        return _BELOW, None
    if mn < -band and mx > band:
        return _HIT, _find_witness(P, p)
    # Everything sits inside the decision band.  The one case that can
    # still be certified is F^q collapsing to the rigid shift by p.
    Pc = canonicalize(P)
    if Pc.is_rigid and abs(Pc.rigid_shift - p) <= backend.eps_x:
        return _HIT, Pc.breaks[0]
    return _UNDECIDED, None


def _checked_exact(f: PwlLift, P: PwlLift, p: int, q: int, witness) -> RotationResult:
    if witness is None:
        raise errors.InternalMismatch(
            "sign data certified rho = %d/%d but no periodic witness was found" % (p, q)
        )
    resid = P(witness) - witness - p
    backend = f.backend
    ok = resid == 0 if isinstance(backend, RationalBackend) else abs(resid) <= 10 * backend.eps_x
    if not ok:
        raise errors.InternalMismatch(
            "periodic witness failed verification: residual %s at x=%s" % (resid, witness)
        )
    return RotationResult.exact(p, q, witness)


def exact_rotation(f: PwlLift, q_max: int = 10_000, cap: int = DEFAULT_PIECE_CAP) -> RotationResult:
    """Stern-Brocot search for an exact rational rotation number.

    Starting from the integer interval ``[floor(F(0)), floor(F(0)) + 1]``,
    repeatedly test the mediant ``p/q``.  The powers behind the current
    interval ends are cached, so each step costs one composition.  Returns
    an exact result with witness, or the tightest Farey enclosure reached
    when ``q_max`` is exhausted or a float sign test refuses to decide.
    """
    backend = f.backend
    zero = backend.coerce(0)
    k0 = math.floor(f(zero))

    status, witness = _classify(f, k0)
    if status == _HIT:
        return _checked_exact(f, f, k0, 1, witness)
    if status == _UNDECIDED or status == _BELOW:
        return RotationResult.enclosure(Fraction(k0), Fraction(k0 + 1))

    status, witness = _classify(f, k0 + 1)
    if status == _HIT:
        return _checked_exact(f, f, k0 + 1, 1, witness)
    if status != _BELOW:
        return RotationResult.enclosure(Fraction(k0), Fraction(k0 + 1))

    pl, ql, Pl = k0, 1, f
    pr, qr, Pr = k0 + 1, 1, f
    while True:
        p, q = pl + pr, ql + qr
        if q > q_max:
            return RotationResult.enclosure(Fraction(pl, ql), Fraction(pr, qr))
        P = compose(Pl, Pr, cap)  # F^{ql} o F^{qr} = F^q
        status, witness = _classify(P, p)
        if status == _HIT:
            return _checked_exact(f, P, p, q, witness)
        if status == _ABOVE:
            pl, ql, Pl = p, q, P
        elif status == _BELOW:
            pr, qr, Pr = p, q, P
        else:
            return RotationResult.enclosure(Fraction(pl, ql), Fraction(pr, qr))


@dataclass(frozen=True)
class PeriodicPoint:
    """A solution of ``F^q(x) = x + p`` with one-sided slopes of ``F^q``."""

    x: Num
    left_slope: Num
    right_slope: Num

    @property
    def stability(self) -> str:
        lo = min(self.left_slope, self.right_slope)
        hi = max(self.left_slope, self.right_slope)
        if hi < 1:
            return "attracting"
        if lo > 1:
            return "repelling"
        if lo == 1 and hi == 1:
            return "neutral"
        return "mixed"


@dataclass(frozen=True)
class PeriodicScan:
    """All (p, q)-periodic points, plus any whole intervals of them.

    ``identity_intervals`` lists the maximal arcs on which ``F^q = x + p``
    holds identically (the whole circle ``[0, 1)`` when the map is
    conjugate); isolated roots land in ``points``.
    """

    p: int
    q: int
    points: tuple
    identity_intervals: tuple

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "points": [
                {
                    "x": _scalar_json(pt.x),
                    "left_slope": _scalar_json(pt.left_slope),
                    "right_slope": _scalar_json(pt.right_slope),
                    "stability": pt.stability,
                }
                for pt in self.points
            ],
            "identity_intervals": [
                [_scalar_json(a), _scalar_json(b)] for (a, b) in self.identity_intervals
            ],
        }


def periodic_points(f: PwlLift, p: int, q: int, cap: int = DEFAULT_PIECE_CAP) -> PeriodicScan:
    """Solve ``F^q(x) = x + p`` piece by piece on the explicit lift of F^q.

    Each affine piece contributes at most one isolated root, found by a
    one-line solve; pieces with slope 1 are either disjoint from the
    solution set or consist entirely of it.
    """
    P = power(f, q, cap)
    backend = P.backend
    is_float = isinstance(backend, FloatBackend)
    one = backend.coerce(1)

    roots = []  # (x, piece_index, at_left_edge)
    intervals = []
    n = P.n
    for k in range(n):
        b_left = P.breaks[k]
        b_right = P.breaks[k + 1] if k + 1 < n else P.breaks[0] + 1
        s = P.slopes[k]
        e_left = P(b_left) - b_left - p
        slope_is_one = backend.eq_slope(s, one)
        if slope_is_one:
            flat = abs(e_left) <= backend.eps_x if is_float else e_left == 0
            if flat:
                intervals.append((b_left, b_right))
            continue
        x = b_left + e_left / (one - s)
        tol = backend.eps_x if is_float else 0
        if b_left - tol <= x < b_right:
            if x < b_left:
                x = b_left
            at_edge = backend.eq_point(x, b_left)
            roots.append((frac(x) if x >= 1 else x, k, at_edge))

    # Merge identity intervals that share an endpoint, including the wrap.
    if len(intervals) == n:
        intervals = [(backend.coerce(0), backend.coerce(1))]
    elif intervals:
        merged = [list(intervals[0])]
        for a, b in intervals[1:]:
            if backend.eq_point(a, merged[-1][1]):
                merged[-1][1] = b
            else:
                merged.append([a, b])
        if len(merged) > 1 and backend.eq_point(merged[0][0] + 1, merged[-1][1]):
            merged[0][0] = merged[-1][0] - 1
            merged.pop()
        intervals = [tuple(iv) for iv in merged]

    pts = []
    seen = []
    for x, k, at_edge in sorted(roots):
        if seen and backend.eq_point(x, seen[-1]):
            continue
        if seen and backend.eq_point(x, seen[0] + 1):
            continue
        seen.append(x)
        left = P.slopes[k - 1] if at_edge else P.slopes[k]
        pts.append(PeriodicPoint(x=x, left_slope=left, right_slope=P.slopes[k]))
    return PeriodicScan(p=p, q=q, points=tuple(pts), identity_intervals=tuple(intervals))


@dataclass(frozen=True)
class ModeLockInterval:
    """Parameter interval on which the family locks onto ``rho = p/q``.

    ``lo``/``hi`` are located to within ``tol`` by bisection; the
    certificates record the sign data of ``min/max E`` that pinned each
    edge down.
    """

    p: int
    q: int
    lo: Num
    hi: Num
    tol: Num
    certificates: dict

    @property
    def width(self):
        return self.hi - self.lo

    def to_json(self) -> dict:
        def cert_json(c):
            return {
                "which": c["which"],
                "bracket": [_scalar_json(c["bracket"][0]), _scalar_json(c["bracket"][1])],
                "values": [_scalar_json(c["values"][0]), _scalar_json(c["values"][1])],
            }

        return {
            "p": self.p,
            "q": self.q,
            "lo": _scalar_json(self.lo),
            "hi": _scalar_json(self.hi),
            "tol": _scalar_json(self.tol),
            "width": _scalar_json(self.width),
            "certificates": {k: cert_json(v) for k, v in self.certificates.items()},
        }


def _as_lift_fn(family) -> Callable:
    if hasattr(family, "lift"):
        return family.lift
    if callable(family):
        return family
    raise TypeError("need a family (object with .lift) or a callable mu -> PwlLift")


def _bisect_root(g: Callable, a, b, tol):
    """Locate the sign change of ``g`` on [a, b] to within ``tol``.

    Returns ``(left, right, g_left0, g_right0)`` where [left, right] is the
    final bracket.  Raises NotBracketed when the endpoint signs agree.
    """
    ga = g(a)
    gb = g(b)
    if not ((ga > 0 > gb) or (ga < 0 < gb)):
        raise errors.NotBracketed(
            "no sign change on [%s, %s]: endpoint values %s and %s" % (a, b, ga, gb)
        )
    ga0, gb0 = ga, gb
    left, right = a, b
    while right - left > tol:
        mid = (left + right) / 2
        gm = g(mid)
        if gm == 0:
            # Landing exactly on the transition: shrink symmetrically.
            left = mid
            right = mid
            break
        if (gm > 0) == (ga > 0):
            left = mid
            ga = gm
        else:
            right = mid
    return left, right, ga0, gb0


def mode_lock_interval(
    family,
    p: int,
    q: int,
    bracket: Tuple,
    tol=None,
    cap: int = DEFAULT_PIECE_CAP,
) -> ModeLockInterval:
    """Measure the locked interval ``{mu : rho(F_mu) = p/q}`` in a bracket.

    The family must cross ``p/q`` monotonically inside the bracket (either
    orientation).  The lower and upper edges are the zeros of
    ``max_x E_mu`` and ``min_x E_mu`` with ``E_mu = F_mu^q - x - p``; each
    is bisected independently, so a width-zero interval (a conjugacy
    pinch) comes out as ``lo == hi`` up to ``tol`` instead of being missed.

    Raises:
        NotBracketed: an edge's sign function does not change over the
            bracket (the locked set touches or lies outside the bracket).
    """
    lift_fn = _as_lift_fn(family)
    a, b = bracket
    probe = lift_fn(a)
    backend = probe.backend
    a = backend.coerce(a)
    b = backend.coerce(b)
    if tol is None:
        tol = Fraction(1, 10**10) if isinstance(backend, RationalBackend) else 1e-10
    elif isinstance(backend, RationalBackend) and not isinstance(tol, Fraction):
        tol = Fraction(tol)

    def stats(mu):
        P = power(lift_fn(mu), q, cap)
        vals = _edge_values(P, p)
        return min(vals), max(vals)

    def g_min(mu):
        return stats(mu)[0]

    def g_max(mu):
        return stats(mu)[1]

    lo_l, lo_r, ga, gb = _bisect_root(g_max, a, b, tol)
    hi_l, hi_r, ha, hb = _bisect_root(g_min, a, b, tol)
    edge_max = (lo_l + lo_r) / 2
    edge_min = (hi_l + hi_r) / 2
    lo, hi = (edge_max, edge_min) if edge_max <= edge_min else (edge_min, edge_max)
    certificates = {
        "lo": {"which": "max", "bracket": (lo_l, lo_r), "values": (ga, gb)},
        "hi": {"which": "min", "bracket": (hi_l, hi_r), "values": (ha, hb)},
    }
    if edge_max > edge_min:
        certificates = {
            "lo": {"which": "min", "bracket": (hi_l, hi_r), "values": (ha, hb)},
            "hi": {"which": "max", "bracket": (lo_l, lo_r), "values": (ga, gb)},
        }
    return ModeLockInterval(p=p, q=q, lo=lo, hi=hi, tol=tol, certificates=certificates)
