"""Piecewise-linear lifts of orientation-preserving circle homeomorphisms.

A lift ``F`` is stored by its marked points: break positions
``b_1 < ... < b_n`` in [0, 1) together with the values ``phi_k = F(b_k)``.
Degree one closes the data cyclically, ``b_{n+1} = b_1 + 1`` and
``phi_{n+1} = phi_1 + 1``, which determines the slopes

    s_k = (phi_{k+1} - phi_k) / (b_{k+1} - b_k),   k = 1..n,

all of which must be positive for ``F`` to be a homeomorphism lift.  A
marked point is a *genuine* break when the adjacent slopes differ; marked
points with equal slopes are legal (composition produces them) and are
removed by :func:`canonicalize`.

Everything here is generic over the two scalar backends: exact rationals
and tolerance-governed floats.  ``F(x + 1) = F(x) + 1`` holds exactly in
the exact backend and to rounding in the float backend.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import errors
from .backend import (
    FLOAT,
    RATIONAL,
    Backend,
    FloatBackend,
    Num,
    backend_from_tag,
    infer_backend,
)

#: Default cap on marked points produced by compose/power.
DEFAULT_PIECE_CAP = 10**6


@dataclass(frozen=True)
class PwlLift:
    """Immutable PWL lift; build instances through :func:`make_lift`."""

    breaks: tuple
    values: tuple
    slopes: tuple
    backend: Backend

    @property
    def n(self) -> int:
        return len(self.breaks)

    def __call__(self, x) -> Num:
        """Evaluate the lift at any real ``x`` (degree-one extension)."""
        x = self.backend.coerce(x)
        w = math.floor(x)
        r = x - w
        if r >= 1:  # float rounding can push x - floor(x) up to 1.0
            r -= 1
            w += 1
        if r < self.breaks[0]:
            return (self.values[-1] - 1) + self.slopes[-1] * (r - (self.breaks[-1] - 1)) + w
        k = bisect_right(self.breaks, r) - 1
        return self.values[k] + self.slopes[k] * (r - self.breaks[k]) + w

    def inverse(self, y) -> Num:
        """Evaluate the inverse lift at ``y``.

        The inverse of a degree-one increasing PWL lift is again one; this
        solves the affine piece containing ``y`` directly.
        """
        y = self.backend.coerce(y)
        w = math.floor(y - self.values[0])
        r = y - w  # in [values[0], values[0] + 1) up to rounding
        if r < self.values[0]:
            r += 1
            w -= 1
        k = bisect_right(self.values, r) - 1
        if k >= self.n:  # r == values[0] + 1 after a rounding nudge
            k = self.n - 1
        return self.breaks[k] + (r - self.values[k]) / self.slopes[k] + w

    def circle(self, x) -> Num:
        """The underlying circle map: fractional part of ``F(x)``."""
        return frac(self(x))

    @property
    def is_rigid(self) -> bool:
        """True when a single marked point remains: ``F(x) = x + shift``.

        With one marked point the cyclic closure forces slope 1 exactly,
        so the lift is a rigid rotation.
        """
        return self.n == 1

    @property
    def rigid_shift(self) -> Optional[Num]:
        return self.values[0] - self.breaks[0] if self.is_rigid else None

    def genuine_break_indices(self) -> list:
        """Indices whose one-sided slopes actually differ."""
        eq = self.backend.eq_slope
        return [k for k in range(self.n) if not eq(self.slopes[k], self.slopes[k - 1])]

    def to_float(self, backend: Optional[FloatBackend] = None) -> "PwlLift":
        """Float-backend copy (used for kernel iteration and reporting)."""
        target = backend or FLOAT
        if isinstance(self.backend, FloatBackend):
            if backend is None or backend == self.backend:
                return self
        return make_lift(
            [float(b) for b in self.breaks],
            [float(v) for v in self.values],
            backend=target,
        )

    def to_json(self) -> dict:
        enc = self.backend.scalar_to_json
        return {
            "breaks": [enc(b) for b in self.breaks],
            "values": [enc(v) for v in self.values],
            "backend": self.backend.tag,
        }


def frac(x) -> Num:
    """Fractional part in [0, 1), exact for Fractions."""
    r = x - math.floor(x)
    if r >= 1:  # float rounding at the top end
        r -= 1
    return r


def make_lift(breaks: Sequence, values: Sequence, backend: Optional[Backend] = None) -> PwlLift:
    """Validate marked-point data and build a lift.

    Args:
        breaks: positions in [0, 1), strictly increasing.
        values: ``F(break_k)`` for each break, strictly increasing with
            ``values[-1] < values[0] + 1`` so all slopes are positive.
        backend: explicit backend; inferred from the data when omitted
            (any float anywhere selects the float backend).

    Raises:
        EmptyInput: no marked points.
        NonMonotone: ordering or slope-sign violations.
        BackendMismatch: float data handed to the rational backend.
    """
    if len(breaks) == 0 or len(values) == 0:
        raise errors.EmptyInput("a lift needs at least one marked point")
    if len(breaks) != len(values):
        raise errors.NonMonotone(
            "breaks and values must pair up (%d vs %d)" % (len(breaks), len(values))
        )
    if backend is None:
        backend = infer_backend(list(breaks) + list(values))
    b = tuple(backend.coerce(x) for x in breaks)
    v = tuple(backend.coerce(x) for x in values)
    if not (0 <= b[0]):
        raise errors.NonMonotone("first break %s must lie in [0, 1)" % (b[0],))
    if not (b[-1] < 1):
        raise errors.NonMonotone("breaks must lie in [0, 1); got %s" % (b[-1],))
    for i in range(1, len(b)):
        if not (b[i - 1] < b[i]):
            raise errors.NonMonotone("breaks not strictly increasing at index %d" % i)
    n = len(b)
    slopes = []
    for k in range(n):
        b_next = b[k + 1] if k + 1 < n else b[0] + 1
        v_next = v[k + 1] if k + 1 < n else v[0] + 1
        rise = v_next - v[k]
        run = b_next - b[k]
        if not (rise > 0):
            raise errors.NonMonotone(
                "values must increase strictly around the cycle (piece %d)" % k
            )
        slopes.append(rise / run)
    return PwlLift(breaks=b, values=v, slopes=tuple(slopes), backend=backend)


def lift_from_json(obj: dict) -> PwlLift:
    backend = backend_from_tag(obj["backend"])
    dec = backend.scalar_from_json
    return make_lift([dec(x) for x in obj["breaks"]], [dec(x) for x in obj["values"]], backend)


def rigid(shift, backend: Optional[Backend] = None) -> PwlLift:
    """The rigid rotation lift ``x + shift`` with one marked point at 0."""
    if backend is None:
        backend = infer_backend([shift])
    zero = backend.coerce(0)
    return make_lift([zero], [backend.coerce(shift)], backend)


def _dedup_circle_points(points, backend: Backend) -> list:
    """Sort points of [0, 1) and collapse duplicates.

    Float backend: points within ``eps_x`` cluster to their first member,
    including the wrap pair near 0 and 1.
    """
    pts = sorted(points)
    if isinstance(backend, FloatBackend):
        eps = backend.eps_x
        out = [pts[0]]
        for x in pts[1:]:
            if x - out[-1] > eps:
                out.append(x)
        if len(out) > 1 and (out[0] + 1) - out[-1] <= eps:
            out.pop()
        return out
    out = [pts[0]]
    for x in pts[1:]:
        if x != out[-1]:
            out.append(x)
    if len(out) > 1 and out[0] + 1 == out[-1]:
        out.pop()
    return out


def compose(outer: PwlLift, inner: PwlLift, cap: int = DEFAULT_PIECE_CAP) -> PwlLift:
    """The lift of ``outer o inner``.

    Marked points of the result are the marked points of ``inner``
    together with inner-preimages of the marked points of ``outer``; the
    value at each is ``outer(inner(x))``.  That set refines the true break
    set, so the affine interpolation through it reproduces the composition
    exactly.
    """
    if outer.backend.tag != inner.backend.tag:
        raise errors.BackendMismatch(
            "cannot compose %s-backend with %s-backend lifts"
            % (outer.backend.tag, inner.backend.tag)
        )
    candidates = list(inner.breaks)
    candidates.extend(frac(inner.inverse(b)) for b in outer.breaks)
    marked = _dedup_circle_points(candidates, inner.backend)
    if len(marked) > cap:
        raise errors.Overflow(
            "composition would carry %d marked points (cap %d)" % (len(marked), cap)
        )
    values = [outer(inner(x)) for x in marked]
    return make_lift(marked, values, inner.backend)


def power(f: PwlLift, k: int, cap: int = DEFAULT_PIECE_CAP) -> PwlLift:
    """Explicit lift of the k-th iterate, by repeated squaring.

    Powers of the same map commute, so the square-and-multiply order does
    not matter.  Marked-point counts grow at most linearly in ``k``; the
    cap bounds them and raises :class:`errors.Overflow` beyond.
    """
    if k < 1:
        raise ValueError("power wants k >= 1, got %d" % k)
    result = None
    base = f
    while True:
        if k & 1:
            result = base if result is None else compose(result, base, cap)
        k >>= 1
        if not k:
            return result
        base = compose(base, base, cap)


def invert(f: PwlLift) -> PwlLift:
    """Explicit lift of the inverse map.

    Marked points are the fractional parts of the values of ``f``; the
    value over such a point is the corresponding break, shifted by the
    winding lost when reducing mod 1.
    """
    pairs = []
    for b, v in zip(f.breaks, f.values):
        w = math.floor(v)
        r = v - w
        if r >= 1:
            r -= 1
            w += 1
        pairs.append((r, b - w))
    pairs.sort()
    return make_lift([p[0] for p in pairs], [p[1] for p in pairs], f.backend)


def canonicalize(f: PwlLift) -> PwlLift:
    """Drop marked points whose one-sided slopes agree.

    Runs to a fixed point, so the result is idempotent under repeated
    calls even in the float backend (where merging pieces re-averages
    slopes and can expose further coincidences).  A lift with no genuine
    break reduces to the rigid rotation through its first marked point.
    """
    current = f
    while True:
        keep = current.genuine_break_indices()
        if not keep:
            reduced = make_lift([current.breaks[0]], [current.values[0]], current.backend)
            return reduced
        if len(keep) == current.n:
            return current
        current = make_lift(
            [current.breaks[i] for i in keep],
            [current.values[i] for i in keep],
            current.backend,
        )


def jump(f: PwlLift, i: int) -> Num:
    """Jump ratio at break ``i``: right slope over left slope.

    The left slope at ``b_i`` is ``s_{i-1}`` (cyclically), the right slope
    is ``s_i``.  Raises :class:`errors.NotABreak` when they coincide under
    the backend's slope tolerance.
    """
    if not (0 <= i < f.n):
        raise IndexError("break index %d out of range" % i)
    left = f.slopes[i - 1]
    right = f.slopes[i]
    if f.backend.eq_slope(left, right):
        raise errors.NotABreak("marked point %d has equal one-sided slopes" % i)
    return right / left


def jump_product(f: PwlLift, indices: Optional[Sequence[int]] = None) -> Num:
    """Product of jump ratios over ``indices`` (default: all genuine breaks).

    Over all genuine breaks the product telescopes to exactly 1 in the
    exact backend; subsets with product 1 are the trivial cancellations.
    """
    if indices is None:
        indices = f.genuine_break_indices()
    one = f.backend.coerce(1)
    prod = one
    for i in indices:
        prod = prod * (f.slopes[i] / f.slopes[i - 1])
    return prod


def sup_difference(f: PwlLift, g: PwlLift) -> Num:
    """sup over the circle of ``|f(x) - g(x)|`` for two lifts.

    The difference is PWL with kinks only at the union of the two marked
    sets, so the supremum is attained there.
    """
    pts = set(f.breaks) | set(g.breaks)
    best = None
    for x in pts:
        d = abs(f(x) - g(x))
        if best is None or d > best:
            best = d
    return best
