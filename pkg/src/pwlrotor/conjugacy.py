"""Conjugacy of PWL circle maps to rigid rational rotations.

The criterion driving everything here: a PWL circle homeomorphism with
rotation number ``p/q`` is conjugate to the rigid rotation by ``p/q``
through a PWL change of coordinates exactly when every genuine break
point lies on a periodic orbit — equivalently, when ``F^q = x + p``
identically.  Two independent certificates are therefore available (break
orbits closing; the explicit ``F^q`` canonicalizing to a rigid shift),
and :func:`is_conjugate_to_rigid` insists they agree.

When the test passes, the break orbits partition the break set into
``K <= n/2`` classes, each carrying at least two breaks and a jump-ratio
product of 1 (the trivial cancellations); :func:`build_conjugacy`
constructs the conjugacy ``h`` itself, affine from the base arc onto
``[0, 1/q]`` and propagated by ``h(f(x)) = h(x) + p/q``, and
:func:`invariant_density` produces the piecewise-constant density of the
absolutely continuous invariant measure by averaging the ``q`` push-
forwards of Lebesgue measure.

For maps that are *not* conjugate, the growth diagnostics expose the
failure quantitatively: break counts of the iterates stay bounded by
``q*K`` in the conjugate case but grow without bound otherwise, and the
one-sided derivatives ``(F^{qm})'`` blow up geometrically at periodic
points with a slope above 1.
"""
from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from . import errors
from .backend import FloatBackend, Num, RationalBackend
from .lift import (
    DEFAULT_PIECE_CAP,
    PwlLift,
    canonicalize,
    compose,
    frac,
    invert,
    jump,
    make_lift,
    power,
)
from .rotation import RotationResult, exact_rotation

#: Default absolute tolerance for orbit-closure tests in the float backend.
ORBIT_TOL = 1e-9


def _circle_dist(a, b):
    d = abs(a - b)
    return d if d <= Fraction(1, 2) else 1 - d


def _scalar_json(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


@dataclass(frozen=True)
class OrbitPoint:
    x: Num
    is_break: bool
    break_index: Optional[int]
    orbit: int


@dataclass(frozen=True)
class NotPeriodic:
    """Evidence that a break orbit fails to close after ``q`` steps."""

    break_index: int
    point: Num
    drift: Num
    q: int

    def to_json(self) -> dict:
        return {
            "break_index": self.break_index,
            "point": _scalar_json(self.point),
            "drift": _scalar_json(self.drift),
            "q": self.q,
        }


@dataclass(frozen=True)
class OrbitPartition:
    """Break points grouped by shared periodic orbit.

    ``orbits`` lists, per orbit class, the indices of the genuine breaks
    of ``f`` riding on it; ``points`` enumerates all ``q * K`` orbit
    points in circle order, marking which are breaks.
    """

    p: int
    q: int
    orbits: tuple
    points: tuple

    @property
    def K(self) -> int:
        return len(self.orbits)

    def landmarks(self) -> list:
        return [pt.x for pt in self.points]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "orbits": [list(o) for o in self.orbits],
            "points": [
                {
                    "x": _scalar_json(pt.x),
                    "is_break": pt.is_break,
                    "break_index": pt.break_index,
                    "orbit": pt.orbit,
                }
                for pt in self.points
            ],
        }


def _orbit_points(f: PwlLift, x0, q: int) -> list:
    pts = [x0]
    x = x0
    for _ in range(q - 1):
        x = frac(f(x))
        pts.append(x)
    return pts


def break_orbit_partition(
    f: PwlLift,
    q_hint: Optional[Tuple[int, int]] = None,
    q_cap: int = 64,
    orbit_tol: float = ORBIT_TOL,
    cap: int = DEFAULT_PIECE_CAP,
) -> Union[OrbitPartition, NotPeriodic]:
    """Partition the genuine breaks of ``f`` by periodic orbit.

    ``q_hint`` may supply ``(p, q)`` directly; otherwise the rotation
    number is certified by :func:`exact_rotation` first, raising
    :class:`errors.RotationIrrational` when no rational value is found
    within ``q_cap``.  Returns :class:`NotPeriodic` evidence (first break
    whose orbit misses itself, with its drift) instead of a partition as
    soon as any orbit fails to close.
    """
    if q_hint is not None:
        p, q = q_hint
    else:
        rr = exact_rotation(f, q_max=q_cap, cap=cap)
        if rr.kind != "exact":
            raise errors.RotationIrrational(
                "rotation number not certified rational within q <= %d: [%s, %s]"
                % (q_cap, rr.lo, rr.hi)
            )
        p, q = rr.p, rr.q

    backend = f.backend
    is_float = isinstance(backend, FloatBackend)
    tol = orbit_tol if is_float else 0
    genuine = f.genuine_break_indices()
    if not genuine:
        return OrbitPartition(p=p, q=q, orbits=(), points=())

    orbit_of: dict = {}
    orbit_pts: List[list] = []
    for i in genuine:
        b = f.breaks[i]
        pts = _orbit_points(f, b, q)
        closure = frac(f(pts[-1]))
        drift = _circle_dist(closure, b)
        if (is_float and drift > tol) or (not is_float and drift != 0):
            signed = closure - b
            if signed > Fraction(1, 2):
                signed -= 1
            elif signed < -Fraction(1, 2):
                signed += 1
            return NotPeriodic(break_index=i, point=b, drift=signed, q=q)
        placed = False
        for r, existing in enumerate(orbit_pts):
            if any(_circle_dist(b, x) <= tol for x in existing):
                orbit_of[i] = r
                placed = True
                break
        if not placed:
            orbit_of[i] = len(orbit_pts)
            orbit_pts.append(pts)

    orbits = []
    for r in range(len(orbit_pts)):
        orbits.append(tuple(i for i in genuine if orbit_of[i] == r))

    points = []
    for r, pts in enumerate(orbit_pts):
        for x in pts:
            brk = None
            for i in genuine:
                if _circle_dist(x, f.breaks[i]) <= tol:
                    brk = i
                    break
            points.append(OrbitPoint(x=x, is_break=brk is not None, break_index=brk, orbit=r))
    points.sort(key=lambda pt: pt.x)

    _check_well_ordered(f, orbit_pts, p, q, tol)
    return OrbitPartition(p=p, q=q, orbits=tuple(orbits), points=tuple(points))


def _check_well_ordered(f, orbit_pts, p, q, tol):
    """Each orbit must be combinatorially a rigid p/q orbit.

    Sorting an orbit and following one application of the map should
    advance the sorted position by exactly ``p`` mod ``q``.
    """
    for pts in orbit_pts:
        order = sorted(range(q), key=lambda j: pts[j])
        pos = {j: t for t, j in enumerate(order)}
        for j in range(q):
            nxt = (j + 1) % q
            if (pos[nxt] - pos[j]) % q != p % q:
                raise errors.InternalMismatch(
                    "orbit points are not well-ordered as a %d/%d rotation orbit" % (p, q)
                )


@dataclass(frozen=True)
class Conjugate:
    p: int
    q: int
    partition: OrbitPartition

    verdict = "conjugate"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "p": self.p,
            "q": self.q,
            "partition": self.partition.to_json(),
        }


@dataclass(frozen=True)
class NotConjugate:
    reason: str
    p: Optional[int] = None
    q: Optional[int] = None
    evidence: Optional[NotPeriodic] = None

    verdict = "not_conjugate"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "p": self.p,
            "q": self.q,
            "evidence": None if self.evidence is None else self.evidence.to_json(),
        }


@dataclass(frozen=True)
class Undecided:
    reason: str
    enclosure: Optional[RotationResult] = None

    verdict = "undecided"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "enclosure": None if self.enclosure is None else self.enclosure.to_json(),
        }


Verdict = Union[Conjugate, NotConjugate, Undecided]


def _rigid_power_check(f: PwlLift, p: int, q: int, cap: int) -> bool:
    """Does ``F^q`` canonicalize to the rigid shift by ``p``?"""
    P = canonicalize(power(f, q, cap))
    if not P.is_rigid:
        return False
    shift = P.rigid_shift
    if isinstance(f.backend, RationalBackend):
        return shift == p
    return abs(shift - p) <= f.backend.eps_x


def is_conjugate_to_rigid(
    f: PwlLift,
    q_cap: int = 64,
    orbit_tol: float = ORBIT_TOL,
    cap: int = DEFAULT_PIECE_CAP,
) -> Verdict:
    """Decide conjugacy to a rigid rational rotation, with cross-checks.

    Certifies the rotation number, then runs the break-orbit test and the
    ``F^q``-rigidity test independently; the two must agree or
    :class:`errors.InternalMismatch` is raised (a tolerance problem, not a
    mathematical possibility).
    """
    try:
        rr = exact_rotation(f, q_max=q_cap, cap=cap)
    except errors.Overflow:
        raise
    if rr.kind != "exact":
        return Undecided(
            reason="rotation number not certified rational within q <= %d" % q_cap,
            enclosure=rr,
        )
    p, q = rr.p, rr.q
    part = break_orbit_partition(f, q_hint=(p, q), orbit_tol=orbit_tol, cap=cap)
    rigid_ok = _rigid_power_check(f, p, q, cap)
    if isinstance(part, NotPeriodic):
        if rigid_ok:
            raise errors.InternalMismatch(
                "F^%d is a rigid shift but break %d drifts by %s; tolerances disagree"
                % (q, part.break_index, part.drift)
            )
        return NotConjugate(
            reason="break point %d is not periodic (drift %s after %d steps)"
            % (part.break_index, part.drift, q),
            p=p,
            q=q,
            evidence=part,
        )
    if not rigid_ok:
        raise errors.InternalMismatch(
            "all break orbits close but F^%d does not canonicalize to x + %d" % (q, p)
        )
    return Conjugate(p=p, q=q, partition=part)


@dataclass(frozen=True)
class CancellationCheck:
    """Jump-ratio products: per orbit class and over all breaks."""

    global_product: Num
    per_orbit: tuple

    def to_json(self) -> dict:
        return {
            "global_product": _scalar_json(self.global_product),
            "per_orbit": [_scalar_json(x) for x in self.per_orbit],
        }


def check_trivial_cancellations(f: PwlLift, partition: OrbitPartition) -> CancellationCheck:
    """Each orbit class must cancel its jumps: product of ratios = 1.

    Exact backend: literal equality holds (assert it upstream if wanted).
    Float backend: expect agreement to roughly ``n`` rounding errors.
    """
    one = f.backend.coerce(1)
    per = []
    for orbit in partition.orbits:
        prod = one
        for i in orbit:
            prod = prod * jump(f, i)
        per.append(prod)
    glob = one
    for i in f.genuine_break_indices():
        prod = f.slopes[i] / f.slopes[i - 1]
        glob = glob * prod
    return CancellationCheck(global_product=glob, per_orbit=tuple(per))


def build_conjugacy(
    f: PwlLift,
    partition: Optional[OrbitPartition] = None,
    q_cap: int = 64,
    cap: int = DEFAULT_PIECE_CAP,
) -> PwlLift:
    """Construct the PWL conjugacy ``h`` with ``h o f = r_{p/q} o h``.

    ``h`` is affine from the base arc ``[b_1, v]`` onto ``[0, 1/q]``
    (``v`` the successor of the first break ``b_1`` on its own orbit) and
    extended by the conjugacy equation, which pins ``h`` at every orbit
    point; between adjacent orbit points ``h`` is affine, so interpolating
    the landmark values reproduces it exactly.  Normalisation: ``h(b_1) = 0``.

    Raises :class:`errors.NotConjugateError` when the map is not conjugate.
    """
    if partition is None:
        got = break_orbit_partition(f, q_cap=q_cap, cap=cap)
        if isinstance(got, NotPeriodic):
            raise errors.NotConjugateError(
                "break %d is not periodic (drift %s)" % (got.break_index, got.drift)
            )
        partition = got
    elif isinstance(partition, NotPeriodic):
        raise errors.NotConjugateError(
            "break %d is not periodic (drift %s)" % (partition.break_index, partition.drift)
        )

    backend = f.backend
    zero = backend.coerce(0)
    if partition.K == 0:
        # No genuine breaks: f is already the rigid rotation.
        return make_lift([zero], [zero], backend)

    p, q = partition.p, partition.q
    shift = Fraction(p, q) if isinstance(backend, RationalBackend) else p / q
    unit = Fraction(1, q) if isinstance(backend, RationalBackend) else 1.0 / q

    b1 = f.breaks[partition.orbits[0][0]]
    base_orbit = _orbit_points(f, b1, q)
    pos_sorted = sorted(x if x >= b1 else x + 1 for x in base_orbit)
    v = pos_sorted[1] if q > 1 else b1 + 1
    arc_len = v - b1

    pairs = []  # (circle point, h value in [0,1) relative to H(b1)=0)
    for orbit in partition.orbits:
        rep = f.breaks[orbit[0]]
        pts = _orbit_points(f, rep, q)
        in_base = [x for x in pts if (x if x >= b1 else x + 1) < v]
        if len(in_base) != 1:
            raise errors.InternalMismatch(
                "expected exactly one point of each orbit in the base arc, got %d"
                % len(in_base)
            )
        u = in_base[0]
        upos = u if u >= b1 else u + 1
        t = (upos - b1) / arc_len * unit
        # walk the orbit from u, advancing h by p/q per step
        x = u
        val = t
        for _ in range(q):
            pairs.append((x, frac(val)))
            x = frac(f(x))
            val = val + shift

    # Convert H on [b1, b1+1) -> [0, 1) into a lift with breaks in [0, 1).
    marked = []
    for x, hval in pairs:
        if x >= b1:
            marked.append((x, hval))
        else:
            marked.append((x, hval - 1))
    marked.sort()
    h = make_lift([m[0] for m in marked], [m[1] for m in marked], backend)
    return h


@dataclass(frozen=True)
class PiecewiseConstantDensity:
    """A density on the circle, constant between cuts.

    ``values[j]`` is the density on ``[cuts[j], cuts[j+1])`` (cyclically);
    total mass is normalised to 1.
    """

    cuts: tuple
    values: tuple
    backend: object

    @property
    def n(self) -> int:
        return len(self.cuts)

    def __call__(self, x) -> Num:
        r = frac(self.backend.coerce(x))
        if r < self.cuts[0]:
            return self.values[-1]
        return self.values[bisect_right(self.cuts, r) - 1]

    def mass(self) -> Num:
        total = self.backend.coerce(0)
        for j in range(self.n):
            nxt = self.cuts[j + 1] if j + 1 < self.n else self.cuts[0] + 1
            total += self.values[j] * (nxt - self.cuts[j])
        return total

    def cdf_lift(self) -> PwlLift:
        """The cumulative distribution as a degree-one lift.

        Mass 1 makes ``Phi(x + 1) = Phi(x) + 1``; arc measures are then
        ``Phi(v) - Phi(u)`` with wraparound handled by the lift itself.
        """
        acc = self.backend.coerce(0)
        vals = [acc]
        for j in range(self.n - 1):
            acc = acc + self.values[j] * (self.cuts[j + 1] - self.cuts[j])
            vals.append(acc)
        return make_lift(list(self.cuts), vals, self.backend)

    def to_json(self) -> dict:
        return {
            "cuts": [_scalar_json(c) for c in self.cuts],
            "densities": [_scalar_json(v) for v in self.values],
            "backend": self.backend.tag,
        }

    def to_csv_rows(self) -> list:
        return [(float(c), float(v)) for c, v in zip(self.cuts, self.values)]


def invariant_density(
    f: PwlLift,
    q: Optional[int] = None,
    q_cap: int = 64,
    cap: int = DEFAULT_PIECE_CAP,
) -> PiecewiseConstantDensity:
    """Density of the absolutely continuous invariant probability measure.

    For a map with ``f^q = id`` the measure ``(1/q) sum_k f_*^k (Lebesgue)``
    is invariant; each push-forward has density ``(F^{-k})'``, read off the
    inverse lift piece by piece.  The averaged density is exact in the
    exact backend (all Fractions) and is returned with merged equal pieces.
    """
    if q is None:
        rr = exact_rotation(f, q_max=q_cap, cap=cap)
        if rr.kind != "exact":
            raise errors.RotationIrrational(
                "invariant_density needs a rational rotation number (got enclosure)"
            )
        q = rr.q
    backend = f.backend
    zero = backend.coerce(0)
    one = backend.coerce(1)

    layers = []  # (cuts, values) of each pushforward density
    P = None
    for k in range(q):
        if k == 0:
            layers.append(((zero,), (one,)))
            continue
        P = f if P is None else compose(P, f, cap)
        inv = invert(P)
        layers.append((inv.breaks, inv.slopes))

    # The averaged measure is invariant precisely when f^q is the identity
    # on the circle; refuse to hand back a non-invariant "density".
    full = f if P is None else compose(P, f, cap)
    if not canonicalize(full).is_rigid:
        raise errors.NotConjugateError(
            "f^%d is not a rigid shift, so the %d-step average is not invariant" % (q, q)
        )

    all_cuts = set()
    for cuts, _ in layers:
        all_cuts.update(cuts)
    cuts = sorted(all_cuts)
    if isinstance(backend, FloatBackend):
        eps = backend.eps_x
        merged_cuts = [cuts[0]]
        for c in cuts[1:]:
            if c - merged_cuts[-1] > eps:
                merged_cuts.append(c)
        if len(merged_cuts) > 1 and (merged_cuts[0] + 1) - merged_cuts[-1] <= eps:
            merged_cuts.pop()
        cuts = merged_cuts

    def layer_at(layer, x):
        lcuts, lvals = layer
        if x < lcuts[0]:
            return lvals[-1]
        return lvals[bisect_right(lcuts, x) - 1]

    qs = backend.coerce(q)
    values = []
    for j, c in enumerate(cuts):
        nxt = cuts[j + 1] if j + 1 < len(cuts) else cuts[0] + 1
        mid = frac((c + nxt) / 2)
        values.append(sum(layer_at(layer, mid) for layer in layers) / qs)

    # Merge adjacent pieces whose densities agree.
    keep = [
        j
        for j in range(len(cuts))
        if not backend.eq_slope(values[j], values[j - 1])
    ]
    if keep:
        cuts = [cuts[j] for j in keep]
        values = [values[j] for j in keep]
    else:
        cuts, values = [cuts[0]], [values[0]]

    dens = PiecewiseConstantDensity(cuts=tuple(cuts), values=tuple(values), backend=backend)
    total = dens.mass()
    ok = total == 1 if isinstance(backend, RationalBackend) else abs(total - 1) <= 1e-12
    if not ok:
        raise errors.InternalMismatch("invariant density mass came out as %s" % (total,))
    return dens


def verify_invariance(
    f: PwlLift,
    density: Optional[PiecewiseConstantDensity] = None,
    trials: int = 64,
    seed: int = 0,
    q: Optional[int] = None,
) -> Num:
    """Max discrepancy ``|nu(A) - nu(f^{-1} A)]|`` over random arcs ``A``.

    Exact backend: the discrepancy is exactly zero for a correct density.
    Float backend: expect a few units of rounding noise.
    """
    if density is None:
        density = invariant_density(f, q=q)
    phi = density.cdf_lift()
    backend = f.backend
    rng = random.Random(seed)
    worst = backend.coerce(0)
    denom = 10**6
    for _ in range(trials):
        if isinstance(backend, RationalBackend):
            u = Fraction(rng.randrange(denom), denom)
            v = Fraction(rng.randrange(denom), denom)
        else:
            u = rng.random()
            v = rng.random()
        if u == v:
            continue
        if u > v:
            u, v = v, u
        direct = phi(v) - phi(u)
        pulled = phi(f.inverse(v)) - phi(f.inverse(u))
        d = abs(direct - pulled)
        if d > worst:
            worst = d
    return worst


def _canonical_iterates(f: PwlLift, k_max: int, cap: int):
    P = None
    for _ in range(k_max):
        P = canonicalize(f if P is None else compose(P, f, cap))
        yield P


def break_count_growth(f: PwlLift, k_max: int, cap: int = DEFAULT_PIECE_CAP) -> list:
    """Genuine break counts of ``f^k`` for ``k = 1..k_max``.

    Bounded by ``q*K`` along conjugate maps; grows linearly otherwise.
    """
    counts = []
    for P in _canonical_iterates(f, k_max, cap):
        counts.append(0 if P.is_rigid else P.n)
    return counts


def derivative_growth(f: PwlLift, k_max: int, cap: int = DEFAULT_PIECE_CAP) -> list:
    """Maximal one-sided slope of ``F^k`` for ``k = 1..k_max``.

    Conjugate maps stay below ``max_slope**(q-1)``; locked non-conjugate
    maps grow geometrically (powers of ``(F^q)'`` at a periodic point).
    """
    out = []
    for P in _canonical_iterates(f, k_max, cap):
        out.append(max(P.slopes))
    return out
