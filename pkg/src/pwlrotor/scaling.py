"""Linear scaling of the rotation number at a conjugacy parameter.

At a parameter ``mu_c`` where the family is conjugate to the rigid
rotation by ``p/q``, the rotation number leaves ``p/q`` *linearly*:
``rho(mu_c + delta) = p/q + R1*delta + O(delta^2)``.  The coefficient has
a closed form.  The break orbits cut the circle into ``q*K`` laminar
segments on which ``F^q`` is affine with slope near 1; an orbit spends
``~ q*kappa_i/delta`` iterates crawling through segment ``i``, where
``kappa_i`` depends only on the segment length, the parameter-derivative
``A_i`` of ``F^q`` there, and the slope-derivative ``B_i``.  Summing the
passage times gives ``R1 = 1/(q * sum kappa_i)``, signed by the family
direction.

:func:`r1` assembles the whole report and cross-checks the closed form
against an independent finite-difference slope of the measured rotation
number; :func:`scaling_residual` measures the quadratic remainder and the
inverse symmetry ``G_{-mu} = G_mu^{-1} + O(mu^2)``; and
:func:`pinch_boundaries` traces how a mode-locked wedge in a second
parameter collapses onto such a conjugacy point.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import errors
from .backend import FLOAT, FloatBackend, Num, RationalBackend
from .conjugacy import (
    ORBIT_TOL,
    Conjugate,
    NotPeriodic,
    break_orbit_partition,
    is_conjugate_to_rigid,
)
from .families import FamilySpec, TwoParamFamilySpec, family_from_json, monotonicity_margin
from .lift import DEFAULT_PIECE_CAP, PwlLift, frac, invert, make_lift, power, sup_difference
from .rotation import birkhoff_enclosure, mode_lock_interval

log = logging.getLogger(__name__)

#: Below this value of |B|*gap/A the linear passage-time formula is used;
#: the log formula loses all its digits to cancellation there.
B_THRESHOLD = 1e-8

#: Default iterate count for empirical rotation-number slopes.
M_FIT = 10**7


def _scalar_json(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _float_spec(family: FamilySpec) -> FamilySpec:
    """A float-backend clone of ``family`` for long iteration runs."""
    if isinstance(family.backend, FloatBackend):
        return family
    return family_from_json(family.to_json(), backend=FLOAT)


def _slope_at(f: PwlLift, x) -> Num:
    """Slope of the piece containing the (interior) circle point ``x``."""
    r = frac(f.backend.coerce(x))
    if r < f.breaks[0]:
        return f.slopes[-1]
    from bisect import bisect_right

    return f.slopes[bisect_right(f.breaks, r) - 1]


def orbit_landmarks(
    f: PwlLift,
    q: Optional[int] = None,
    q_cap: int = 64,
    orbit_tol: float = ORBIT_TOL,
    cap: int = DEFAULT_PIECE_CAP,
) -> list:
    """Sorted union of the break-point orbits at a conjugacy parameter.

    Exactly ``q*K`` points for a map with ``K`` break orbits; for a rigid
    map (no breaks) the ``q``-point orbit of 0 serves instead.  Raises
    :class:`errors.NotConjugateError` when some break orbit fails to close.
    """
    part, landmarks = _landmarks(f, q_cap=q_cap, orbit_tol=orbit_tol, cap=cap)
    if q is not None and part.q != q:
        raise errors.InternalMismatch(
            "expected period %d but certified rotation number has q = %d" % (q, part.q)
        )
    return landmarks


def _landmarks(f, q_cap, orbit_tol, cap):
    part = break_orbit_partition(f, q_cap=q_cap, orbit_tol=orbit_tol, cap=cap)
    if isinstance(part, NotPeriodic):
        raise errors.NotConjugateError(
            "break %d is not periodic (drift %s after %d steps)"
            % (part.break_index, part.drift, part.q)
        )
    if part.K == 0:
        pts = [f.backend.coerce(0)]
        for _ in range(part.q - 1):
            pts.append(frac(f(pts[-1])))
        return part, sorted(pts)
    return part, part.landmarks()


def _slope_derivatives(f: PwlLift, db, dphi):
    """Per-piece ``d(slope)/dmu`` from the marked-point derivative tables."""
    n = f.n
    ds = []
    for k in range(n):
        if k + 1 < n:
            width = f.breaks[k + 1] - f.breaks[k]
            dnum = (dphi[k + 1] - dphi[k]) - f.slopes[k] * (db[k + 1] - db[k])
        else:
            width = f.breaks[0] + 1 - f.breaks[k]
            dnum = (dphi[0] - dphi[k]) - f.slopes[k] * (db[0] - db[k])
        ds.append(dnum / width)
    return tuple(ds)


def _piece_index(f: PwlLift, x) -> int:
    from bisect import bisect_right

    if x < f.breaks[0]:
        return f.n - 1
    return bisect_right(f.breaks, x) - 1


def _dF_dmu(f: PwlLift, ds, db, dphi, x):
    """Parameter-derivative of the lift at the circle point ``x``."""
    k = _piece_index(f, x)
    delta = x - f.breaks[k]
    if delta < 0:
        delta = delta + 1
    return dphi[k] + ds[k] * delta - f.slopes[k] * db[k]


def laminar_coeffs(
    family: FamilySpec,
    mu_c,
    q: Optional[int] = None,
    q_cap: int = 64,
    orbit_tol: float = ORBIT_TOL,
    cap: int = DEFAULT_PIECE_CAP,
) -> List[Tuple[Num, Num]]:
    """Per-segment ``(A_i, B_i)`` at the conjugacy parameter ``mu_c``.

    ``A_i`` is the parameter-derivative of ``F^q`` at the midpoint of gap
    ``i`` (chain rule over the composition); ``B_i`` is the parameter-
    derivative of the gap's ``F^q`` slope.  Both are corrected by the
    family direction so that ``A_i > 0`` on every segment.
    """
    mu_c = family.backend.coerce(mu_c)
    f = family.lift(mu_c)
    part, landmarks = _landmarks(f, q_cap=q_cap, orbit_tol=orbit_tol, cap=cap)
    if q is not None and part.q != q:
        raise errors.InternalMismatch(
            "expected period %d but certified rotation number has q = %d" % (q, part.q)
        )
    data = _segment_data(family, mu_c, f, landmarks, part.q)
    return list(zip(data["A"], data["B"]))


def _segment_data(family: FamilySpec, mu_c, f: PwlLift, landmarks, q: int) -> dict:
    backend = family.backend
    sigma = backend.coerce(family.direction_sign)
    db, dphi = family.derivatives(mu_c)
    if len(db) != f.n:
        raise errors.InternalMismatch(
            "derivative table has %d entries for an %d-piece lift" % (len(db), f.n)
        )
    ds = _slope_derivatives(f, db, dphi)

    if isinstance(backend, FloatBackend):
        col_tol = 1e-11 if family.analytic else 1e-9
    else:
        col_tol = 0
    two = backend.coerce(2)

    gaps, mids = [], []
    m = len(landmarks)
    for i in range(m):
        hi = landmarks[i + 1] if i + 1 < m else landmarks[0] + 1
        gap = hi - landmarks[i]
        if gap <= col_tol:
            raise errors.SegmentCollision(
                "landmarks %d and %d are only %s apart" % (i, (i + 1) % m, gap)
            )
        gaps.append(gap)
        mids.append(frac((landmarks[i] + hi) / two))

    A_list, B_list = [], []
    for y in mids:
        orbit = [y]
        for _ in range(q - 1):
            orbit.append(frac(f(orbit[-1])))
        # suffix products of the traversed slopes
        W = [backend.coerce(1)] * q
        for j in range(q - 2, -1, -1):
            W[j] = W[j + 1] * _slope_at(f, orbit[j + 1])
        A = backend.coerce(0)
        B = backend.coerce(0)
        for j in range(q):
            A = A + _dF_dmu(f, ds, db, dphi, orbit[j]) * W[j]
            k = _piece_index(f, orbit[j])
            B = B + ds[k] / f.slopes[k]
        A_list.append(sigma * A)
        B_list.append(sigma * B)
    return {
        "landmarks": list(landmarks),
        "gaps": gaps,
        "mids": mids,
        "A": A_list,
        "B": B_list,
        "sigma": family.direction_sign,
    }


def kappa(A, B, lo, hi, b_threshold: float = B_THRESHOLD) -> Num:
    """Passage-time coefficient of one laminar segment ``(lo, hi)``.

    ``kappa = gap/A`` when the slope perturbation ``B`` is negligible
    (``|B|*gap/A`` below ``b_threshold``), else ``log(1 + gap*B/A)/B``.
    The two branches agree to ~1e-8 relative at the threshold.
    """
    gap = hi - lo
    if gap <= 0:
        raise errors.SegmentCollision("segment (%s, %s) has no interior" % (lo, hi))
    if A <= 0:
        raise errors.LogDomain(
            "segment coefficient A = %s is not positive; the passage-time "
            "formula needs a transverse family" % (A,)
        )
    if abs(B) * gap / A < b_threshold:
        return gap / A
    arg = 1 + gap * B / A
    if arg <= 0:
        raise errors.LogDomain(
            "log argument 1 + gap*B/A = %s <= 0: F^q acquires a fixed point "
            "inside the segment" % (arg,)
        )
    return math.log(float(arg)) / float(B)


@dataclass(frozen=True)
class ScalingReport:
    """Everything behind one R1 value, closed-form and empirical."""

    mu_c: Num
    p: int
    q: int
    K: int
    direction: int
    landmarks: tuple
    A: tuple
    B: tuple
    S_sample: tuple
    sample_mu: float
    kappas: tuple
    R1: Num
    R1_emp: float
    fit_window: float
    fit_residual: float
    derivative_provenance: str
    transversality: Optional[Num]

    def kappa_total(self) -> Num:
        total = self.kappas[0]
        for k in self.kappas[1:]:
            total = total + k
        return total

    def to_json(self) -> dict:
        return {
            "mu_c": _scalar_json(self.mu_c),
            "p": self.p,
            "q": self.q,
            "K": self.K,
            "direction": self.direction,
            "landmarks": [_scalar_json(x) for x in self.landmarks],
            "A": [_scalar_json(x) for x in self.A],
            "B": [_scalar_json(x) for x in self.B],
            "S_sample": [_scalar_json(x) for x in self.S_sample],
            "sample_mu": self.sample_mu,
            "kappas": [_scalar_json(x) for x in self.kappas],
            "R1": _scalar_json(self.R1),
            "R1_emp": self.R1_emp,
            "fit_window": self.fit_window,
            "fit_residual": self.fit_residual,
            "derivative_provenance": self.derivative_provenance,
            "transversality": _scalar_json(self.transversality),
        }


def r1(
    family: FamilySpec,
    mu_c,
    h_fit: Optional[float] = None,
    m_fit: int = M_FIT,
    q_cap: int = 64,
    orbit_tol: float = ORBIT_TOL,
    cap: int = DEFAULT_PIECE_CAP,
) -> ScalingReport:
    """Scaling report at a conjugacy parameter: closed-form R1 + cross-check.

    The closed form runs entirely through the family's derivative tables
    (exact when the backend is rational); the empirical slope refits the
    measured rotation number at ``mu_c +- {1,2,4}*h_fit`` with long
    Birkhoff sums on a float clone of the family, an independent path.
    """
    backend = family.backend
    mu_c = backend.coerce(mu_c)
    f_c = family.lift(mu_c)
    verdict = is_conjugate_to_rigid(f_c, q_cap=q_cap, orbit_tol=orbit_tol, cap=cap)
    if not isinstance(verdict, Conjugate):
        raise errors.NotConjugateError(
            "scaling needs a conjugacy parameter; got %s: %s"
            % (verdict.verdict, verdict.reason)
        )
    p, q = verdict.p, verdict.q
    part, landmarks = _landmarks(f_c, q_cap=q_cap, orbit_tol=orbit_tol, cap=cap)
    data = _segment_data(family, mu_c, f_c, landmarks, q)
    sigma = data["sigma"]

    kappas = []
    m = len(landmarks)
    for i in range(m):
        hi = landmarks[i + 1] if i + 1 < m else landmarks[0] + 1
        kappas.append(kappa(data["A"][i], data["B"][i], landmarks[i], hi))
    total = kappas[0]
    for k in kappas[1:]:
        total = total + k
    if isinstance(total, Fraction):
        R1 = sigma / (q * total)
    else:
        R1 = sigma / (q * float(total))

    mu_f = float(mu_c)
    h = h_fit if h_fit is not None else 1e-4 * (1.0 + abs(mu_f))

    # Transversality at mu_c (informational: a zero margin means some break
    # moves exactly with its image; the closed form may still be fine).
    transversality = None
    try:
        if isinstance(backend, RationalBackend):
            span = Fraction(1, 10**4) * (1 + abs(mu_c))
        else:
            span = h
        mrep = monotonicity_margin(family, (mu_c - span, mu_c + span), grid=3, mu_c=mu_c)
        transversality = mrep.transversality
        if transversality is not None and transversality <= 0:
            log.warning(
                "transversality margin %s at mu_c = %s is not positive",
                transversality,
                mu_c,
            )
    except errors.PwlError as exc:
        log.warning("transversality check skipped: %s", exc)

    fam_f = _float_spec(family)
    sample_mu = mu_f + sigma * h
    f_s = fam_f.lift(sample_mu)
    P_s = power(f_s, q, cap)
    S_sample = tuple(_slope_at(P_s, float(y)) for y in data["mids"])

    deltas = [s * k * h for k in (1, 2, 4) for s in (1, -1)]
    deltas.sort()
    rhos = []
    for d in deltas:
        enc = birkhoff_enclosure(fam_f.lift(mu_f + d), m_fit)
        rhos.append(float(enc.midpoint))
    slope, icept = np.polyfit(np.asarray(deltas), np.asarray(rhos), 1)
    fit_residual = float(
        max(abs(r - (slope * d + icept)) for d, r in zip(deltas, rhos))
    )

    return ScalingReport(
        mu_c=mu_c,
        p=p,
        q=q,
        K=part.K,
        direction=sigma,
        landmarks=tuple(landmarks),
        A=tuple(data["A"]),
        B=tuple(data["B"]),
        S_sample=S_sample,
        sample_mu=sample_mu,
        kappas=tuple(kappas),
        R1=R1,
        R1_emp=float(slope),
        fit_window=h,
        fit_residual=fit_residual,
        derivative_provenance="analytic" if family.analytic else "numerical",
        transversality=transversality,
    )


@dataclass(frozen=True)
class ResidualReport:
    """Quadratic-remainder and inverse-symmetry estimates near ``mu_c``."""

    r2: float
    window: float
    n_samples: int
    symmetry_c: float
    p: int
    q: int
    R1: float

    def to_json(self) -> dict:
        return {
            "r2": self.r2,
            "window": self.window,
            "n_samples": self.n_samples,
            "symmetry_c": self.symmetry_c,
            "p": self.p,
            "q": self.q,
            "R1": self.R1,
        }


def scaling_residual(
    family: FamilySpec,
    mu_c,
    window: float = 1e-2,
    samples: int = 40,
    m: int = M_FIT,
    report: Optional[ScalingReport] = None,
    cap: int = DEFAULT_PIECE_CAP,
) -> ResidualReport:
    """Empirical ``R2``: max of ``|rho - p/q - R1*delta| / delta^2``.

    The remainder divided by delta^2 is bounded but oscillates at every
    scale (it inherits the staircase's self-similar wobble), so a stable
    estimate has to sample many offsets per window.  Offsets are
    log-spaced over ``[delta_floor, w]`` with a *window-independent*
    floor, the smallest offset at which the ``O(1/m)`` rotation-number
    measurement error stays below ~8% of delta^2; nesting the sample
    ranges this way is what makes the estimate comparable across windows.

    Also estimates the constant in the inverse symmetry
    ``|G_{-mu} - G_mu^{-1}| <= C mu^2``, measured away from the
    landmarks: within ``O(mu)`` of a break-orbit point the two return
    maps traverse a shifted break through mismatched pieces and their
    difference is genuinely first order there, so the sup is taken
    outside those strips (radius proportional to ``mu``).
    """
    if report is None:
        report = r1(family, mu_c, cap=cap)
    R1f = float(report.R1)
    p, q = report.p, report.q
    rho0 = p / q
    fam_f = _float_spec(family)
    mu_f = float(family.backend.coerce(mu_c))

    floor = math.sqrt(12.5 / m)
    if floor >= window / 2:
        log.warning(
            "window %g is close to the measurement floor %g; residual is noisy",
            window,
            floor,
        )
        floor = window / 2
    k = max(2, samples // 2)
    offsets = np.geomspace(floor, window, k)
    worst = 0.0
    for off in offsets:
        for d in (off, -off):
            enc = birkhoff_enclosure(fam_f.lift(mu_f + d), m)
            resid = abs(float(enc.midpoint) - rho0 - R1f * d) / (d * d)
            if resid > worst:
                worst = resid

    sym = 0.0
    f_c = fam_f.lift(mu_f)
    s_M = max(float(s) for s in f_c.slopes)
    strip_factor = 2.0 * (1.0 + s_M ** max(1, q - 1))
    centers = [float(x) for x in report.landmarks]
    for mu_t in (window / 4, window / 8):
        Gp = _normalized_power(fam_f, mu_f + mu_t, p, q, cap)
        Gm = _normalized_power(fam_f, mu_f - mu_t, p, q, cap)
        diff = _sup_outside_strips(Gm, invert(Gp), centers, strip_factor * mu_t)
        if diff is None:
            log.warning("symmetry check skipped at mu~=%s: strips cover the circle", mu_t)
            continue
        c = diff / (mu_t * mu_t)
        if c > sym:
            sym = c

    return ResidualReport(
        r2=float(worst),
        window=window,
        n_samples=2 * k,
        symmetry_c=sym,
        p=p,
        q=q,
        R1=R1f,
    )


def _normalized_power(fam: FamilySpec, mu: float, p: int, q: int, cap: int) -> PwlLift:
    """``G_mu = F_mu^q - p``, the near-identity return map."""
    P = power(fam.lift(mu), q, cap)
    return make_lift(list(P.breaks), [v - p for v in P.values], P.backend)


def _circle_gap(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def _sup_outside_strips(f: PwlLift, g: PwlLift, centers, radius: float):
    """Max of ``|f - g|`` over circle points at distance > radius from centers.

    Both arguments are PWL lifts, so on the allowed region the max sits at
    a break of either map or at a strip edge; those points are exactly the
    candidates evaluated.  Returns None when the strips cover everything.
    """
    pts = set(float(b) for b in f.breaks)
    pts.update(float(b) for b in g.breaks)
    for c in centers:
        pts.add((c + radius) % 1.0)
        pts.add((c - radius) % 1.0)
    best = None
    for x in pts:
        if any(_circle_gap(x, c) < radius for c in centers):
            continue
        d = abs(float(f(x)) - float(g(x)))
        if best is None or d > best:
            best = d
    return best


@dataclass(frozen=True)
class PinchRow:
    d: Num
    lo: Optional[Num]
    hi: Optional[Num]
    note: Optional[str] = None

    @property
    def width(self) -> Optional[Num]:
        if self.lo is None or self.hi is None:
            return None
        return self.hi - self.lo


@dataclass(frozen=True)
class PinchReport:
    """Mode-locked boundary pairs along a pinch-transverse parameter."""

    p: int
    q: int
    rows: tuple
    bracket: tuple
    tol: Num
    width_at_zero: Optional[Num]
    fitted_slopes: dict
    reference_slopes: Optional[tuple]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "rows": [
                {
                    "d": _scalar_json(r.d),
                    "mu_lo": _scalar_json(r.lo),
                    "mu_hi": _scalar_json(r.hi),
                    "note": r.note,
                }
                for r in self.rows
            ],
            "bracket": [_scalar_json(self.bracket[0]), _scalar_json(self.bracket[1])],
            "tol": _scalar_json(self.tol),
            "width_at_zero": _scalar_json(self.width_at_zero),
            "fitted_slopes": {
                side: None if pair is None else [_scalar_json(pair[0]), _scalar_json(pair[1])]
                for side, pair in self.fitted_slopes.items()
            },
            "reference_slopes": None
            if self.reference_slopes is None
            else [_scalar_json(x) for x in self.reference_slopes],
        }

    def to_csv_rows(self) -> list:
        out = []
        for r in self.rows:
            out.append(
                (
                    float(r.d),
                    "" if r.lo is None else float(r.lo),
                    "" if r.hi is None else float(r.hi),
                )
            )
        return out


def _origin_slope(pairs):
    """Least-squares slope through the origin for (d, boundary) data."""
    num = None
    den = None
    for d, y in pairs:
        term_n = d * y
        term_d = d * d
        num = term_n if num is None else num + term_n
        den = term_d if den is None else den + term_d
    if den is None or den == 0:
        return None
    return num / den


def pinch_boundaries(
    two_param: TwoParamFamilySpec,
    pq: Tuple[int, int],
    d_grid: Sequence,
    mu_bracket: Tuple,
    tol=None,
    cap: int = DEFAULT_PIECE_CAP,
) -> PinchReport:
    """Trace the ``p/q`` locked interval across a grid of ``d`` values.

    Each ``d`` is independent: the slice family is handed to
    :func:`rotation.mode_lock_interval` over ``mu_bracket``; a bracket
    failure is recorded on that row and the sweep continues.  Boundary
    slopes in ``d`` are fitted per sign of ``d`` (the wedge is generally
    not symmetric) through the origin, for comparison against the
    family's first-order reference slopes.
    """
    p, q = pq
    rows = []
    used_tol = None
    for d in d_grid:
        fam_d = two_param.at(d)
        try:
            mli = mode_lock_interval(fam_d, p, q, mu_bracket, tol=tol, cap=cap)
            rows.append(PinchRow(d=d, lo=mli.lo, hi=mli.hi))
            used_tol = mli.tol
        except errors.NotBracketed as exc:
            log.warning("d = %s: %s", d, exc)
            rows.append(PinchRow(d=d, lo=None, hi=None, note=str(exc)))

    width_at_zero = None
    for row in rows:
        if row.d == 0 and row.width is not None:
            width_at_zero = row.width

    fitted = {}
    for side, keep in (("pos", lambda d: d > 0), ("neg", lambda d: d < 0)):
        ok = [r for r in rows if keep(r.d) and r.lo is not None]
        if ok:
            fitted[side] = (
                _origin_slope([(r.d, r.lo) for r in ok]),
                _origin_slope([(r.d, r.hi) for r in ok]),
            )
        else:
            fitted[side] = None

    tol_out = tol
    if tol_out is None:
        tol_out = used_tol if used_tol is not None else 1e-10

    return PinchReport(
        p=p,
        q=q,
        rows=tuple(rows),
        bracket=(mu_bracket[0], mu_bracket[1]),
        tol=tol_out,
        width_at_zero=width_at_zero,
        fitted_slopes=fitted,
        reference_slopes=two_param.reference_slopes,
    )
