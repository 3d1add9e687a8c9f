"""One- and two-parameter families of PWL circle lifts.

A :class:`FamilySpec` wraps a parametrised marked-point table
``mu -> (breaks, values)`` together with its mu-derivatives (analytic
callbacks for the built-ins, Richardson-extrapolated central differences
otherwise), a monotonicity direction flag, and a domain guard.  The
built-in families:

``herman(lam, beta)``
    Slope ``lam`` on ``[0, c]`` and ``lam**-beta`` on ``[c, 1]``, shifted
    by ``mu``.  The break ``c`` solves the continuity condition
    ``lam*c = 1 + lam**-beta * (c - 1)``, which for ``beta = 1`` gives
    ``c = 1/(1 + lam)``.

``herman_shifted(lam)``
    The ``beta = 1`` family re-centred so that ``mu = 0`` is the map
    whose break orbit ``{0, c}`` closes with rotation number 1/2.

``coelho(a, b)``
    Two-piece lift through ``(0, a)`` and ``(b, 1)``, shifted by ``mu``;
    slopes ``alpha = (1-a)/b`` and ``beta = a/(1-b)``, with the closed
    rotation-number form in :func:`coelho_rho`.

``refraction(alpha, beta)``
    Four-piece map with breaks ``0 < alpha*(beta-1)/(2*beta) < 1/2 <
    1 - 1/(2*alpha)`` and slopes ``1/alpha, beta/alpha, beta, alpha/beta``,
    parametrised by ``mu`` through ``beta + mu``.  Its rotation number
    *decreases* in ``beta``, so the family carries ``increasing=False``.
    At ``beta = gmm_critical_beta(alpha)`` the break orbit closes into a
    single period-5 cycle with rotation number 4/5.

``herman_offset(lam, d)``
    The shifted family with the break moved to ``c = 1/(1+lam) + d``
    while the second branch is re-solved exactly for continuity.  The
    ``d``-indexed collection :func:`herman_offset_family` is the standard
    two-parameter input for pinch measurements.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from typing import Callable, Optional, Sequence, Tuple

from . import errors
from .backend import (
    FLOAT,
    RATIONAL,
    Backend,
    FloatBackend,
    Num,
    RationalBackend,
    backend_from_tag,
    infer_backend,
)
from .lift import PwlLift, make_lift


def _is_exactable(*values) -> bool:
    return all(isinstance(v, (int, Fraction, str)) for v in values)


def _pick_backend(backend, *params) -> Backend:
    if backend is not None:
        if isinstance(backend, str):
            backend = backend_from_tag(backend)
        return backend
    return RATIONAL if _is_exactable(*params) else FLOAT


@dataclass(frozen=True)
class FamilySpec:
    """A one-parameter family ``mu -> PwlLift`` with derivative data."""

    name: str
    params: dict = field(compare=False)
    backend: Backend = field(compare=False)
    increasing: bool = True
    analytic: bool = True
    _table: Callable = field(repr=False, compare=False, default=None)
    _derivs: Optional[Callable] = field(repr=False, compare=False, default=None)
    _domain: Optional[Callable] = field(repr=False, compare=False, default=None)

    @property
    def direction_sign(self) -> int:
        return 1 if self.increasing else -1

    def check_domain(self, mu) -> None:
        if self._domain is not None:
            self._domain(mu)

    def table(self, mu) -> Tuple[tuple, tuple]:
        mu = self.backend.coerce(mu)
        self.check_domain(mu)
        return self._table(mu)

    def lift(self, mu) -> PwlLift:
        breaks, values = self.table(mu)
        return make_lift(breaks, values, self.backend)

    def derivatives(self, mu) -> Tuple[tuple, tuple]:
        """d(breaks)/dmu and d(values)/dmu at ``mu``.

        Analytic families answer from their callbacks.  Otherwise central
        differences with step ``1e-6 * max(1, |mu|)`` plus one Richardson
        extrapolation level; treat the result as numerical data.
        """
        mu = self.backend.coerce(mu)
        if self._derivs is not None:
            return self._derivs(mu)
        if isinstance(self.backend, RationalBackend):
            h0 = Fraction(1, 10**6) * max(Fraction(1), abs(mu))
        else:
            h0 = 1e-6 * max(1.0, abs(mu))

        def central(h):
            b_hi, v_hi = self.table(mu + h)
            b_lo, v_lo = self.table(mu - h)
            db = tuple((x - y) / (2 * h) for x, y in zip(b_hi, b_lo))
            dv = tuple((x - y) / (2 * h) for x, y in zip(v_hi, v_lo))
            return db, dv

        db1, dv1 = central(h0)
        db2, dv2 = central(h0 / 2)
        db = tuple((4 * f2 - f1) / 3 for f1, f2 in zip(db1, db2))
        dv = tuple((4 * f2 - f1) / 3 for f1, f2 in zip(dv1, dv2))
        return db, dv

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        return {
            "family": self.name,
            "params": {k: enc(v) for k, v in self.params.items()},
            "backend": self.backend.tag,
        }


def instantiate(family: FamilySpec, mu) -> PwlLift:
    """The lift at parameter ``mu`` (alias for ``family.lift``)."""
    return family.lift(mu)


@dataclass(frozen=True)
class TwoParamFamilySpec:
    """A ``d``-indexed collection of one-parameter families in ``mu``."""

    name: str
    params: dict = field(compare=False)
    backend: Backend = field(compare=False)
    _at: Callable = field(repr=False, compare=False, default=None)
    #: Expected d-slopes of the two locked-interval boundaries near the
    #: pinch, when the family has a first-order reference; report-level.
    reference_slopes: Optional[tuple] = None

    def at(self, d) -> FamilySpec:
        return self._at(d)


def herman(lam, beta=1, backend=None) -> FamilySpec:
    """Two-slope family: ``lam`` then ``lam**-beta``, plus the shift mu."""
    backend = _pick_backend(backend, lam, beta)
    lam_b = backend.coerce(lam)
    beta_b = backend.coerce(beta)
    if not (lam_b > 1 and beta_b > 0):
        raise errors.OutOfDomain("herman needs lam > 1 and beta > 0")
    if isinstance(backend, RationalBackend):
        if beta_b.denominator != 1:
            raise errors.BackendMismatch(
                "non-integer beta makes lam**-beta irrational; use the float backend"
            )
        t = 1 / lam_b ** int(beta_b)
    else:
        t = lam_b ** (-beta_b)
    c = (1 - t) / (lam_b - t)
    zero = backend.coerce(0)

    def table(mu):
        return (zero, c), (mu, mu + lam_b * c)

    def derivs(mu):
        return (zero, zero), (backend.coerce(1), backend.coerce(1))

    return FamilySpec(
        name="herman",
        params={"lam": lam, "beta": beta},
        backend=backend,
        increasing=True,
        analytic=True,
        _table=table,
        _derivs=derivs,
    )


def herman_shifted(lam, backend=None) -> FamilySpec:
    """The lam-slope family centred so mu = 0 is the rho = 1/2 closure."""
    backend = _pick_backend(backend, lam)
    lam_b = backend.coerce(lam)
    if not lam_b > 0:
        raise errors.OutOfDomain("herman_shifted needs lam > 0")
    c = 1 / (1 + lam_b)
    zero = backend.coerce(0)

    def table(mu):
        return (zero, c), (mu + c, mu + c + lam_b * c)

    def derivs(mu):
        return (zero, zero), (backend.coerce(1), backend.coerce(1))

    return FamilySpec(
        name="herman_shifted",
        params={"lam": lam},
        backend=backend,
        increasing=True,
        analytic=True,
        _table=table,
        _derivs=derivs,
    )


def coelho(a, b, backend=None) -> FamilySpec:
    """Two-piece lift through ``(0, a)`` and ``(b, 1)``, shifted by mu."""
    backend = _pick_backend(backend, a, b)
    a_b = backend.coerce(a)
    b_b = backend.coerce(b)
    if not (0 < a_b < 1 and 0 < b_b < 1):
        raise errors.OutOfDomain("coelho needs a and b strictly inside (0, 1)")
    zero = backend.coerce(0)
    one = backend.coerce(1)

    def table(mu):
        return (zero, b_b), (mu + a_b, mu + one)

    def derivs(mu):
        return (zero, zero), (one, one)

    return FamilySpec(
        name="coelho",
        params={"a": a, "b": b},
        backend=backend,
        increasing=True,
        analytic=True,
        _table=table,
        _derivs=derivs,
    )


def coelho_rho(a, b) -> float:
    """Closed-form rotation number of the mu = 0 coelho lift.

    With slopes ``alpha = (1-a)/b`` and ``beta = a/(1-b)``,

        rho = log(alpha) / (log(alpha) - log(beta)).

    Returns a float; the value is irrational unless log(alpha) and
    log(beta) are rationally dependent.
    """
    a = float(a)
    b = float(b)
    if not (0 < a < 1 and 0 < b < 1):
        raise errors.OutOfDomain("coelho_rho needs a and b strictly inside (0, 1)")
    import math

    if abs(a + b - 1) < 1e-14:
        # Both slopes are 1 there: the lift is x + a and the log ratio
        # below degenerates to 0/0.
        return a
    la = math.log((1 - a) / b)
    lb = math.log(a / (1 - b))
    return la / (la - lb)


def refraction(alpha, beta, backend=None) -> FamilySpec:
    """Four-piece refraction family, parametrised by ``beta + mu``.

    Admissibility: ``alpha > 1``, ``beta + mu > 1`` and
    ``1/alpha + 1/(beta + mu) > 1`` (the last keeps the second break left
    of 1/2).  Slopes are ``1/alpha, beta/alpha, beta, alpha/beta``; the
    values ``F(b2) = 1`` and ``F(b4) = 3/2`` are parameter-independent,
    which is why the rotation number moves against ``beta`` and why the
    ``k = 4`` monotonicity margin is exactly zero.
    """
    backend = _pick_backend(backend, alpha, beta)
    alpha_b = backend.coerce(alpha)
    beta_b = backend.coerce(beta)
    if not alpha_b > 1:
        raise errors.OutOfDomain("refraction needs alpha > 1")
    zero = backend.coerce(0)
    half = backend.coerce(1) / 2

    def domain(mu):
        bm = beta_b + mu
        if not bm > 1:
            raise errors.OutOfDomain("refraction needs beta + mu > 1 (got %s)" % (bm,))
        if not (1 / alpha_b + 1 / bm > 1):
            raise errors.OutOfDomain(
                "refraction needs 1/alpha + 1/(beta+mu) > 1 (got alpha=%s, beta+mu=%s)"
                % (alpha_b, bm)
            )

    def table(mu):
        bm = beta_b + mu
        b2 = (alpha_b / (2 * bm)) * (bm - 1)
        b4 = 1 - 1 / (2 * alpha_b)
        phi1 = (bm + 1) / (2 * bm)
        phi3 = 1 + bm / (2 * alpha_b) + (1 - bm) / 2
        return (zero, b2, half, b4), (phi1, backend.coerce(1), phi3, 3 * half)

    def derivs(mu):
        bm = beta_b + mu
        db = (zero, alpha_b / (2 * bm * bm), zero, zero)
        dphi = (-1 / (2 * bm * bm), zero, (1 - alpha_b) / (2 * alpha_b), zero)
        return db, dphi

    return FamilySpec(
        name="refraction",
        params={"alpha": alpha, "beta": beta},
        backend=backend,
        increasing=False,
        analytic=True,
        _table=table,
        _derivs=derivs,
        _domain=domain,
    )


def gmm_critical_beta(alpha) -> float:
    """The beta at which the refraction break orbit closes into one cycle.

    Positive root of ``(alpha-1) beta^2 + alpha (alpha-1) beta - alpha^2``:

        beta = (-alpha + sqrt(alpha^2 (alpha+3) / (alpha-1))) / 2.

    At ``alpha = 2`` this is ``sqrt(5) - 1``.
    """
    a = float(alpha)
    if not a > 1:
        raise errors.OutOfDomain("critical beta needs alpha > 1")
    return (-a + sqrt(a * a * (a + 3) / (a - 1))) / 2


def refraction_slice_alpha(m) -> float:
    """Solve ``gmm_critical_beta(alpha) = alpha/m`` for alpha.

    Substituting ``beta = alpha/m`` into the critical quadratic collapses
    it to ``(alpha - 1)(1/m^2 + 1/m) = 1``, i.e. ``alpha = 1 + m^2/(1+m)``.
    """
    m = float(m)
    if not m > 0:
        raise errors.OutOfDomain("slice parameter m must be positive")
    return 1 + m * m / (1 + m)


def herman_offset(lam, d, backend=None) -> FamilySpec:
    """Shifted family with the break displaced to ``c = 1/(1+lam) + d``.

    Only the break moves; the second-branch coefficients are implied
    exactly by continuity and degree one (no first-order approximation),
    so ``d = 0`` reduces to :func:`herman_shifted` identically.
    """
    backend = _pick_backend(backend, lam, d)
    lam_b = backend.coerce(lam)
    d_b = backend.coerce(d)
    if not lam_b > 0:
        raise errors.OutOfDomain("herman_offset needs lam > 0")
    c0 = 1 / (1 + lam_b)
    c = c0 + d_b
    if not (0 < c < 1):
        raise errors.OutOfDomain("offset pushes the break out of (0, 1): c=%s" % (c,))
    if not lam_b * c < 1:
        raise errors.OutOfDomain(
            "offset makes the second slope non-positive (lam*c=%s)" % (lam_b * c,)
        )
    zero = backend.coerce(0)

    def table(mu):
        return (zero, c), (mu + c0, mu + c0 + lam_b * c)

    def derivs(mu):
        return (zero, zero), (backend.coerce(1), backend.coerce(1))

    return FamilySpec(
        name="herman_offset",
        params={"lam": lam, "d": d},
        backend=backend,
        increasing=True,
        analytic=True,
        _table=table,
        _derivs=derivs,
    )


def herman_offset_family(lam, backend=None) -> TwoParamFamilySpec:
    """The ``(mu, d)`` plane of offset families, for pinch measurements."""
    picked = _pick_backend(backend, lam)
    lam_f = float(picked.coerce(lam))
    return TwoParamFamilySpec(
        name="herman_offset",
        params={"lam": lam},
        backend=picked,
        _at=lambda d: herman_offset(lam, d, backend=backend),
        reference_slopes=(0.0, 1.0 - lam_f),
    )


def custom_family(
    mu_nodes: Sequence,
    breaks_table: Sequence[Sequence],
    values_table: Sequence[Sequence],
    interpolation: str = "linear",
    increasing: bool = True,
    backend=None,
) -> FamilySpec:
    """Tabulated family: componentwise interpolation between mu nodes.

    Only ``"linear"`` interpolation is supported.  Derivatives fall back
    to finite differences (flagged numerical); near the nodes they see
    the interpolation kinks, so prefer analytic families when derivative
    quality matters.
    """
    if interpolation != "linear":
        raise ValueError("unsupported interpolation %r (only 'linear')" % (interpolation,))
    if len(mu_nodes) < 2:
        raise errors.OutOfDomain("need at least two mu nodes")
    if len(breaks_table) != len(mu_nodes) or len(values_table) != len(mu_nodes):
        raise errors.OutOfDomain("tables must list one row per mu node")
    flat = list(mu_nodes)
    for row in breaks_table:
        flat.extend(row)
    for row in values_table:
        flat.extend(row)
    if backend is None:
        backend = infer_backend(flat)
    elif isinstance(backend, str):
        backend = backend_from_tag(backend)
    nodes = [backend.coerce(x) for x in mu_nodes]
    for i in range(1, len(nodes)):
        if not nodes[i - 1] < nodes[i]:
            raise errors.OutOfDomain("mu nodes must increase strictly")
    n = len(breaks_table[0])
    if any(len(row) != n for row in breaks_table) or any(
        len(row) != n for row in values_table
    ):
        raise errors.OutOfDomain("all rows must have the same number of marked points")
    btab = [[backend.coerce(x) for x in row] for row in breaks_table]
    vtab = [[backend.coerce(x) for x in row] for row in values_table]

    def domain(mu):
        if not (nodes[0] <= mu <= nodes[-1]):
            raise errors.OutOfDomain(
                "mu=%s outside the tabulated range [%s, %s]" % (mu, nodes[0], nodes[-1])
            )

    def table(mu):
        j = bisect_right(nodes, mu) - 1
        if j >= len(nodes) - 1:
            j = len(nodes) - 2
        t = (mu - nodes[j]) / (nodes[j + 1] - nodes[j])
        b = tuple(x + t * (y - x) for x, y in zip(btab[j], btab[j + 1]))
        v = tuple(x + t * (y - x) for x, y in zip(vtab[j], vtab[j + 1]))
        return b, v

    return FamilySpec(
        name="custom",
        params={
            "mu": list(mu_nodes),
            "breaks": [list(r) for r in breaks_table],
            "values": [list(r) for r in values_table],
            "interpolation": interpolation,
            "increasing": increasing,
        },
        backend=backend,
        increasing=increasing,
        analytic=False,
        _table=table,
        _derivs=None,
        _domain=domain,
    )


@dataclass(frozen=True)
class MarginReport:
    """Monotonicity margins over a parameter interval.

    ``per_k`` holds, for each marked point, the worst-case value of
    ``min d(value)/dmu - (max adjacent slope) * (max d(break)/dmu)`` over
    the sampled interval (derivatives taken in the increasing
    orientation).  All-positive margins certify a strictly monotone
    family; non-positive entries are data, not errors.  When ``mu_c`` is
    supplied the report also carries the local transversality values
    ``d(value)/dmu - max(0, adjacent slopes * d(break)/dmu)`` at ``mu_c``.
    """

    margin: Num
    per_k: tuple
    transversality: Optional[Num]
    transversality_per_k: Optional[tuple]
    analytic: bool
    interval: tuple
    grid: int

    def to_json(self) -> dict:
        enc = lambda x: None if x is None else (str(x) if isinstance(x, Fraction) else float(x))
        return {
            "margin": enc(self.margin),
            "per_k": [enc(v) for v in self.per_k],
            "transversality": enc(self.transversality),
            "transversality_per_k": None
            if self.transversality_per_k is None
            else [enc(v) for v in self.transversality_per_k],
            "analytic": self.analytic,
            "interval": [enc(self.interval[0]), enc(self.interval[1])],
            "grid": self.grid,
        }


def monotonicity_margin(family: FamilySpec, interval, grid: int = 9, mu_c=None) -> MarginReport:
    """Evaluate strict-monotonicity margins of a family over an interval.

    Samples derivatives and slopes on a ``grid``-point mesh and forms the
    per-break margins described on :class:`MarginReport`; decreasing
    families are measured in the reversed parameter so that positive
    margins always mean "rotation number strictly increasing".
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    backend = family.backend
    a = backend.coerce(interval[0])
    b = backend.coerce(interval[1])
    sigma = family.direction_sign
    mus = [a + (b - a) * Fraction(i, grid - 1) for i in range(grid)]
    if isinstance(backend, FloatBackend):
        mus = [float(m) for m in mus]

    min_dphi = None
    max_db = None
    max_pair_slope = None
    n = None
    for mu in mus:
        f = family.lift(mu)
        db, dphi = family.derivatives(mu)
        db = [sigma * x for x in db]
        dphi = [sigma * x for x in dphi]
        if n is None:
            n = f.n
            min_dphi = list(dphi)
            max_db = list(db)
            max_pair_slope = [max(f.slopes[k - 1], f.slopes[k]) for k in range(n)]
            continue
        if f.n != n or len(db) != n:
            raise errors.InternalMismatch(
                "marked-point count changed across the interval (%d vs %d)" % (f.n, n)
            )
        for k in range(n):
            if dphi[k] < min_dphi[k]:
                min_dphi[k] = dphi[k]
            if db[k] > max_db[k]:
                max_db[k] = db[k]
            pair = max(f.slopes[k - 1], f.slopes[k])
            if pair > max_pair_slope[k]:
                max_pair_slope[k] = pair
    per_k = tuple(min_dphi[k] - max_pair_slope[k] * max_db[k] for k in range(n))
    margin = min(per_k)

    trans = trans_per_k = None
    if mu_c is not None:
        mu_c = backend.coerce(mu_c)
        f = family.lift(mu_c)
        db, dphi = family.derivatives(mu_c)
        zero = backend.coerce(0)
        vals = []
        for k in range(f.n):
            bd = sigma * db[k]
            vals.append(
                sigma * dphi[k] - max(zero, f.slopes[k - 1] * bd, f.slopes[k] * bd)
            )
        trans_per_k = tuple(vals)
        trans = min(vals)

    return MarginReport(
        margin=margin,
        per_k=per_k,
        transversality=trans,
        transversality_per_k=trans_per_k,
        analytic=family.analytic,
        interval=(a, b),
        grid=grid,
    )


_FAMILY_PARAM_KEYS = {
    "herman": ({"lam"}, {"beta"}),
    "herman_shifted": ({"lam"}, set()),
    "coelho": ({"a", "b"}, set()),
    "refraction": ({"alpha", "beta"}, set()),
    "herman_offset": ({"lam", "d"}, set()),
    "custom": (
        {"mu", "breaks", "values"},
        {"interpolation", "increasing"},
    ),
}


def _decode_param(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def family_from_json(obj: dict, backend=None) -> FamilySpec:
    """Build a family from its JSON description.

    Expects ``{"family": name, "params": {...}}``; scalar parameters may
    be JSON numbers or exact ``"p/q"`` strings.  An optional ``backend``
    key (or the ``backend`` argument, which wins) forces the scalar
    representation.
    """
    if not isinstance(obj, dict):
        raise ValueError("family description must be an object")
    unknown = set(obj) - {"family", "params", "backend"}
    if unknown:
        raise ValueError("unknown keys in family description: %s" % sorted(unknown))
    name = obj.get("family")
    if name not in _FAMILY_PARAM_KEYS:
        raise ValueError(
            "unknown family %r (expected one of %s)"
            % (name, sorted(_FAMILY_PARAM_KEYS))
        )
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("params must be an object")
    required, optional = _FAMILY_PARAM_KEYS[name]
    missing = required - set(params)
    extra = set(params) - required - optional
    if missing:
        raise ValueError("family %r missing params: %s" % (name, sorted(missing)))
    if extra:
        raise ValueError("family %r got unknown params: %s" % (name, sorted(extra)))
    if backend is None:
        backend = obj.get("backend")

    if name == "custom":
        return custom_family(
            [_decode_param(x) for x in params["mu"]],
            [[_decode_param(x) for x in row] for row in params["breaks"]],
            [[_decode_param(x) for x in row] for row in params["values"]],
            interpolation=params.get("interpolation", "linear"),
            increasing=bool(params.get("increasing", True)),
            backend=backend,
        )
    decoded = {k: _decode_param(v) for k, v in params.items()}
    if name == "herman":
        return herman(decoded["lam"], decoded.get("beta", 1), backend=backend)
    if name == "herman_shifted":
        return herman_shifted(decoded["lam"], backend=backend)
    if name == "coelho":
        return coelho(decoded["a"], decoded["b"], backend=backend)
    if name == "refraction":
        return refraction(decoded["alpha"], decoded["beta"], backend=backend)
    return herman_offset(decoded["lam"], decoded["d"], backend=backend)
