"""Batch front end: compute, sweep, and export plot-ready data.

One subcommand per analysis::

    pwl-rotor rho       --config job.json          # rotation number of one map
    pwl-rotor sweep     --config job.json -o out.csv --workers 8
    pwl-rotor conjugacy --config job.json          # verdict + h + density
    pwl-rotor scaling   --config job.json          # R1 report + residuals
    pwl-rotor modelock  --config job.json          # locked-interval edges
    pwl-rotor pinch     --config job.json -o wedge.csv

Job files are strict JSON: a ``family`` object in the families schema
plus the command's own options; unknown keys are rejected.  CSV output
is deterministic (same config, any worker count, byte-identical) and
carries a comment line with the backend and tolerances in force.

Exit codes: 0 success; 2 bad config or parameter out of domain; 3 piece
overflow; 4 conjugacy required but absent; 5 mode-locking bracket does
not straddle the interval.  Set ``PWL_ROTOR_LOG=debug`` (or info,
warning, ...) for progress logging on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import multiprocessing
import os
import sys
from fractions import Fraction
from typing import Optional

from . import errors
from .conjugacy import Conjugate, build_conjugacy, invariant_density, is_conjugate_to_rigid
from .families import FamilySpec, _decode_param, family_from_json, herman_offset_family
from .rotation import birkhoff_enclosure, exact_rotation, mode_lock_interval
from .scaling import pinch_boundaries, r1, scaling_residual

log = logging.getLogger("pwlrotor.cli")


class ConfigError(ValueError):
    """The job file is malformed: missing, unknown, or ill-typed keys."""


_SCHEMAS = {
    "rho": ({"family", "mu"}, {"m", "q_max", "x0"}),
    "sweep": ({"family", "mu_min", "mu_max"}, {"points", "m", "x0"}),
    "conjugacy": ({"family", "mu"}, {"q_cap", "orbit_tol"}),
    "scaling": ({"family", "mu_c"}, {"h_fit", "m_fit", "window", "samples", "residual", "q_cap"}),
    "modelock": ({"family", "p", "q", "bracket"}, {"tol"}),
    "pinch": ({"family", "p", "q", "d_grid", "mu_bracket"}, {"tol"}),
}

_CSV_COMMANDS = {"sweep", "pinch"}


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc))
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _validate_keys(command: str, cfg: dict) -> None:
    required, optional = _SCHEMAS[command]
    missing = required - set(cfg)
    unknown = set(cfg) - required - optional
    if missing:
        raise ConfigError("%s config missing keys: %s" % (command, sorted(missing)))
    if unknown:
        raise ConfigError("%s config has unknown keys: %s" % (command, sorted(unknown)))


def _build_family(cfg: dict, backend: Optional[str]) -> FamilySpec:
    try:
        return family_from_json(cfg["family"], backend=backend)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _scalar(cfg, key, default=None):
    if key not in cfg:
        return default
    return _decode_param(cfg[key])


def _int_option(cfg, key, default, minimum=1):
    v = cfg.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError("%s must be an integer >= %d" % (key, minimum))
    return v


def _pair(cfg, key):
    v = cfg.get(key)
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError("%s must be a two-element array" % key)
    return _decode_param(v[0]), _decode_param(v[1])


def _fnum(x) -> str:
    return repr(float(x))


def _csv_text(tool: str, meta: dict, header, rows) -> str:
    items = " ".join("%s=%s" % (k, v) for k, v in meta.items())
    lines = ["# pwl-rotor %s %s" % (tool, items), ",".join(header)]
    for row in rows:
        lines.append(",".join("" if cell == "" else str(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _backend_meta(family: FamilySpec) -> dict:
    b = family.backend
    meta = {"backend": b.tag}
    if b.tag == "float":
        meta.update(
            eps_x=repr(b.eps_x), eps_s=repr(b.eps_s), decision_band=repr(b.decision_band)
        )
    return meta


# ----------------------------------------------------------------- rho

def cmd_rho(cfg: dict, family: FamilySpec, fmt: str, workers: int) -> str:
    mu = _scalar(cfg, "mu")
    q_max = _int_option(cfg, "q_max", 10_000)
    m = _int_option(cfg, "m", 100_000)
    x0 = _scalar(cfg, "x0", 0)
    f = family.lift(mu)
    rr = exact_rotation(f, q_max=q_max)
    enc = birkhoff_enclosure(f, m, x0=x0)
    payload = {
        "mu": _json_scalar(mu),
        "rotation": rr.to_json(),
        "birkhoff": enc.to_json(),
    }
    return _dump_json(payload)


def _json_scalar(x):
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------- sweep

def _sweep_point(payload):
    fam_json, backend, mu, m, x0 = payload
    try:
        family = family_from_json(fam_json, backend=backend)
        enc = birkhoff_enclosure(family.lift(mu), m, x0=x0)
        return (float(enc.lo), float(enc.hi), None)
    except errors.PwlError as exc:
        return (None, None, "%s: %s" % (type(exc).__name__, exc))


def cmd_sweep(cfg: dict, family: FamilySpec, fmt: str, workers: int) -> str:
    mu_min = family.backend.coerce(_scalar(cfg, "mu_min"))
    mu_max = family.backend.coerce(_scalar(cfg, "mu_max"))
    points = _int_option(cfg, "points", 1000)
    m = _int_option(cfg, "m", 100_000)
    x0 = _scalar(cfg, "x0", 0)
    if mu_max < mu_min:
        raise ConfigError("mu_max must be >= mu_min")

    if points == 1:
        grid = [mu_min]
    else:
        step = (mu_max - mu_min) / (points - 1)
        grid = [mu_min + i * step for i in range(points)]

    fam_json = family.to_json()
    jobs = [(fam_json, family.backend.tag, mu, m, x0) for mu in grid]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_sweep_point, jobs, chunksize=max(1, points // (8 * workers)))
    else:
        results = [_sweep_point(job) for job in jobs]

    rows = []
    for mu, (lo, hi, err) in zip(grid, results):
        if err is not None:
            log.warning("sweep point mu=%s failed: %s", mu, err)
            rows.append((_fnum(mu), "", ""))
        else:
            rows.append((_fnum(mu), repr(lo), repr(hi)))

    meta = _backend_meta(family)
    meta.update(m=m, points=points, seed="none")
    if fmt == "json":
        return _dump_json(
            {
                "meta": {k: str(v) for k, v in meta.items()},
                "rows": [
                    [float(r[0]), None if r[1] == "" else float(r[1]),
                     None if r[2] == "" else float(r[2])]
                    for r in rows
                ],
            }
        )
    return _csv_text("sweep", meta, ("mu", "rho_lo", "rho_hi"), rows)


# ----------------------------------------------------------- conjugacy

def cmd_conjugacy(cfg: dict, family: FamilySpec, fmt: str, workers: int) -> str:
    mu = _scalar(cfg, "mu")
    q_cap = _int_option(cfg, "q_cap", 64)
    orbit_tol = cfg.get("orbit_tol", None)
    f = family.lift(mu)
    kwargs = {"q_cap": q_cap}
    if orbit_tol is not None:
        kwargs["orbit_tol"] = float(orbit_tol)
    verdict = is_conjugate_to_rigid(f, **kwargs)
    payload = {"mu": _json_scalar(family.backend.coerce(mu)), "verdict": verdict.to_json()}
    if isinstance(verdict, Conjugate):
        h = build_conjugacy(f, partition=verdict.partition)
        dens = invariant_density(f, q=verdict.q)
        payload["h"] = h.to_json()
        payload["invariant_density"] = dens.to_json()
    return _dump_json(payload)


# ------------------------------------------------------------- scaling

def cmd_scaling(cfg: dict, family: FamilySpec, fmt: str, workers: int) -> str:
    mu_c = _scalar(cfg, "mu_c")
    h_fit = cfg.get("h_fit")
    m_fit = _int_option(cfg, "m_fit", 10**7)
    q_cap = _int_option(cfg, "q_cap", 64)
    rep = r1(family, mu_c, h_fit=None if h_fit is None else float(h_fit),
             m_fit=m_fit, q_cap=q_cap)
    payload = {"scaling": rep.to_json()}
    if cfg.get("residual", True):
        window = float(cfg.get("window", 1e-2))
        samples = _int_option(cfg, "samples", 16)
        res = scaling_residual(
            family, mu_c, window=window, samples=samples, m=m_fit, report=rep
        )
        payload["residual"] = res.to_json()
    return _dump_json(payload)


# ------------------------------------------------------------ modelock

def cmd_modelock(cfg: dict, family: FamilySpec, fmt: str, workers: int) -> str:
    p = _int_option(cfg, "p", None, minimum=-(10**9))
    q = _int_option(cfg, "q", None)
    bracket = _pair(cfg, "bracket")
    tol = _scalar(cfg, "tol")
    mli = mode_lock_interval(family, p, q, bracket, tol=tol)
    return _dump_json(mli.to_json())


# --------------------------------------------------------------- pinch

def cmd_pinch(cfg: dict, family: FamilySpec, fmt: str, workers: int) -> str:
    if family.name != "herman_offset":
        raise ConfigError("pinch requires the herman_offset family")
    p = _int_option(cfg, "p", None, minimum=-(10**9))
    q = _int_option(cfg, "q", None)
    d_grid = cfg.get("d_grid")
    if not isinstance(d_grid, list) or not d_grid:
        raise ConfigError("d_grid must be a non-empty array")
    d_grid = [_decode_param(d) for d in d_grid]
    mu_bracket = _pair(cfg, "mu_bracket")
    tol = _scalar(cfg, "tol")
    two = herman_offset_family(family.params["lam"], backend=family.backend)
    rep = pinch_boundaries(two, (p, q), d_grid, mu_bracket, tol=tol)
    if fmt == "json":
        return _dump_json(rep.to_json())
    meta = _backend_meta(family)
    meta.update(p=p, q=q, tol=repr(float(rep.tol)), seed="none")
    rows = [
        (_fnum(d), "" if lo == "" else repr(lo), "" if hi == "" else repr(hi))
        for d, lo, hi in rep.to_csv_rows()
    ]
    return _csv_text("pinch", meta, ("d", "mu_lo", "mu_hi"), rows)


_HANDLERS = {
    "rho": cmd_rho,
    "sweep": cmd_sweep,
    "conjugacy": cmd_conjugacy,
    "scaling": cmd_scaling,
    "modelock": cmd_modelock,
    "pinch": cmd_pinch,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pwl-rotor",
        description="Rotation numbers, conjugacies, and scaling for PWL circle maps.",
    )
    ap.add_argument("command", choices=sorted(_HANDLERS))
    ap.add_argument("--config", required=True, help="job file (JSON)")
    ap.add_argument("-o", "--out", default=None, help="output path (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--backend", choices=("rational", "float"), default=None)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("PWL_ROTOR_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = _parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2

    fmt = args.format
    if fmt is None:
        fmt = "csv" if args.command in _CSV_COMMANDS else "json"
    if fmt == "csv" and args.command not in _CSV_COMMANDS:
        print("error: %s has no CSV form" % args.command, file=sys.stderr)
        return 2

    try:
        cfg = _load_config(args.config)
        _validate_keys(args.command, cfg)
        family = _build_family(cfg, args.backend)
        out = _HANDLERS[args.command](cfg, family, fmt, args.workers)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except errors.OutOfDomain as exc:
        print("error: parameter out of domain: %s" % exc, file=sys.stderr)
        return 2
    except errors.Overflow as exc:
        print("error: piece budget exceeded: %s" % exc, file=sys.stderr)
        return 3
    except errors.NotConjugateError as exc:
        print("error: not conjugate: %s" % exc, file=sys.stderr)
        return 4
    except errors.NotBracketed as exc:
        print("error: bracket does not straddle: %s" % exc, file=sys.stderr)
        return 5
    except errors.PwlError as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 2

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
