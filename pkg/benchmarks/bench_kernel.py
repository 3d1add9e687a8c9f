"""Compare the compiled iteration kernel against the pure-Python fallback.

Runs the same long orbits through both implementations, reports the
speedup, and insists the results agree bit for bit (the two kernels are
written to perform the identical sequence of IEEE operations).

Usage::

    python benchmarks/bench_kernel.py [m]

with ``m`` the iterate count per map (default 10^6).
"""
from __future__ import annotations

import math
import sys
import time

import numpy as np

from pwlrotor import gmm_critical_beta, herman_shifted, refraction
from pwlrotor import _kernel_py

try:
    from pwlrotor import _kernel as _kernel_c
except ImportError:
    _kernel_c = None


def _maps():
    lam = math.sqrt(2.0)
    bc = gmm_critical_beta(2.0)
    out = []
    for name, f in (
        ("herman_shifted(sqrt2) mu=0.013", herman_shifted(lam).lift(0.013)),
        ("refraction(2, beta_c) mu=0", refraction(2.0, bc).lift(0.0)),
        ("refraction(2, beta_c) mu=-0.1", refraction(2.0, bc).lift(-0.1)),
    ):
        out.append(
            (
                name,
                np.asarray(f.breaks, dtype=np.float64),
                np.asarray(f.values, dtype=np.float64),
                np.asarray(f.slopes, dtype=np.float64),
            )
        )
    return out


def main() -> int:
    m = int(sys.argv[1]) if len(sys.argv) > 1 else 10**6
    if _kernel_c is None:
        print("compiled kernel not available; only timing the Python fallback")

    for name, breaks, values, slopes in _maps():
        t0 = time.perf_counter()
        wind_py, x_py = _kernel_py.iterate(breaks, values, slopes, 0.0, m)
        t_py = time.perf_counter() - t0
        line = "%-34s python %8.3fs" % (name, t_py)
        if _kernel_c is not None:
            t0 = time.perf_counter()
            wind_c, x_c = _kernel_c.iterate(breaks, values, slopes, 0.0, m)
            t_c = time.perf_counter() - t0
            assert wind_c == wind_py and x_c == x_py, (
                "kernels disagree on %s: (%d, %.17g) vs (%d, %.17g)"
                % (name, wind_c, x_c, wind_py, x_py)
            )
            line += "   cython %8.3fs   speedup %6.1fx   bit-identical" % (
                t_c,
                t_py / t_c if t_c > 0 else float("inf"),
            )
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
