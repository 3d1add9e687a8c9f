"""Pure Python twin of the compiled orbit kernel.

Keep the arithmetic here in lockstep with ``_kernel.pyx``: same operation
order, same wrap guard.  The two implementations must produce identical
bits so that results do not depend on whether the extension built.
"""
from __future__ import annotations

from bisect import bisect_right
from math import floor

IMPLEMENTATION = "python"


def iterate(breaks, values, slopes, x0, m):
    """Apply the circle map ``m`` times starting from ``x0`` in [0, 1).

    The lift is given by its marked points in [0, 1).  Returns the pair
    ``(winding, x)``: the accumulated integer part of the displacement and
    the final fractional position.  Tracking the winding separately keeps
    full double resolution on the orbit position no matter how large the
    total displacement grows.
    """
    b = [float(v) for v in breaks]
    ph = [float(v) for v in values]
    s = [float(v) for v in slopes]
    n = len(b)
    b0 = b[0]
    bw = b[n - 1] - 1.0
    pw = ph[n - 1] - 1.0
    sw = s[n - 1]
    x = float(x0)
    wind = 0
    for _ in range(m):
        if x < b0:
            y = pw + sw * (x - bw)
        else:
            k = bisect_right(b, x) - 1
            y = ph[k] + s[k] * (x - b[k])
        fy = floor(y)
        x = y - fy
        if x >= 1.0:
            # y can round to an integer from below; renormalise.
            x -= 1.0
            fy += 1
        wind += fy
    return wind, x
