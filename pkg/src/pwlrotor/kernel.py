"""Select the orbit kernel at import time.

The compiled extension is preferred when it built; otherwise the pure
Python twin takes over with identical semantics.  Set ``PWL_ROTOR_PURE=1``
to force the fallback (useful for benchmarking the two side by side).
"""
from __future__ import annotations

import os

if os.environ.get("PWL_ROTOR_PURE"):
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _impl

IMPLEMENTATION: str = _impl.IMPLEMENTATION
iterate = _impl.iterate
