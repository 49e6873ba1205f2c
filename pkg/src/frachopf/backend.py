"""Kernel-lane selection: numba-jit loops or the pure-numpy fallback.

The env var FRACHOPF_BACKEND picks the lane at import time:

* ``auto`` (default) - numba when importable, numpy otherwise;
* ``numba`` - require the jit lane, raise if numba is missing;
* ``numpy`` - force the fallback (useful for debugging and benchmarks).

``set_backend`` switches lanes at runtime; ``benchmarks/bench_kernels.py``
uses it to time both on identical inputs.
"""

import os
import warnings

from . import _kernels_numpy as _numpy_lane

_requested = os.environ.get("FRACHOPF_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(f"FRACHOPF_BACKEND must be auto|numba|numpy, got {_requested!r}")

_numba_lane = None
if _requested in ("auto", "numba"):
    try:
        from . import _kernels_numba as _numba_lane
    except ImportError:
        if _requested == "numba":
            raise
        warnings.warn("numba unavailable; using the pure-numpy kernel lane")

_current = _numba_lane if _numba_lane is not None else _numpy_lane


def get_lane():
    return _current


def backend_name() -> str:
    return "numba" if _current is _numba_lane else "numpy"


def set_backend(name: str) -> str:
    """Switch kernel lane; returns the previously active lane name."""
    global _current
    prev = backend_name()
    if name == "numpy":
        _current = _numpy_lane
    elif name == "numba":
        if _numba_lane is None:
            raise RuntimeError("numba lane not available in this environment")
        _current = _numba_lane
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev
