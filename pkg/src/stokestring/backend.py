"""Selects the pair-sum implementation: compiled extension or numpy fallback.

Set STOKESTRING_BACKEND=python to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

import os

import numpy as np

_forced = os.environ.get("STOKESTRING_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _pairsum_py as _impl
    BACKEND = "python"
elif _forced in ("", "compiled", "c"):
    try:
        from . import _pairsum as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _forced:
            raise
        from . import _pairsum_py as _impl
        BACKEND = "python"
else:
    raise ValueError(f"unknown STOKESTRING_BACKEND {_forced!r}")


def _contiguous(fn):
    def wrapped(*args):
        coerced = [np.ascontiguousarray(a, dtype=float)
                   if isinstance(a, np.ndarray) else a for a in args]
        return fn(*coerced)
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


apply_w = _contiguous(_impl.apply_w)
apply_r = _contiguous(_impl.apply_r)
apply_delta_q = _contiguous(_impl.apply_delta_q)
