"""Hot-loop kernels with two interchangeable backends.

The numba backend JIT-compiles the inner loops; the numpy backend is a pure
vectorized fallback. Selection happens once at import time from the
``LUMEN_NUMBA`` environment variable:

    LUMEN_NUMBA=0   force the numpy fallback
    LUMEN_NUMBA=1   require numba (import error if unavailable)
    unset           use numba when importable, fall back otherwise

Both backends implement identical arithmetic so results agree to floating
point roundoff; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import os

_OFF = {"0", "off", "false", "numpy", "no"}
_ON = {"1", "on", "true", "numba", "yes"}

_requested = os.environ.get("LUMEN_NUMBA", "auto").strip().lower()

if _requested in _OFF:
    _use_numba = False
elif _requested in _ON:
    import numba  # noqa: F401  fail loudly when explicitly requested

    _use_numba = True
else:
    try:
        import numba  # noqa: F401

        _use_numba = True
    except ImportError:
        _use_numba = False

if _use_numba:
    from . import _numba_impl as _impl
else:
    from . import _numpy_impl as _impl

BACKEND = "numba" if _use_numba else "numpy"

STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_BREAKDOWN = 2

unfilter_scanlines = _impl.unfilter_scanlines
spmv = _impl.spmv
cg_sweep = _impl.cg_sweep
bicgstab_sweep = _impl.bicgstab_sweep
grow_from_seed = _impl.grow_from_seed
best_source_patch = _impl.best_source_patch

__all__ = [
    "BACKEND",
    "STATUS_CONVERGED",
    "STATUS_MAXITER",
    "STATUS_BREAKDOWN",
    "unfilter_scanlines",
    "spmv",
    "cg_sweep",
    "bicgstab_sweep",
    "grow_from_seed",
    "best_source_patch",
]
