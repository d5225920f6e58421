"""Kernel backend selection.

Hot loops (separable kernel sweeps, explicit diffusion steps, sphere
rasterization) exist twice: a numba-jitted implementation and a pure-numpy
one. The active backend is chosen by the ``MMSURF_BACKEND`` environment
variable (``numba`` or ``numpy``); unset, numba is used when it imports,
numpy otherwise. Both backends execute the same floating-point operations
in the same order, so their outputs are bit-identical.
"""

import os
import warnings

_VALID = ("numba", "numpy")
_active = None


def _choose() -> str:
    requested = os.environ.get("MMSURF_BACKEND", "").strip().lower()
    if requested and requested not in _VALID:
        raise ValueError(
            f"MMSURF_BACKEND={requested!r}: expected one of {_VALID}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        warnings.warn("numba unavailable, falling back to the numpy backend")
        return "numpy"
    return "numba"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    global _active
    if name is None:
        if _active is None:
            _active = _choose()
        name = _active
    if name == "numba":
        # The threading layer is sized at first numba import; reserve a pool
        # larger than the core count so --workers above nproc still resolves.
        os.environ.setdefault("NUMBA_NUM_THREADS", str(max(8, os.cpu_count() or 1)))
        from . import numba_kernels
        return numba_kernels
    if name == "numpy":
        from . import numpy_kernels
        return numpy_kernels
    raise ValueError(f"unknown backend {name!r}")


def active_backend_name() -> str:
    global _active
    if _active is None:
        _active = _choose()
    return _active


def set_workers(n: int) -> int:
    """Set worker threads for the numba backend; returns the applied count.

    The numpy backend is single-threaded, so the call is a no-op there.
    Results are bit-identical for any worker count by contract.
    """
    if n < 1:
        raise ValueError(f"worker count must be >= 1, got {n}")
    if active_backend_name() != "numba":
        return 1
    get_backend("numba")  # ensures NUMBA_NUM_THREADS is pinned before import
    import numba

    limit = numba.config.NUMBA_NUM_THREADS
    applied = min(n, limit)
    if applied != n:
        warnings.warn(f"worker count {n} clamped to thread pool size {limit}")
    numba.set_num_threads(applied)
    return applied
