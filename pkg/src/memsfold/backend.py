"""Numba backend selection.

The hot shooting kernels are JIT-compiled when numba is importable and the
environment variable MEMSFOLD_DISABLE_NUMBA is not set to 1/true/yes.
Otherwise all trajectory work falls back to the pure-numpy integrator in
:mod:`memsfold.integrate`.  ``benchmarks/bench_backends.py`` compares the two.
"""
import os

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _env_disabled():
    return os.environ.get("MEMSFOLD_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}


NUMBA_ENABLED = HAVE_NUMBA and not _env_disabled()


def use_numba(override=None):
    """Resolve a backend choice: None -> module default, 'numba'/'numpy' -> forced."""
    if override is None:
        return NUMBA_ENABLED
    if override == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return True
    if override == "numpy":
        return False
    raise ValueError(f"unknown backend {override!r}")
