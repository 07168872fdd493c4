"""Backend selection for the hot kernels.

Set ``LOCALDKW_BACKEND=numpy`` to force the pure-numpy path; the default is
``numba`` when numba imports cleanly. ``LOCALDKW_THREADS`` caps the worker
pool used by tabulation and Monte-Carlo replication.
"""
import os

try:
    import numba  # noqa: F401
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


_VALID = ("numba", "numpy")


def _initial_backend():
    requested = os.environ.get("LOCALDKW_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested not in ("", "numba"):
        raise RuntimeError(f"LOCALDKW_BACKEND must be one of {_VALID}, got {requested!r}")
    return "numba" if HAVE_NUMBA else "numpy"


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Switch backend at runtime (benchmarks and backend-agreement tests)."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def thread_count():
    raw = os.environ.get("LOCALDKW_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise RuntimeError(f"LOCALDKW_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1
