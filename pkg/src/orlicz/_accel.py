"""JIT selection.

Set ``ORLICZ_DISABLE_JIT=1`` to force the pure-numpy kernels even when numba
is importable.
"""
import os

_FLAG = "ORLICZ_DISABLE_JIT"


def _truthy(value):
    return value.strip().lower() not in ("", "0", "false", "no", "off")


try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_JIT = HAS_NUMBA and not _truthy(os.environ.get(_FLAG, ""))


def njit(fn):
    """Compile ``fn`` with numba in nopython mode (cached on disk)."""
    from numba import njit as _njit

    return _njit(cache=True)(fn)


def backend_name():
    return "numba" if USE_JIT else "numpy"
