"""Select the simplex pivot kernel at import.

The compiled Cython kernel is used when it was built; otherwise, or when
``OTSBM_PURE_PYTHON=1`` is set, the numpy fallback is used.
"""
import os
from contextlib import contextmanager

from . import _pivot_py

OPTIMAL = _pivot_py.OPTIMAL
UNBOUNDED = _pivot_py.UNBOUNDED
PIVOT_LIMIT = _pivot_py.PIVOT_LIMIT

try:
    from . import _pivot as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNELS = {"python": _pivot_py.pivot_loop}
if _compiled is not None:
    KERNELS["cython"] = _compiled.pivot_loop

if _compiled is not None and os.environ.get("OTSBM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    KERNEL_NAME = "cython"
else:
    KERNEL_NAME = "python"

pivot_loop = KERNELS[KERNEL_NAME]


def use_kernel(name: str) -> None:
    """Switch the active kernel (``"cython"`` or ``"python"``) process-wide."""
    global pivot_loop, KERNEL_NAME
    if name not in KERNELS:
        raise ValueError(f"kernel {name!r} unavailable; have {sorted(KERNELS)}")
    KERNEL_NAME = name
    pivot_loop = KERNELS[name]


@contextmanager
def using_kernel(name: str):
    """Temporarily switch kernels; restores the previous one on exit."""
    previous = KERNEL_NAME
    use_kernel(name)
    try:
        yield
    finally:
        use_kernel(previous)
