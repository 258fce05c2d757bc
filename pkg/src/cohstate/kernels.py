"""Backend selection for the stepping kernels.

The compiled Cython extension is used when importable; the NumPy fallback
otherwise. ``COHSTATE_KERNELS=python`` forces the fallback (useful for the
benchmark and for debugging).
"""

import os

if os.environ.get("COHSTATE_KERNELS", "").lower() == "python":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
unitary_steps = _impl.unitary_steps
rk4_linear_steps = _impl.rk4_linear_steps


def available_backends():
    """Names of importable kernel backends (always includes 'python')."""
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names
