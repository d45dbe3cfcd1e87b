"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the NumPy
fallback is bit-identical, just slower. Set ``PATCHFORGE_NO_EXT=1`` to force
the fallback (used by the benchmark and the backend-equivalence tests).
"""

import os

__all__ = ["backend_name", "blend", "fill_rect_max", "fill_circle_max"]

_force_py = os.environ.get("PATCHFORGE_NO_EXT", "") not in ("", "0")

if _force_py:
    from patchforge import _kernels_py as _impl
    _backend = "python"
else:
    try:
        from patchforge import _kernels as _impl  # type: ignore[no-redef]
        _backend = "compiled"
    except ImportError:
        from patchforge import _kernels_py as _impl  # type: ignore[no-redef]
        _backend = "python"


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return _backend


blend = _impl.blend
fill_rect_max = _impl.fill_rect_max
fill_circle_max = _impl.fill_circle_max
