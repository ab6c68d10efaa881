"""Kernel selection: compiled core when importable, numpy fallback otherwise.

Set ``KMVCOUNT_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("KMVCOUNT_PURE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND: str = kernels.BACKEND
insert_value = kernels.insert_value
insert_values = kernels.insert_values

__all__ = ["BACKEND", "insert_value", "insert_values", "kernels"]
