"""Backend selection for the hot radial kernel.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``LOGDIFF_PURE`` is set to a non-empty value other than
``0``, the numpy/scipy implementation is used. Both expose
``radial_newton`` and ``tridiagonal_solve`` with identical semantics.
"""
import os

from . import _kernels_py as pure

compiled = None
if os.environ.get("LOGDIFF_PURE", "") in ("", "0"):
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

radial_newton = backend.radial_newton
tridiagonal_solve = backend.tridiagonal_solve
