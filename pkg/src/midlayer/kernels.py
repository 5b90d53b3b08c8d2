"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set ``MIDLAYER_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
implementation in use. Both implementations return identical results; the
wrappers below route inputs the compiled code cannot represent (counts that
may overflow 64 bits, vertex masks wider than 64 bits) to the fallback.
"""

from __future__ import annotations

import math
import os

from . import _kernels_py

_compiled = None
if not os.environ.get("MIDLAYER_PURE_PYTHON"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

_U64_SAFE = 1 << 63


def count_list_colorings(back, last, lists, *, backend=None):
    impl = _pick(backend)
    if impl is not _kernels_py and math.prod(len(x) for x in lists) >= _U64_SAFE:
        impl = _kernels_py
    return impl.count_list_colorings(back, last, lists)


def enumerate_list_colorings(back, lists, *, backend=None):
    return _pick(backend).enumerate_list_colorings(back, lists)


def g2_components(mask, ball2, *, backend=None):
    impl = _pick(backend)
    if impl is not _kernels_py and len(ball2) > 64:
        impl = _kernels_py
    return impl.g2_components(mask, ball2)


def _pick(backend):
    if backend is None:
        return _compiled if _compiled is not None else _kernels_py
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")
