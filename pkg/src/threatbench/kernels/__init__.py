"""Backend selection for the hot tree kernels.

Set ``THREATBENCH_KERNELS=numpy`` to force the pure-numpy reference path,
``numba`` to require the compiled path, or leave unset/``auto`` to use
numba when importable and fall back to numpy otherwise.  Unweighted trees
are bit-identical across backends; see ``benchmarks/kernel_bench.py`` for
a speed comparison.
"""

from __future__ import annotations

import os

from . import numpy_impl

_requested = os.environ.get("THREATBENCH_KERNELS", "auto").lower()

if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"THREATBENCH_KERNELS must be auto, numba or numpy, not {_requested!r}")

if _requested == "numpy":
    _impl = numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _impl = numpy_impl
        BACKEND = "numpy"

build_tree = _impl.build_tree
build_tree_weighted = _impl.build_tree_weighted
apply_tree = _impl.apply_tree


def backend_name():
    return BACKEND
