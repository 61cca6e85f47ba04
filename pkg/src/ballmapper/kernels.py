"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the numpy
reference kernels are used. Set ``BALLMAPPER_BACKEND=python`` to force the
fallback (the benchmark and equivalence tests use both directly).
"""

import os

from . import _pykernels

EUCLIDEAN = _pykernels.EUCLIDEAN
MANHATTAN = _pykernels.MANHATTAN

_compiled = None
if os.environ.get("BALLMAPPER_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def compiled_kernels():
    """The compiled kernel module, or None when it is unavailable."""
    if _compiled is not None:
        return _compiled
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


point_distance = _impl.point_distance
greedy_net_scan = _impl.greedy_net_scan
ball_edges = _impl.ball_edges
