"""Edge-kernel backend selection.

Imports the compiled extension when available, otherwise the numpy
fallback. Set ``CCBCUT_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by tests that compare the two backends).
"""

import os

if os.environ.get("CCBCUT_PURE_PYTHON"):
    from ccbcut import _edgeops_py as _impl
else:
    try:
        from ccbcut import _edgeops as _impl  # type: ignore[attr-defined]
    except ImportError:
        from ccbcut import _edgeops_py as _impl

accumulate_degrees = _impl.accumulate_degrees
laplacian_matvec = _impl.laplacian_matvec
scaled_laplacian_matvec = _impl.scaled_laplacian_matvec
eliminated_apply = _impl.eliminated_apply
edge_sqnorms = _impl.edge_sqnorms
edge_abs_powsums = _impl.edge_abs_powsums


def backend_name():
    """Return 'compiled' or 'python' depending on the active backend."""
    return _impl.BACKEND
