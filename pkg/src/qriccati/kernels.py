"""Backend selection for the hot integration loops.

numba is used when importable unless ``QRICCATI_DISABLE_NUMBA`` is set to a
non-empty value other than ``0`` (``NUMBA_DISABLE_JIT=1`` also forces the
numpy path). Both backends expose ``integrate``, ``integrate_fixed`` and
``rhs_single`` with identical signatures.
"""
import os

from . import _kernels_numpy


def _numba_requested() -> bool:
    flag = os.environ.get("QRICCATI_DISABLE_NUMBA", "")
    if flag and flag != "0":
        return False
    return os.environ.get("NUMBA_DISABLE_JIT", "0") in ("", "0")


BACKEND = "numpy"
_impl = _kernels_numpy
if _numba_requested():
    try:
        from . import _kernels_numba as _impl  # noqa: F811

        BACKEND = "numba"
    except ImportError:
        _impl = _kernels_numpy

integrate = _impl.integrate
integrate_fixed = _impl.integrate_fixed
rhs_single = _impl.rhs_single


def get_backend(name: str):
    """Return the kernel module for ``"numba"`` or ``"numpy"`` explicitly."""
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    raise ValueError(f"unknown backend {name!r}")
