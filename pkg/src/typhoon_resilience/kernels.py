"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
versions are used.  Setting ``TYPHOON_RESILIENCE_PURE=1`` forces numpy.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TYPHOON_RESILIENCE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        pass

wind_grid = _impl.wind_grid
unit_hazard_integrals = _impl.unit_hazard_integrals
best_split = _impl.best_split


def backends():
    """Available backends as a name -> module mapping."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
