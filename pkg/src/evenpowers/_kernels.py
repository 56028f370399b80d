"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it imports; setting
``EVENPOWERS_PURE=1`` forces the numpy fallback.  Both modules expose the
same functions with the same argument conventions.
"""

import os

from . import _pykernels

if os.environ.get("EVENPOWERS_PURE"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND

lpf_sieve = _impl.lpf_sieve
power_residue_counts = _impl.power_residue_counts
weyl_sums = _impl.weyl_sums
expsum_phases = _impl.expsum_phases
sumset_counts = _impl.sumset_counts
count_nested = _impl.count_nested


def backends():
    """Return every importable backend module, fallback first."""
    mods = [_pykernels]
    try:
        from . import _ckernels
        mods.append(_ckernels)
    except ImportError:
        pass
    return mods
