"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is used.  Setting ``CHIRAL_SKYRMION_PURE_PYTHON=1`` forces the
fallback (useful for benchmarking and for checking both paths agree).
"""

from __future__ import annotations

import os

from . import _fallback

_FORCE_PURE = os.environ.get("CHIRAL_SKYRMION_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PURE:
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        kernels = _fallback
        BACKEND = "python"

J0, J1, I0E, I1E, K0E, K1E = _fallback.J0, _fallback.J1, _fallback.I0E, _fallback.I1E, _fallback.K0E, _fallback.K1E

bessel_array = kernels.bessel_array
thomas = kernels.thomas
separable_sweep = kernels.separable_sweep
hankel_matvec = kernels.hankel_matvec

__all__ = [
    "BACKEND",
    "kernels",
    "bessel_array",
    "thomas",
    "separable_sweep",
    "hankel_matvec",
    "J0",
    "J1",
    "I0E",
    "I1E",
    "K0E",
    "K1E",
]
