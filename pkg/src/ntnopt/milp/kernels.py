"""Import-time selection of the pivot kernels.

Prefers the compiled `_speedups` extension; falls back to the numpy
implementation when the extension is missing or `NTNOPT_PURE_PY=1` is set.
"""
from __future__ import annotations

import os

if os.environ.get("NTNOPT_PURE_PY", "") == "1":
    from . import _fallback as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

AT_BASIC = _impl.AT_BASIC
AT_LOWER = _impl.AT_LOWER
AT_UPPER = _impl.AT_UPPER
ACCELERATED: bool = _impl.ACCELERATED

eliminate = _impl.eliminate
choose_entering = _impl.choose_entering
ratio_test = _impl.ratio_test
