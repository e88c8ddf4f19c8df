"""Import-time selection of the fitting kernels.

The compiled extension is preferred when importable; otherwise the pure
Python twin takes over transparently.  ``CODEREL_BACKEND=python`` or
``CODEREL_BACKEND=compiled`` forces a choice (the latter raises if the
extension is missing), which the benchmark and the cross-backend tests
rely on.
"""

from __future__ import annotations

import os

_forced = os.environ.get("CODEREL_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _pykern as kernels
elif _forced == "compiled":
    from . import _ckern as kernels  # type: ignore[no-redef]
elif _forced == "":
    try:
        from . import _ckern as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _pykern as kernels
else:
    raise ImportError(f"unknown CODEREL_BACKEND value: {_forced!r}")

BACKEND = kernels.BACKEND_NAME

__all__ = ["kernels", "BACKEND"]
