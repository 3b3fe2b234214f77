"""Kernel backend selection.

Two interchangeable implementations of the hot loops exist: a compiled
Cython extension (``_ckern``) and a numpy/scipy fallback (``fallback``).
``GRAPHPROP_BACKEND`` picks one:

- ``auto`` (default): compiled when importable, else fallback;
- ``compiled``: require the extension, raise if missing;
- ``fallback``: force the numpy/scipy path.

``BACKEND`` records the active choice. Both backends produce identical
results (bit-identical for the integer kernels; tests pin the float kernels).
"""

from __future__ import annotations

import os

from . import fallback

_requested = os.environ.get("GRAPHPROP_BACKEND", "auto")
if _requested not in ("auto", "compiled", "fallback"):
    raise ImportError(
        f"GRAPHPROP_BACKEND must be auto, compiled, or fallback; got {_requested!r}"
    )

_impl = fallback
BACKEND = "fallback"
if _requested in ("auto", "compiled"):
    try:
        from . import _ckern  # type: ignore[attr-defined]

        _impl = _ckern
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise

SAMPLE_WINDOW = fallback.SAMPLE_WINDOW
MIN_WINDOW_ACCEPTS = fallback.MIN_WINDOW_ACCEPTS

pcg_fill_u32 = _impl.pcg_fill_u32
spmm_csr = _impl.spmm_csr
lazy_spmm = _impl.lazy_spmm
sample_negative = _impl.sample_negative
jacobi_eigh = _impl.jacobi_eigh
