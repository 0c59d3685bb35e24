"""Backend selection for the history-sum kernels.

The compiled extension is used when it imports cleanly; otherwise, or when
``FRACHJ_PURE_PYTHON=1``, the NumPy reference implementation is used.
``FRACHJ_NUM_THREADS`` caps the OpenMP threads of the compiled backend
(default: all cores).
"""

from __future__ import annotations

import os

if os.environ.get("FRACHJ_PURE_PYTHON", "") not in ("", "0"):
    from frachj import _kernels_py as _impl
else:
    try:
        from frachj import _kernels as _impl
    except ImportError:  # extension not built
        from frachj import _kernels_py as _impl

BACKEND: str = _impl.BACKEND

l1_weights_row = _impl.l1_weights_row
ordered_dot = _impl.ordered_dot
l1_apply_all = _impl.l1_apply_all
l1_history = _impl.l1_history
abel_at_end = _impl.abel_at_end
abel_all = _impl.abel_all
sweep_1d = _impl.sweep_1d
sweep_2d = _impl.sweep_2d
holder_max = _impl.holder_max


def _default_threads() -> int:
    raw = os.environ.get("FRACHJ_NUM_THREADS", "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


_impl.set_num_threads(_default_threads())
