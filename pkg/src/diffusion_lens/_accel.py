"""Optional numba acceleration for the hot numeric kernels.

Set DIFFUSION_LENS_JIT=0 to force the pure-Python/numpy fallback path
(useful for debugging; results are identical either way).
DIFFUSION_LENS_THREADS caps numba's thread pool when the JIT is active.
"""

import os


def _flag(name, default=True):
    val = os.environ.get(name)
    if val is None:
        return default
    return val.strip().lower() not in ("0", "false", "no", "off")


JIT_ENABLED = _flag("DIFFUSION_LENS_JIT", True)

if JIT_ENABLED:
    try:
        from numba import njit, prange  # noqa: F401
    except ImportError:  # pragma: no cover - numba is a declared dependency
        JIT_ENABLED = False

if not JIT_ENABLED:
    def njit(func=None, **kwargs):
        if callable(func):
            return func

        def wrap(f):
            return f

        return wrap

    prange = range


def apply_thread_cap():
    """Honor DIFFUSION_LENS_THREADS when the JIT path is active."""
    cap = os.environ.get("DIFFUSION_LENS_THREADS")
    if not cap or not JIT_ENABLED:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        return
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
