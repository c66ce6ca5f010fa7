"""Backend selection: compiled kernels when importable, numpy otherwise.

``ROTENBERG_BACKEND=python`` forces the numpy twin, ``=compiled`` requires
the extension module.  ``ROTENBERG_THREADS`` caps the compiled backend's
parallelism (0 lets OpenMP decide).
"""

from __future__ import annotations

import os

_requested = os.environ.get("ROTENBERG_BACKEND", "auto").strip().lower()

if _requested in ("auto", "", "c", "compiled"):
    try:
        from . import _speedups as _impl
        HAVE_COMPILED = True
    except ImportError:
        if _requested in ("c", "compiled"):
            raise
        from . import _kernels_py as _impl
        HAVE_COMPILED = False
elif _requested in ("py", "python"):
    from . import _kernels_py as _impl
    HAVE_COMPILED = False
else:
    raise RuntimeError(f"ROTENBERG_BACKEND={_requested!r} not recognized (use auto|compiled|python)")

NAME = _impl.BACKEND_NAME


def threads() -> int:
    try:
        return max(0, int(os.environ.get("ROTENBERG_THREADS", "0")))
    except ValueError:
        return 0


def sweep_level(omega, ext, strip, dx, level, cc, rr, nodes, coef, q):
    return _impl.sweep_level(omega, ext, strip, dx, level, cc, rr, nodes, coef, q,
                             num_threads=threads())


def eval_blocks(omega, ext, dx, y, cols):
    return _impl.eval_blocks(omega, ext, dx, y, cols, num_threads=threads())


def transport_apply(omega, ext, dx, t, nodes):
    return _impl.transport_apply(omega, ext, dx, t, nodes, num_threads=threads())


def small_t_apply(omega, dx, t, nodes, weights, kmat, p, q):
    return _impl.small_t_apply(omega, dx, t, nodes, weights, kmat, p, q,
                               num_threads=threads())


def dual_small_step(phi, dx, t, nodes, weights, kmat, p, q):
    return _impl.dual_small_step(phi, dx, t, nodes, weights, kmat, p, q,
                                 num_threads=threads())
