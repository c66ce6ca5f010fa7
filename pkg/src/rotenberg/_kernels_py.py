"""Pure-numpy grid kernels (fallback backend).

Mirrors the compiled module ``rotenberg._speedups``; ``rotenberg.backend``
picks one of the two at import time.  Arrays are velocity-major:

    omega[c, i]   field values on Omega, columns c over velocity nodes,
                  maturity centers x_i = (i + 1/2) dx
    ext[c, r]     extension values, centers x_r = -(m - r - 1/2) dx
                  (ascending in r, the last row sits at -dx/2)
    strip[c, r]   strip index of each extension center; cells outside the
                  computed region carry a large sentinel

All interpolation is clamped linear interpolation in x.  During the strip
sweep a read whose left bracket lies in a strip not yet computed clamps to
the right bracket; after construction the same clamp is keyed off NaN.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _interp_one(col: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Clamped linear interpolation of one column at fractional indices."""
    n = col.shape[0]
    i0 = np.clip(np.floor(pos).astype(np.intp), 0, n - 2)
    th = np.clip(pos - i0, 0.0, 1.0)
    a = col[i0]
    return a + th * (col[i0 + 1] - a)


def _interp_cols(arr: np.ndarray, pos: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Same as _interp_one but with a per-point column index."""
    n = arr.shape[1]
    i0 = np.clip(np.floor(pos).astype(np.intp), 0, n - 2)
    th = np.clip(pos - i0, 0.0, 1.0)
    a = arr[cols, i0]
    return a + th * (arr[cols, i0 + 1] - a)


def _omega_pos(y: np.ndarray, dx: float) -> np.ndarray:
    return y / dx - 0.5


def _ext_pos(y: np.ndarray, dx: float, m: int) -> np.ndarray:
    return (y + (m - 0.5) * dx) / dx


def sweep_level(omega, ext, strip, dx, level, cc, rr, nodes, coef, q, num_threads=0):
    """Fill all extension cells of one strip level in place.

    cc, rr index the cells of this level; coef[j, c] carries the full
    integral-branch weight p * omega_j * w_j * k(w_j, v_c) / v_c (or None
    when p == 0).  Reads only touch strips < level, clamping interpolation
    brackets that fall inside the current level.
    """
    m = ext.shape[1]
    x = -(m - rr - 0.5) * dx
    acc = np.zeros(cc.shape[0])
    if q != 0.0:
        y = 1.0 + x
        vals = np.empty_like(y)
        posm = y > 0
        if posm.any():
            vals[posm] = _interp_cols(omega, _omega_pos(y[posm], dx), cc[posm])
        negm = ~posm
        if negm.any():
            yy = y[negm]
            c2 = cc[negm]
            pos = _ext_pos(yy, dx, m)
            r0 = np.clip(np.floor(pos).astype(np.intp), 0, m - 2)
            th = np.clip(pos - r0, 0.0, 1.0)
            left = ext[c2, r0]
            right = ext[c2, r0 + 1]
            bad = strip[c2, r0] > level - 1
            vals[negm] = np.where(bad, right, left + th * (right - left))
        acc += q * vals
    if coef is not None:
        xv = x / nodes[cc]
        for j in range(nodes.shape[0]):
            y = 1.0 + xv * nodes[j]
            vals = np.empty_like(y)
            posm = y > 0
            if posm.any():
                vals[posm] = _interp_one(omega[j], _omega_pos(y[posm], dx))
            negm = ~posm
            if negm.any():
                yy = y[negm]
                pos = _ext_pos(yy, dx, m)
                r0 = np.clip(np.floor(pos).astype(np.intp), 0, m - 2)
                th = np.clip(pos - r0, 0.0, 1.0)
                ecol = ext[j]
                left = ecol[r0]
                right = ecol[r0 + 1]
                bad = strip[j, r0] > level - 1
                vals[negm] = np.where(bad, right, left + th * (right - left))
            acc += coef[j, cc] * vals
    ext[cc, rr] = acc


def eval_blocks(omega, ext, dx, y, cols, num_threads=0):
    """Evaluate the two-block field at arbitrary points (post-construction).

    The block is chosen by the sign of y.  Near the truncation frontier a
    NaN bracket clamps to its finite neighbour; fully uncovered reads stay
    NaN for the caller to detect.
    """
    y = np.asarray(y, dtype=float)
    cols = np.asarray(cols)
    out = np.empty(y.shape)
    posm = y > 0
    if posm.any():
        out[posm] = _interp_cols(omega, _omega_pos(y[posm], dx), cols[posm])
    negm = ~posm
    if negm.any():
        m = ext.shape[1]
        yy = y[negm]
        c2 = cols[negm]
        pos = _ext_pos(yy, dx, m)
        r0 = np.clip(np.floor(pos).astype(np.intp), 0, m - 2)
        th = np.clip(pos - r0, 0.0, 1.0)
        left = ext[c2, r0]
        right = ext[c2, r0 + 1]
        val = left + th * (right - left)
        badl = np.isnan(left)
        badr = np.isnan(right)
        val = np.where(badl, right, val)
        val = np.where(badr & ~badl, left, val)
        out[negm] = val
    return out


def transport_apply(omega, ext, dx, t, nodes, num_threads=0):
    """T(t) on the Omega grid: sample the extended field at x - t v."""
    n_v, n_x = omega.shape
    xs = (np.arange(n_x) + 0.5) * dx
    y = xs[None, :] - t * nodes[:, None]
    cols = np.broadcast_to(np.arange(n_v)[:, None], y.shape)
    return eval_blocks(omega, ext, dx, y.ravel(), cols.ravel()).reshape(n_v, n_x)


def small_t_apply(omega, dx, t, nodes, weights, kmat, p, q, num_threads=0):
    """Extension-free evolution for t <= 1/b.

    Pure transport where x > t v; the reproduction integral over mother
    states everywhere else.  All reads stay inside Omega.
    """
    n_v, n_x = omega.shape
    xs = (np.arange(n_x) + 0.5) * dx
    y0 = xs[None, :] - t * nodes[:, None]
    out = np.empty((n_v, n_x))
    free = y0 > 0
    for c in range(n_v):
        mcol = free[c]
        if mcol.any():
            out[c, mcol] = _interp_one(omega[c], _omega_pos(y0[c, mcol], dx))
    cc, ii = np.nonzero(~free)
    if cc.size:
        acc = np.zeros(cc.size)
        if q != 0.0:
            acc += q * _interp_cols(omega, _omega_pos(1.0 + y0[cc, ii], dx), cc)
        if p != 0.0:
            xv = xs[ii] / nodes[cc]
            for j in range(n_v):
                ym = 1.0 + (xv - t) * nodes[j]
                vals = _interp_one(omega[j], _omega_pos(ym, dx))
                acc += (p * weights[j] * nodes[j]) * kmat[j, cc] / nodes[cc] * vals
        out[cc, ii] = acc
    return out


def dual_small_step(phi, dx, t, nodes, weights, kmat, p, q, num_threads=0):
    """One adjoint step for t <= 1/b.

    Where x + t v < 1 the cell will not divide and the value is a pure
    shift; elsewhere it is the dual reproduction integral over daughter
    states (x + t v - 1) w / v.
    """
    n_v, n_x = phi.shape
    xs = (np.arange(n_x) + 0.5) * dx
    z = xs[None, :] + t * nodes[:, None]
    out = np.empty((n_v, n_x))
    keep = z < 1.0
    for c in range(n_v):
        mcol = keep[c]
        if mcol.any():
            out[c, mcol] = _interp_one(phi[c], _omega_pos(z[c, mcol], dx))
    cc, ii = np.nonzero(~keep)
    if cc.size:
        zz = z[cc, ii] - 1.0
        acc = np.zeros(cc.size)
        if q != 0.0:
            acc += q * _interp_cols(phi, _omega_pos(zz, dx), cc)
        if p != 0.0:
            zv = zz / nodes[cc]
            for j in range(n_v):
                vals = _interp_one(phi[j], _omega_pos(zv * nodes[j], dx))
                acc += (p * weights[j]) * kmat[cc, j] * vals
        out[cc, ii] = acc
    return out
