"""Boundary extension of a density to maturities x <= 0.

The extension is the unique field on (x_min, 1) x V that restricts to the
source density on x > 0 and satisfies the reproduction recursion

    fext(x, v) = integral of fext(1 + x w / v, w) against the boundary
                 measure at v,                                   x <= 0.

The left half-strip splits into strips: strip i of column v covers
-i v/b < x <= -(i-1) v/b, and the recursion for a strip-i cell only reads
strips 0..i-1, so the field is built level by level.  The field generally
jumps across x = 0, so the two blocks are stored and interpolated
separately and every evaluation picks its block by the sign of x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import CoverageError, NumericsError, ValidationError
from .fields import DensityField
from .model import Model, ModelParams

_STRIP_SENTINEL = np.int32(2**30)


def strip_index(x, v, b):
    """Strip index of a point: 0 on 0 < x < 1, else the smallest i >= 1
    with x > -i v / b.  The boundary x = -(i-1) v/b belongs to strip i;
    in particular x = 0 lies in strip 1.
    """
    x_arr = np.asarray(x, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if np.any(x_arr >= 1.0):
        raise ValidationError("strip_index: x must be < 1")
    if np.any(v_arr <= 0):
        raise ValidationError("strip_index: v must be positive")
    z = -x_arr * b / v_arr
    idx = np.where(x_arr > 0, 0, np.floor(z).astype(np.int64) + 1)
    return int(idx) if np.isscalar(x) and np.isscalar(v) else idx


class ExtendedField:
    """Two-block storage of a boundary extension (built by build_extension)."""

    __slots__ = ("source", "model", "t_max", "dx", "max_level", "_omega_vm", "_ext_vm", "_strip_vm")

    def __init__(self, source: DensityField, model: Model, t_max: float,
                 omega_vm: np.ndarray, ext_vm: np.ndarray, strip_vm: np.ndarray,
                 max_level: int):
        self.source = source
        self.model = model
        self.t_max = float(t_max)
        self.dx = source.dx
        self.max_level = int(max_level)
        self._omega_vm = omega_vm
        self._ext_vm = ext_vm
        self._strip_vm = strip_vm

    @property
    def n_ext(self) -> int:
        return self._ext_vm.shape[1]

    @property
    def x_min(self) -> float:
        return -(self.n_ext - 0.5) * self.dx

    @property
    def x_ext_centers(self) -> np.ndarray:
        return -(self.n_ext - np.arange(self.n_ext) - 0.5) * self.dx

    @property
    def ext_values(self) -> np.ndarray:
        """(m, n_v) extension block; NaN marks cells outside the computed region."""
        return self._ext_vm.T

    @property
    def strip_indices(self) -> np.ndarray:
        return self._strip_vm.T

    def evaluate(self, y, cols) -> np.ndarray:
        """Interpolate the extended field at points y in velocity columns cols."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        cols = np.atleast_1d(np.asarray(cols))
        if np.any(y < self.x_min - 0.5 * self.dx) or np.any(y >= 1.0 + 0.5 * self.dx):
            raise CoverageError("evaluation outside the extended grid; rebuild with larger t_max")
        return backend.eval_blocks(self._omega_vm, self._ext_vm, self.dx, y, cols)

    def computed_cells(self):
        """(x, v, strip, value) arrays over the computed extension cells."""
        cc, rr = np.nonzero(self._strip_vm <= self.max_level)
        x = -(self.n_ext - rr - 0.5) * self.dx
        v = self.model.space.nodes[cc]
        return x, v, self._strip_vm[cc, rr], self._ext_vm[cc, rr]

    def strip_integrals(self, j_max: int) -> np.ndarray:
        """L1 mass of each strip 1..j_max (index 0 holds the Omega block)."""
        if j_max > self.max_level:
            raise ValidationError(
                f"strips beyond level {self.max_level} are not represented "
                f"(requested {j_max}); rebuild with larger t_max")
        out = np.zeros(j_max + 1)
        out[0] = self.source.l1_norm()
        if j_max == 0:
            return out
        cc, rr = np.nonzero(self._strip_vm <= j_max)
        s = self._strip_vm[cc, rr]
        w = np.abs(self._ext_vm[cc, rr]) * self.model.space.weights[cc] * self.dx
        out += np.bincount(s, weights=w, minlength=j_max + 1)[: j_max + 1]
        return out


def build_extension(model: Model, f: DensityField, t_max: float) -> ExtendedField:
    """Construct the boundary extension deep enough to evolve up to t_max."""
    if t_max < 0:
        raise ValidationError("t_max must be >= 0")
    if f.space is not model.space and not np.array_equal(f.space.nodes, model.space.nodes):
        raise ValidationError("density field and model use different velocity spaces")
    params = model.params
    space = model.space
    dx = f.dx
    b = params.b

    # One strip level beyond t_max * b so every T(t <= t_max) read, including
    # its interpolation brackets, lands on computed cells.
    max_level = max(1, math.ceil(t_max * b + 2.0 * dx - 1e-12))

    # Per-column row counts covering strips 1..max_level (plus one bracket row).
    m_cols = np.ceil(max_level * space.nodes / (b * dx) + 0.5).astype(np.int64) + 1
    m = int(m_cols.max())

    x_ext = -(m - np.arange(m) - 0.5) * dx
    z = (-x_ext[None, :]) * b / space.nodes[:, None]
    strip_vm = (np.floor(z) + 1).astype(np.int32)
    valid = (strip_vm <= max_level) & (np.arange(m)[None, :] >= (m - m_cols)[:, None])
    strip_vm = np.where(valid, strip_vm, _STRIP_SENTINEL)

    omega_vm = np.ascontiguousarray(f.values.T)
    ext_vm = np.full((space.n, m), np.nan)

    coef = None
    if params.p != 0.0:
        coef = np.ascontiguousarray(params.p * model._bm_cw / space.nodes[None, :])

    for level in range(1, max_level + 1):
        cc, rr = np.nonzero(strip_vm == level)
        if cc.size == 0:
            continue
        backend.sweep_level(omega_vm, ext_vm, strip_vm, dx, level, cc, rr,
                            space.nodes, coef, params.q)
        vals = ext_vm[cc, rr]
        bad = ~np.isfinite(vals)
        if bad.any():
            k = int(np.argmax(bad))
            x_bad = -(m - rr[k] - 0.5) * dx
            raise NumericsError(
                f"extension produced a non-finite value at x={x_bad:.6g}, "
                f"v={space.nodes[cc[k]]:.6g} (strip {level}); if reads fell left of "
                f"x_min, t_max is too small")

    omega_vm.setflags(write=False)
    ext_vm.setflags(write=False)
    strip_vm.setflags(write=False)
    return ExtendedField(f, model, t_max, omega_vm, ext_vm, strip_vm, max_level)


def weighted_norm(ext: ExtendedField, omega_rate: float, j_max: int) -> float:
    """max over 0 <= j <= j_max of exp(-omega j) * L1 mass of strips 0..j."""
    if omega_rate < 0:
        raise ValidationError("the decay rate must be >= 0")
    gammas = np.cumsum(ext.strip_integrals(j_max))
    j = np.arange(j_max + 1)
    return float(np.max(np.exp(-omega_rate * j) * gammas))


def extension_norm_constant(params: ModelParams, omega_rate: float) -> float:
    """The bound constant for the weighted extension norm, by regime of p+q."""
    r = params.reproduction_total
    if r < 1.0 - 1e-12:
        if omega_rate < 0:
            raise ValidationError("need omega >= 0 when p + q < 1")
        return 1.0 / (1.0 - r)
    if r > 1.0 + 1e-12:
        if omega_rate < math.log(r) - 1e-12:
            raise ValidationError(f"need omega >= log(p+q) = {math.log(r):.6g} when p + q > 1")
        return r / (r - 1.0)
    if omega_rate <= 0:
        raise ValidationError("need omega > 0 when p + q = 1")
    return math.exp(omega_rate - 1.0) / omega_rate


@dataclass(frozen=True)
class ExtensionBoundReport:
    weighted_norm: float
    m_omega: float
    bound: float
    passed: bool


def extension_bound_check(model: Model, f: DensityField, omega_rate: float,
                          j_max: int = 3, ext: ExtendedField | None = None,
                          tol: float = 1e-6) -> ExtensionBoundReport:
    """Check the weighted norm of the extension against M_omega * ||f||."""
    m_omega = extension_norm_constant(model.params, omega_rate)
    if ext is None:
        ext = build_extension(model, f, t_max=j_max / model.params.b)
    wn = weighted_norm(ext, omega_rate, j_max)
    bound = m_omega * f.l1_norm() + tol
    return ExtensionBoundReport(wn, m_omega, bound, wn <= bound)
