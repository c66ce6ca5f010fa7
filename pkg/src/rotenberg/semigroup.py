"""Exact-in-time evaluation of the transport semigroup.

T(t) f (x, v) = fext(x - t v, v): all time dependence is an exact shift
along characteristics, so the only numerical error is spatial
(interpolation and velocity quadrature).  The x = t v interface uses the
extension's block rule: the boundary-integral branch owns x <= t v.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import CoverageError, NumericsError, ValidationError
from .extension import ExtendedField, build_extension
from .fields import DensityField
from .model import Model


def x_mother(x: float, v: float, w: float, t: float) -> float:
    """Maturity at time 0 of the potential mother (speed w) of a cell at
    (x, v) at time t: 1 + x w / v - t w."""
    if v <= 0:
        raise ValidationError("x_mother: v must be positive")
    return 1.0 + x * w / v - t * w


@dataclass(frozen=True)
class EvolutionResult:
    t: float
    field: DensityField
    mass: float
    meta: dict = field(default_factory=dict)


def apply(model: Model, ext: ExtendedField, t: float) -> EvolutionResult:
    """Evaluate T(t) from a prebuilt extension (requires t <= its t_max)."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    if t > ext.t_max + 1e-12:
        raise CoverageError(
            f"extension covers t <= {ext.t_max:.6g} but t = {t:.6g} was requested; "
            "rebuild the extension with a larger t_max")
    if t == 0.0:
        f = ext.source
        meta = {"n_x": f.n_x, "n_v": model.space.n, "x_min": ext.x_min,
                "t_max": ext.t_max, "backend": backend.NAME}
        return EvolutionResult(0.0, f, f.mass(), meta)
    out_vm = backend.transport_apply(ext._omega_vm, ext._ext_vm, ext.dx, t,
                                     model.space.nodes)
    if not np.all(np.isfinite(out_vm)):
        c, i = np.argwhere(~np.isfinite(out_vm))[0]
        raise NumericsError(
            f"evolution produced a non-finite value at x={(i + 0.5) * ext.dx:.6g}, "
            f"v={model.space.nodes[c]:.6g}")
    out = DensityField(out_vm.T, model.space)
    meta = {"n_x": out.n_x, "n_v": model.space.n, "x_min": ext.x_min,
            "t_max": ext.t_max, "backend": backend.NAME}
    return EvolutionResult(float(t), out, out.mass(), meta)


def apply_small_t(model: Model, f: DensityField, t: float) -> DensityField:
    """Extension-free evolution, valid for 0 <= t <= 1/b.

    Serves as an independent second route for cross-validating apply():
    it evaluates the boundary integral directly on the source field.
    """
    b = model.params.b
    if not (0.0 <= t <= 1.0 / b + 1e-12):
        raise ValidationError(f"apply_small_t requires 0 <= t <= 1/b = {1.0 / b:.6g}, got {t}")
    if t == 0.0:
        return f
    omega_vm = np.ascontiguousarray(f.values.T)
    out_vm = backend.small_t_apply(omega_vm, f.dx, t, model.space.nodes,
                                   model.space.weights, model.kmat,
                                   model.params.p, model.params.q)
    return DensityField(out_vm.T, model.space)


def trajectory(model: Model, f: DensityField, times) -> list[EvolutionResult]:
    """Evolve through an ascending list of times off one extension."""
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValidationError("times must be nonnegative and ascending")
    if not times:
        return []
    ext = build_extension(model, f, t_max=times[-1])
    return [apply(model, ext, t) for t in times]


def semigroup_law_check(model: Model, f: DensityField, s: float, t: float) -> float:
    """L1 deviation between T(s+t) f and T(s) applied to T(t) f, where the
    inner result is re-extended from scratch."""
    if s < 0 or t < 0:
        raise ValidationError("s and t must be >= 0")
    ext = build_extension(model, f, t_max=s + t)
    lhs = apply(model, ext, s + t).field
    inner = apply(model, ext, t).field
    rhs = apply(model, build_extension(model, inner, t_max=s), s).field
    return (lhs - rhs).l1_norm()
