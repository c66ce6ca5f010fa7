"""The adjoint semigroup on bounded fields and operator-norm certificates.

Applied to the constant field 1 the adjoint computes the expected
descendant mass of each state, whose grid maximum is the operator norm of
T(t).  Longer times compose n = ceil(t b) small steps of s = t / n each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ValidationError
from .model import Model, VelocitySpace


class DualField:
    """Grid samples of a bounded function on Omega, shape (n_x, n_v)."""

    __slots__ = ("values", "space", "n_x")

    def __init__(self, values: np.ndarray, space: VelocitySpace):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[1] != space.n:
            raise ValidationError(f"dual field must have shape (n_x, {space.n}), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("dual field contains non-finite values")
        values = values.copy()
        values.setflags(write=False)
        self.values = values
        self.space = space
        self.n_x = values.shape[0]

    @property
    def dx(self) -> float:
        return 1.0 / self.n_x

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def max(self) -> float:
        return float(np.max(self.values))

    @classmethod
    def ones(cls, space: VelocitySpace, n_x: int) -> "DualField":
        return cls(np.ones((n_x, space.n)), space)


def x_daughter(x: float, v: float, w: float, t: float) -> float:
    """Maturity at time t of the potential daughter (speed w) of a cell at
    (x, v) at time 0: (x + t v - 1) w / v.  Negative means the cell will
    not have divided by time t."""
    if v <= 0:
        raise ValidationError("x_daughter: v must be positive")
    return (x + t * v - 1.0) * w / v


def apply_dual_small(model: Model, phi: DualField, t: float) -> DualField:
    """One adjoint step, valid for 0 <= t <= 1/b."""
    b = model.params.b
    if not (0.0 <= t <= 1.0 / b + 1e-12):
        raise ValidationError(f"apply_dual_small requires 0 <= t <= 1/b = {1.0 / b:.6g}, got {t}")
    if t == 0.0:
        return phi
    phi_vm = np.ascontiguousarray(phi.values.T)
    out_vm = backend.dual_small_step(phi_vm, phi.dx, t, model.space.nodes,
                                     model.space.weights, model.kmat,
                                     model.params.p, model.params.q)
    return DualField(out_vm.T, model.space)


def apply_dual(model: Model, phi: DualField, t: float) -> DualField:
    """n-fold composition of small adjoint steps with s = t/n, n = ceil(t b)."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    if t == 0:
        return DualField(phi.values, phi.space)
    n = max(1, math.ceil(t * model.params.b - 1e-12))
    s = t / n
    out = phi
    for _ in range(n):
        out = apply_dual_small(model, out, s)
    return out


@dataclass(frozen=True)
class NormCertificate:
    t: float
    norm: float
    bound: float
    bound_kind: str
    passed: bool
    steps: int


def _norm_bound(model: Model, t: float) -> tuple[float, str]:
    p, q, a, b = model.params.p, model.params.q, model.params.a, model.params.b
    r = p + q
    if r > 1.0 + 1e-12:
        return r ** math.ceil(t * b - 1e-12) if t > 0 else 1.0, "growth_ceil_tb"
    if r >= 1.0 - 1e-12:
        return 1.0, "markov"
    if a > 0 and t * a >= 1.0:
        return r ** math.floor(t * a + 1e-12), "decay_floor_ta"
    return 1.0, "contraction"


def operator_norm(model: Model, t: float, n_x: int = 400, tol: float = 1e-9) -> NormCertificate:
    """Operator norm of T(t) as the grid maximum of the adjoint of the
    constant field 1, with the applicable growth/decay bound."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    ones = DualField.ones(model.space, n_x)
    out = apply_dual(model, ones, t)
    norm = out.max()
    bound, kind = _norm_bound(model, t)
    steps = max(1, math.ceil(t * model.params.b - 1e-12)) if t > 0 else 0
    return NormCertificate(float(t), norm, bound, kind, norm <= bound + tol, steps)


def j_index(x: float, v: float, t: float, a: float) -> int:
    """Least i >= 0 such that a cell at (x, v) will not divide within
    t - i/a time units."""
    if a <= 0:
        raise ValidationError("j_index requires a > 0")
    z = x + t * v - 1.0
    if z < 0:
        return 0
    return int(math.floor(a * z / v)) + 1


@dataclass(frozen=True)
class VEpsilonDiagnostic:
    n: int
    d_n: float
    profile: np.ndarray
    sup_m: float
    sup_location: float
    equality_predicted: bool
    branch: str


def v_epsilon_diagnostic(model: Model, n: int, near_one_tol: float = 0.02) -> VEpsilonDiagnostic:
    """Numeric evidence for norm equality ||T(n/b)|| = (p+q)^n.

    Computes m(v) = integral of the dual kernel over mother velocities in
    (d_n, b) and predicts equality when sup m is within near_one_tol of 1
    on the relevant node set.  Grid evidence only, not a certificate.
    """
    if n < 2:
        raise ValidationError("the diagnostic is defined for n >= 2")
    if not model.space.is_continuous:
        raise ValidationError("the diagnostic requires a continuous velocity space")
    p, q, a, b = model.params.p, model.params.q, model.params.a, model.params.b
    d_n = max(a, n * b / (n + 1.0))
    nodes = model.space.nodes
    tail = nodes > d_n
    # m(v) = int_{d_n}^b k*(w, v) dw = int over mothers w > d_n of k(v, w)
    profile = (model.kmat * (model.space.weights * tail)[None, :]).sum(axis=1)
    if p == 0.0:
        return VEpsilonDiagnostic(n, d_n, profile, float(profile.max()),
                                  float(nodes[int(np.argmax(profile))]), True, "p_zero")
    if q == 0.0:
        sup_m = float(profile.max())
        loc = float(nodes[int(np.argmax(profile))])
        return VEpsilonDiagnostic(n, d_n, profile, sup_m, loc,
                                  sup_m >= 1.0 - near_one_tol, "q_zero")
    if not tail.any():
        return VEpsilonDiagnostic(n, d_n, profile, 0.0, float("nan"), False, "pq_positive")
    sub = profile[tail]
    sup_m = float(sub.max())
    loc = float(nodes[tail][int(np.argmax(sub))])
    return VEpsilonDiagnostic(n, d_n, profile, sup_m, loc,
                              sup_m >= 1.0 - near_one_tol, "pq_positive")
