"""Model parameters, velocity spaces, redistribution kernels and the
reproduction boundary measure.

A cell is described by a maturity x in (0,1) and a maturation speed
v in V = (a,b).  At division (x = 1) a daughter restarts at x = 0 with a
velocity drawn from the kernel k (p-branch) or inherited (q-branch).
Everything here is immutable after construction; operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError

KernelFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelParams:
    """Scalar model parameters.

    a, b    velocity range bounds, 0 <= a < b < inf
    p       mean viable daughters per mitosis, velocity-redistributing branch
    q       mean viable daughters per mitosis, velocity-inheriting branch
    """

    a: float
    b: float
    p: float
    q: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b < math.inf):
            raise ValidationError(f"params: need 0 <= a < b < inf, got a={self.a}, b={self.b}")
        if self.p < 0 or self.q < 0:
            raise ValidationError(f"params: p and q must be >= 0, got p={self.p}, q={self.q}")
        if self.p + self.q <= 0:
            raise ValidationError("params: p + q must be > 0")

    @property
    def reproduction_total(self) -> float:
        return self.p + self.q


class VelocitySpace:
    """Quadrature representation of the velocity measure space (V, nu).

    Continuous spaces use the composite midpoint rule on a uniform grid;
    nodes never touch a or b, which keeps 1/v finite even when a = 0.
    Discrete spaces carry explicit node masses and integrate exactly.
    """

    __slots__ = ("nodes", "weights", "kind", "a", "b", "n")

    def __init__(self, nodes: np.ndarray, weights: np.ndarray, kind: str, a: float, b: float):
        nodes = np.asarray(nodes, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValidationError("velocity space: nodes and weights must be equal-length 1-D arrays")
        if np.any(np.diff(nodes) <= 0):
            raise ValidationError("velocity space: nodes must be strictly increasing")
        if not (a < nodes[0] and nodes[-1] < b):
            raise ValidationError(
                f"velocity space: nodes must lie strictly inside ({a}, {b}); got range "
                f"[{nodes[0]}, {nodes[-1]}]"
            )
        if np.any(weights <= 0):
            raise ValidationError("velocity space: weights must be strictly positive")
        if kind not in ("continuous", "discrete"):
            raise ValidationError(f"velocity space: unknown kind {kind!r}")
        if kind == "continuous":
            span = b - a
            if abs(float(weights.sum()) - span) > 2.0 * span / nodes.size + 1e-12:
                raise ValidationError("velocity space: weights do not sum to the interval length")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "n", int(nodes.size))

    def __setattr__(self, name, value):
        raise AttributeError("VelocitySpace is immutable")

    @classmethod
    def midpoint(cls, params: ModelParams, n: int) -> "VelocitySpace":
        """Uniform midpoint rule with n cells on (a, b)."""
        if n < 1:
            raise ValidationError("velocity space: need at least one node")
        dv = (params.b - params.a) / n
        nodes = params.a + (np.arange(n) + 0.5) * dv
        return cls(nodes, np.full(n, dv), "continuous", params.a, params.b)

    @classmethod
    def discrete(cls, params: ModelParams, nodes: Sequence[float], masses: Sequence[float]) -> "VelocitySpace":
        return cls(np.asarray(nodes, float), np.asarray(masses, float), "discrete", params.a, params.b)

    @property
    def is_continuous(self) -> bool:
        return self.kind == "continuous"

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of a node function against nu."""
        return float(np.sum(self.weights * np.asarray(values, float)))

    def refined(self, factor: int) -> "VelocitySpace":
        """Same interval with `factor` times more midpoint cells."""
        if not self.is_continuous:
            raise ValidationError("only continuous velocity spaces can be refined")
        dv = (self.b - self.a) / (self.n * factor)
        nodes = self.a + (np.arange(self.n * factor) + 0.5) * dv
        return VelocitySpace(nodes, np.full(self.n * factor, dv), "continuous", self.a, self.b)

    def node_index(self, v: float) -> int:
        """Index of the node equal to v (within rounding); error otherwise."""
        i = int(np.argmin(np.abs(self.nodes - v)))
        scale = max(abs(v), 1.0)
        if abs(self.nodes[i] - v) > 1e-9 * scale:
            raise ValidationError(f"v={v} is not a velocity node (nearest is {self.nodes[i]})")
        return i


class Kernel:
    """Daughter-velocity redistribution density k(w, v).

    w is the mother velocity, v the daughter velocity; for every w the map
    v -> k(w, v) integrates to 1 against nu.  Backed either by a callable
    (builtin kernels, re-evaluable on refined grids) or by a tabulated
    matrix bound to fixed nodes.
    """

    __slots__ = ("name", "_func", "_matrix", "_nodes")

    def __init__(self, name: str, func: KernelFunc | None = None,
                 matrix: np.ndarray | None = None, nodes: np.ndarray | None = None):
        if (func is None) == (matrix is None):
            raise ValidationError("kernel: exactly one of func or matrix must be given")
        self.name = name
        self._func = func
        if matrix is not None:
            matrix = np.array(matrix, dtype=float)
            matrix.setflags(write=False)
            if nodes is None:
                raise ValidationError("kernel: tabulated matrix requires its node vector")
            nodes = np.array(nodes, dtype=float)
            nodes.setflags(write=False)
        self._matrix = matrix
        self._nodes = nodes

    @property
    def is_evaluable(self) -> bool:
        return self._func is not None

    def matrix_on(self, space: VelocitySpace) -> np.ndarray:
        """K[i, j] = k(w_i, v_j) on the space's nodes."""
        if self._func is not None:
            w = space.nodes[:, None]
            v = space.nodes[None, :]
            out = np.broadcast_to(np.asarray(self._func(w, v), float), (space.n, space.n)).copy()
            return out
        if self._nodes.shape != space.nodes.shape or not np.allclose(self._nodes, space.nodes, rtol=0, atol=1e-9):
            raise ValidationError("tabulated kernel nodes do not match the velocity space")
        return self._matrix.copy()


def builtin_kernel(name: str, params: ModelParams) -> Kernel:
    """Construct one of the named builtin kernels for the given (a, b)."""
    a, b = params.a, params.b

    def require_unit_interval():
        if not (a == 0.0 and b == 1.0):
            raise ValidationError(f"kernel {name!r} is defined on (0, 1); got ({a}, {b})")

    if name == "constant":
        c = 1.0 / (b - a)
        return Kernel(name, func=lambda w, v: np.full(np.broadcast_shapes(np.shape(w), np.shape(v)), c))
    if name == "three-quarters":
        require_unit_interval()
        return Kernel(name, func=lambda w, v: 0.75 * v / np.sqrt(1.0 - v) + 0.0 * w)
    if name == "linear":
        require_unit_interval()
        return Kernel(name, func=lambda w, v: 2.0 * v + 0.0 * w)
    if name == "daughters-faster":
        return Kernel(name, func=lambda w, v: np.where(w < v, 1.0 / (b - w), 0.0))
    if name == "halfline":
        require_unit_interval()
        return Kernel(name, func=lambda w, v: np.where(v < 0.5, 2.0, 0.0) + 0.0 * w)
    raise ValidationError(f"unknown builtin kernel {name!r}")


def tabulated_kernel(matrix: np.ndarray, nodes: np.ndarray, space: VelocitySpace,
                     renorm_tol: float = 1e-3, name: str = "tabulated") -> Kernel:
    """Build a kernel from a matrix of samples, renormalizing each row.

    Rows whose quadrature integral deviates from 1 by more than renorm_tol
    are rejected; smaller deviations are scaled away so the discrete row
    integrals are exactly 1.
    """
    matrix = np.asarray(matrix, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    if matrix.shape != (space.n, space.n):
        raise ValidationError(f"tabulated kernel must be {space.n}x{space.n}, got {matrix.shape}")
    if not np.allclose(nodes, space.nodes, rtol=0, atol=1e-9):
        raise ValidationError("tabulated kernel nodes do not match the velocity space")
    if np.any(matrix < 0):
        i, j = np.unravel_index(int(np.argmin(matrix)), matrix.shape)
        raise ValidationError(f"tabulated kernel has a negative value at row w={nodes[i]}, col v={nodes[j]}")
    rows = matrix @ space.weights
    dev = np.abs(rows - 1.0)
    if np.any(dev > renorm_tol):
        i = int(np.argmax(dev))
        raise ValidationError(
            f"tabulated kernel row w={nodes[i]} integrates to {rows[i]:.6g}; "
            f"deviation {dev[i]:.3g} exceeds the renormalization tolerance {renorm_tol:g}"
        )
    return Kernel(name, matrix=matrix / rows[:, None], nodes=nodes)


@dataclass(frozen=True)
class KernelValidationReport:
    max_row_deviation: float
    worst_row_velocity: float
    passed: bool
    negative_location: tuple[float, float] | None = None

    @property
    def failure_reason(self) -> str | None:
        if self.passed:
            return None
        if self.negative_location is not None:
            w, v = self.negative_location
            return f"negative kernel value at (w={w:.6g}, v={v:.6g})"
        return f"row integral deviates by {self.max_row_deviation:.3g} at w={self.worst_row_velocity:.6g}"


def validate_kernel(kernel: Kernel, space: VelocitySpace, tol: float) -> KernelValidationReport:
    """Check nonnegativity and row normalization of k on the given space."""
    if tol <= 0:
        raise ValidationError("validate_kernel: tol must be > 0")
    kmat = kernel.matrix_on(space)
    if np.any(kmat < 0):
        i, j = np.unravel_index(int(np.argmin(kmat)), kmat.shape)
        dev = float(np.max(np.abs(kmat @ space.weights - 1.0)))
        return KernelValidationReport(dev, float(space.nodes[i]), False,
                                      (float(space.nodes[i]), float(space.nodes[j])))
    rows = kmat @ space.weights
    dev = np.abs(rows - 1.0)
    i = int(np.argmax(dev))
    return KernelValidationReport(float(dev[i]), float(space.nodes[i]), bool(dev[i] <= tol))


class Model:
    """Bundle of parameters, velocity space and kernel with cached matrices.

    kmat[i, j] = k(w_i, v_j).  The boundary measure and its dual use this
    one matrix with the roles of the indices swapped.
    """

    __slots__ = ("params", "space", "kernel", "kmat", "_bm_cw")

    def __init__(self, params: ModelParams, space: VelocitySpace, kernel: Kernel):
        if not (abs(space.a - params.a) < 1e-12 and abs(space.b - params.b) < 1e-12):
            raise ValidationError("velocity space interval does not match the model parameters")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "kernel", kernel)
        kmat = kernel.matrix_on(space)
        kmat.setflags(write=False)
        object.__setattr__(self, "kmat", kmat)
        # integral-branch weights omega_i * w_i * k(w_i, v_j), one column per v
        cw = space.weights[:, None] * space.nodes[:, None] * kmat
        cw.setflags(write=False)
        object.__setattr__(self, "_bm_cw", cw)

    def __setattr__(self, name, value):
        raise AttributeError("Model is immutable")

    def refined(self, factor: int) -> "Model":
        if not self.kernel.is_evaluable:
            raise ValidationError("cannot refine a model with a tabulated kernel")
        return Model(self.params, self.space.refined(factor), self.kernel)

    def boundary_measure(self) -> "BoundaryMeasure":
        return BoundaryMeasure(self)


class BoundaryMeasure:
    """The reproduction measure applied to node functions of w.

    For a daughter velocity v it integrates
        p * (w / v) * k(w, v) nu(dw)  +  q * (unit mass at w = v),
    so applying it to g == 1 yields p * v^{-1} * int w k(w,v) nu(dw) + q.
    """

    __slots__ = ("model",)

    def __init__(self, model: Model):
        object.__setattr__(self, "model", model)

    def __setattr__(self, name, value):
        raise AttributeError("BoundaryMeasure is immutable")

    def _g_values(self, g) -> np.ndarray:
        space = self.model.space
        if callable(g):
            vals = np.asarray(g(space.nodes), dtype=float)
            if vals.shape == ():
                vals = np.full(space.n, float(vals))
        else:
            vals = np.asarray(g, dtype=float)
        if vals.shape != (space.n,):
            raise ValidationError("g must evaluate to one value per velocity node")
        return vals

    def apply_at_index(self, col: int, g_values: np.ndarray) -> float:
        m = self.model
        v = m.space.nodes[col]
        integral = float(m._bm_cw[:, col] @ g_values) / v
        return m.params.p * integral + m.params.q * float(g_values[col])

    def apply(self, v: float, g) -> float:
        """Integrate g against the measure at daughter velocity v (a node)."""
        col = self.model.space.node_index(v)
        return self.apply_at_index(col, self._g_values(g))

    def apply_all(self, g_values: np.ndarray) -> np.ndarray:
        """Vector of applications at every node at once."""
        m = self.model
        return m.params.p * (g_values @ m._bm_cw) / m.space.nodes + m.params.q * g_values


def apply_boundary_measure(measure: BoundaryMeasure, v: float, g) -> float:
    if v == 0:
        raise ValidationError("boundary measure is undefined at v = 0")
    return measure.apply(v, g)


def int_mes_identity(measure: BoundaryMeasure, g) -> dict:
    """Numerically check that integrating (v/w) g(w) against the boundary
    measure and then over v equals (p+q) * int g dnu.
    """
    m = measure.model
    space = m.space
    g_values = measure._g_values(g)
    inner = np.empty(space.n)
    for c in range(space.n):
        h = (space.nodes[c] / space.nodes) * g_values
        inner[c] = measure.apply_at_index(c, h)
    lhs = space.integrate(inner)
    rhs = m.params.reproduction_total * space.integrate(g_values)
    return {"lhs": lhs, "rhs": rhs, "deviation": abs(lhs - rhs)}
