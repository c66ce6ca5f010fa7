"""Density fields on the phase space (0,1) x V.

Values live on cell centers x_i = (i + 1/2) dx of a uniform maturity grid,
paired with the velocity space's quadrature nodes.  The L1 norm is the
product midpoint quadrature.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .model import VelocitySpace


class DensityField:
    """Grid samples f(x_i, v_j), shape (n_x, n_v)."""

    __slots__ = ("values", "space", "n_x")

    def __init__(self, values: np.ndarray, space: VelocitySpace):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[1] != space.n:
            raise ValidationError(f"density field must have shape (n_x, {space.n}), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("density field contains non-finite values")
        values = values.copy()
        values.setflags(write=False)
        self.values = values
        self.space = space
        self.n_x = values.shape[0]

    @property
    def dx(self) -> float:
        return 1.0 / self.n_x

    @property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.n_x) + 0.5) * self.dx

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum(axis=0) @ self.space.weights * self.dx)

    def mass(self) -> float:
        return float(self.values.sum(axis=0) @ self.space.weights * self.dx)

    def normalized(self) -> "DensityField":
        m = self.mass()
        if m <= 0:
            raise ValidationError("cannot normalize a field with non-positive mass")
        return DensityField(self.values / m, self.space)

    def __add__(self, other: "DensityField") -> "DensityField":
        self._check_same_grid(other)
        return DensityField(self.values + other.values, self.space)

    def __sub__(self, other: "DensityField") -> "DensityField":
        self._check_same_grid(other)
        return DensityField(self.values - other.values, self.space)

    def __mul__(self, scalar: float) -> "DensityField":
        return DensityField(self.values * float(scalar), self.space)

    __rmul__ = __mul__

    def _check_same_grid(self, other: "DensityField"):
        if self.n_x != other.n_x or self.space is not other.space:
            if self.n_x != other.n_x or not np.array_equal(self.space.nodes, other.space.nodes):
                raise ValidationError("fields live on different grids")


def l1_norm(f: DensityField) -> float:
    return f.l1_norm()


def l1_distance(f: DensityField, g: DensityField) -> float:
    return (f - g).l1_norm()


def uniform_density(space: VelocitySpace, n_x: int, normalize: bool = True) -> DensityField:
    f = DensityField(np.ones((n_x, space.n)), space)
    return f.normalized() if normalize else f


def linear_x_density(space: VelocitySpace, n_x: int, normalize: bool = True) -> DensityField:
    x = (np.arange(n_x) + 0.5) / n_x
    f = DensityField(np.repeat(x[:, None], space.n, axis=1), space)
    return f.normalized() if normalize else f


def bump_density(space: VelocitySpace, n_x: int, center: tuple[float, float],
                 width: float, normalize: bool = True) -> DensityField:
    """Smooth bump exp(-r^2) around (x0, v0) with the same width in x and v."""
    cx, cv = center
    if width <= 0:
        raise ValidationError("bump width must be positive")
    x = (np.arange(n_x) + 0.5) / n_x
    g = np.exp(-(((x[:, None] - cx) / width) ** 2 + ((space.nodes[None, :] - cv) / width) ** 2))
    f = DensityField(g, space)
    return f.normalized() if normalize else f


def x_profile_density(space: VelocitySpace, n_x: int, profile: np.ndarray,
                      normalize: bool = False) -> DensityField:
    """Field constant in x given a per-velocity profile."""
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (space.n,):
        raise ValidationError("profile must have one value per velocity node")
    f = DensityField(np.repeat(profile[None, :], n_x, axis=0), space)
    return f.normalized() if normalize else f


def random_box_density(space: VelocitySpace, n_x: int, rng: np.random.Generator,
                       n_boxes: int = 4, normalize: bool = True) -> DensityField:
    """Seeded mixture of axis-aligned boxes; jump edges are generic in x.

    Piecewise-constant test densities keep interpolation error first order
    in dx, which grid-convergence checks rely on.
    """
    x = (np.arange(n_x) + 0.5) / n_x
    vals = np.zeros((n_x, space.n))
    for _ in range(n_boxes):
        x0, x1 = np.sort(rng.uniform(0.0, 1.0, size=2))
        v0, v1 = np.sort(rng.uniform(space.a, space.b, size=2))
        h = rng.uniform(0.2, 1.0)
        vals += h * np.outer((x >= x0) & (x < x1), (space.nodes >= v0) & (space.nodes < v1))
    vals += 0.05  # keep the field strictly positive so it normalizes
    f = DensityField(vals, space)
    return f.normalized() if normalize else f


def builtin_density(kind: str, space: VelocitySpace, n_x: int, **opts) -> DensityField:
    if kind == "uniform":
        return uniform_density(space, n_x)
    if kind == "linear-x":
        return linear_x_density(space, n_x)
    if kind == "bump":
        return bump_density(space, n_x, tuple(opts["center"]), float(opts["width"]))
    raise ValidationError(f"unknown builtin density {kind!r}")
