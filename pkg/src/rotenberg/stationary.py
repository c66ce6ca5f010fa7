"""Stationary densities of the velocity kernel operator and the long-time
behaviour of the full semigroup: invariant density, asymptotic-stability
experiments (p + q = 1) and decay experiments (p + q < 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dual import NormCertificate, operator_norm
from .errors import ValidationError
from .fields import DensityField, l1_distance, x_profile_density
from .model import Model
from .semigroup import trajectory


class VelocityDensity:
    """Node samples of a function on V with quadrature L1 norm."""

    __slots__ = ("values", "space")

    def __init__(self, values: np.ndarray, space):
        values = np.asarray(values, dtype=float)
        if values.shape != (space.n,):
            raise ValidationError(f"velocity density must have {space.n} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("velocity density contains non-finite values")
        values = values.copy()
        values.setflags(write=False)
        self.values = values
        self.space = space

    def l1_norm(self) -> float:
        return self.space.integrate(np.abs(self.values))

    def is_density(self, tol: float = 1e-8) -> bool:
        return bool(np.all(self.values >= 0)) and abs(self.l1_norm() - 1.0) <= tol

    def normalized(self) -> "VelocityDensity":
        n = self.l1_norm()
        if n <= 0:
            raise ValidationError("cannot normalize a zero function")
        return VelocityDensity(self.values / n, self.space)

    @classmethod
    def uniform(cls, space) -> "VelocityDensity":
        return cls(np.ones(space.n), space).normalized()


def apply_K(model: Model, g: VelocityDensity) -> VelocityDensity:
    """The kernel operator: (Kg)(v) = integral of k(w, v) g(w) nu(dw)."""
    out = (model.space.weights * g.values) @ model.kmat
    return VelocityDensity(out, model.space)


@dataclass(frozen=True)
class StationaryReport:
    f_diamond: VelocityDensity | None
    residual: float
    positivity_min: float
    agreement: float
    converged: bool
    stationary_iterates: bool
    iterations: int
    annihilated: bool
    h4_integral: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return (self.converged or self.stationary_iterates) and self.positivity_min > 0


def _iterate(model: Model, g: np.ndarray, tol: float, max_iter: int):
    """Renormalized fixed-point iteration.

    Returns (g, residual, iters, annihilated, stationary).  `stationary`
    means the normalized iterates themselves stopped moving; the residual
    may still sit at a quadrature floor when the discrete row integrals
    are not exactly 1 (singular kernels).
    """
    w = model.space.weights
    g = g / float(w @ np.abs(g))
    residual = math.inf
    for it in range(1, max_iter + 1):
        kg = (w * g) @ model.kmat
        n = float(w @ np.abs(kg))
        if n <= 1e-300:
            return g, math.inf, it, True, False
        residual = float(w @ np.abs(kg - g))
        g_new = kg / n
        step = float(w @ np.abs(g_new - g))
        g = g_new
        if residual <= tol:
            return g, residual, it, False, True
        if step <= 1e-14:
            return g, residual, it, False, True
    return g, residual, max_iter, False, False


def power_iteration(model: Model, init: VelocityDensity | None = None, tol: float = 1e-10,
                    max_iter: int = 100_000, n_starts: int = 3, seed: int = 0) -> StationaryReport:
    """Search for a stationary density of the kernel operator.

    Iterates g <- Kg with L1 renormalization from the given start plus
    n_starts seeded random starts; the agreement score is the largest
    pairwise L1 distance between converged runs (uniqueness evidence,
    not a proof).  Non-convergence is informative and only flagged.
    """
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    rng = np.random.default_rng(seed)
    starts = [init.values if init is not None else np.ones(model.space.n)]
    starts += [rng.uniform(0.1, 1.0, size=model.space.n) for _ in range(max(n_starts, 3))]
    runs = [_iterate(model, s, tol, max_iter) for s in starts]

    best = min(runs, key=lambda r: r[1])
    g, residual, iterations, annihilated, stationary = best
    converged = residual <= tol
    finals = [r[0] for r in runs if not r[3]]
    agreement = 0.0
    for i in range(len(finals)):
        for j in range(i + 1, len(finals)):
            agreement = max(agreement, float(model.space.weights @ np.abs(finals[i] - finals[j])))
    if annihilated:
        return StationaryReport(None, math.inf, 0.0, agreement, False, False, iterations, True,
                                math.nan, "iteration annihilated all mass (no discrete fixed density)")
    f_dia = VelocityDensity(g, model.space)
    i_h4 = model.space.integrate(g / model.space.nodes)
    if converged:
        note = ""
    elif stationary:
        note = ("iterates reached a fixed point of the normalized map; the residual "
                "sits at the row-quadrature floor")
    else:
        note = "residual did not reach tol; fixed density may not exist"
    return StationaryReport(f_dia, residual, float(g.min()), agreement, converged,
                            stationary, iterations, False, float(i_h4), note)


@dataclass(frozen=True)
class H4Report:
    integral: float
    levels: list[float]
    growth_rates: list[float]
    divergence_flag: bool


def h4_check(model: Model, refinements: int = 3, tol: float = 1e-10,
             max_iter: int = 5000) -> H4Report:
    """Check integrability of v -> f_diamond(v) / v by grid doubling.

    Recomputes the stationary density on successively refined velocity
    grids; a log-divergent integral gains a constant amount per doubling,
    so non-decaying gains raise the divergence flag.  The reported value
    extrapolates the ladder geometrically (exact for any fixed error
    order), which recovers singular-integrand values the raw midpoint
    rule misses.
    """
    if not model.space.is_continuous:
        g = power_iteration(model, tol=tol, max_iter=max_iter)
        return H4Report(g.h4_integral, [g.h4_integral], [], False)
    levels = []
    for k in range(refinements + 1):
        m = model if k == 0 else model.refined(2**k)
        rep = power_iteration(m, tol=tol, max_iter=max_iter)
        if rep.f_diamond is None:
            raise ValidationError("h4_check needs a kernel with a discrete stationary density")
        levels.append(float(m.space.integrate(rep.f_diamond.values / m.space.nodes)))
    gains = np.diff(levels)
    growth = [float(g) for g in gains]
    # Non-decaying absolute gains mean every doubling adds mass: divergent.
    diverges = bool(abs(gains[-1]) > 1e-3 * max(abs(levels[-1]), 1.0)
                    and abs(gains[-1]) >= 0.8 * abs(gains[0]))
    integral = levels[-1]
    if not diverges and len(levels) >= 3:
        d1, d2 = levels[-2] - levels[-3], levels[-1] - levels[-2]
        if abs(d2 - d1) > 1e-15 and abs(d2) < abs(d1):
            integral = levels[-1] + d2 * d2 / (d1 - d2)
    return H4Report(float(integral), levels, growth, diverges)


def invariant_density(model: Model, f_dia: VelocityDensity, n_x: int,
                      h4: H4Report | None = None) -> DensityField:
    """The invariant density of the semigroup: proportional to f_diamond(v)/v,
    constant in maturity, normalized to unit mass."""
    if h4 is not None and h4.divergence_flag:
        raise ValidationError("v^{-1} f_diamond is not integrable; no invariant density exists")
    profile = f_dia.values / model.space.nodes
    denom = model.space.integrate(profile)
    if not math.isfinite(denom) or denom <= 0:
        raise ValidationError("invariant-density normalization failed")
    return x_profile_density(model.space, n_x, profile / denom)


def invariance_check(model: Model, f_star: DensityField, times) -> float:
    """max over times of the L1 distance between T(t) f_star and f_star."""
    if abs(model.params.reproduction_total - 1.0) > 1e-9:
        raise ValidationError("invariance holds in the mass-preserving regime p + q = 1")
    results = trajectory(model, f_star, times)
    return max((r.field - f_star).l1_norm() for r in results) if results else 0.0


@dataclass(frozen=True)
class PartialIntegralityReport:
    value: float
    cut: float
    passed: bool


def partial_integrality_check(model: Model, threshold: float = 1e-8) -> PartialIntegralityReport:
    """Mass of the kernel over daughter velocities above max(a, b/2).

    A positive value certifies the two-step evolution dominates an
    integral operator, the hypothesis behind the stability theorem.
    """
    if not model.space.is_continuous:
        raise ValidationError("partial integrality check requires a continuous velocity space")
    a, b = model.params.a, model.params.b
    cut = max(a, 0.5 * b)
    tail = model.space.nodes > cut
    value = float(model.space.weights @ model.kmat @ (model.space.weights * tail))
    return PartialIntegralityReport(value, cut, value > threshold)


@dataclass(frozen=True)
class StabilityResult:
    times: list[float]
    distances: np.ndarray  # (n_initials, n_times)
    f_star: DensityField
    hypothesis_notes: dict
    decreasing_from: list[int]


def stability_experiment(model: Model, initials: list[DensityField], times,
                         require_hypotheses: bool = True,
                         stationary_kwargs: dict | None = None) -> StabilityResult:
    """Distances ||T(t) f - f_star|| for each initial density over time.

    Requires p + q = 1.  The kernel hypotheses (unique positive stationary
    density, integrable f_diamond/v, partial integrality) are checked and
    recorded; with require_hypotheses the experiment refuses to run when
    one fails, otherwise it proceeds labeled exploratory.
    """
    if abs(model.params.reproduction_total - 1.0) > 1e-9:
        raise ValidationError("stability experiments require p + q = 1")
    times = [float(t) for t in times]
    rep = power_iteration(model, **(stationary_kwargs or {}))
    h4 = h4_check(model) if model.kernel.is_evaluable and model.space.is_continuous else None
    pic = partial_integrality_check(model) if model.space.is_continuous else None
    notes = {
        "stationary_converged": rep.converged,
        "stationary_residual": rep.residual,
        "multi_start_agreement": rep.agreement,
        "h4_divergent": None if h4 is None else h4.divergence_flag,
        "h4_integral": None if h4 is None else h4.integral,
        "partial_integrality_value": None if pic is None else pic.value,
        "partial_integrality_passed": None if pic is None else pic.passed,
        "exploratory": False,
        "velocity_floor": float(model.space.nodes[0]),
    }
    ok = rep.passed and (h4 is None or not h4.divergence_flag) and (pic is None or pic.passed)
    if not ok:
        if require_hypotheses:
            raise ValidationError(f"stability hypotheses failed: {notes}")
        notes["exploratory"] = True
    if not initials:
        raise ValidationError("need at least one initial density")
    n_x = initials[0].n_x
    f_star = invariant_density(model, rep.f_diamond, n_x, h4)
    dist = np.empty((len(initials), len(times)))
    for i, f0 in enumerate(initials):
        results = trajectory(model, f0.normalized(), times)
        dist[i] = [l1_distance(r.field, f_star) for r in results]
    decreasing_from = []
    for row in dist:
        k = len(row) - 1
        while k > 0 and row[k] <= row[k - 1] + 1e-12:
            k -= 1
        decreasing_from.append(k)
    return StabilityResult(times, dist, f_star, notes, decreasing_from)


@dataclass(frozen=True)
class DecayResult:
    times: list[float]
    mass_norms: list[float]
    certificates: list[NormCertificate]
    bound_certified: bool
    empirical_log_slope: float  # NOT a growth-bound estimate; slope of log norm only
    velocity_floor: float


def decay_experiment(model: Model, f: DensityField, times, n_x_dual: int = 400) -> DecayResult:
    """Evolved-mass and operator-norm series in the subcritical regime.

    For a > 0 each certificate also checks the stepwise decay bound
    (p+q)^floor(t a).  The fitted log slope is reported for orientation
    only; no growth-bound value is claimed.
    """
    if model.params.reproduction_total >= 1.0 - 1e-12:
        raise ValidationError("decay experiments require p + q < 1")
    times = [float(t) for t in times]
    results = trajectory(model, f, times)
    mass_norms = [r.field.l1_norm() for r in results]
    certs = [operator_norm(model, t, n_x=n_x_dual) for t in times]
    certified = all(c.passed for c in certs)
    pos = [(t, c.norm) for t, c in zip(times, certs) if t > 0 and c.norm > 0]
    slope = math.nan
    if len(pos) >= 2:
        ts = np.array([t for t, _ in pos])
        ln = np.log(np.array([n for _, n in pos]))
        slope = float(np.polyfit(ts, ln, 1)[0])
    return DecayResult(times, mass_norms, certs, certified, slope,
                       float(model.space.nodes[0]))
