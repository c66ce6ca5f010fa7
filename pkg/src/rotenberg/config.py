"""Experiment configuration: JSON ingestion with field-path diagnostics."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fields import DensityField, builtin_density
from .model import (Kernel, Model, ModelParams, VelocitySpace, builtin_kernel,
                    tabulated_kernel)


class ConfigError(ValidationError):
    """Malformed configuration; the message carries the offending field path."""


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}: required field is missing")
    return obj[key]


def _as_float(value, path: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}") from None


def _as_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


@dataclass
class ExperimentConfig:
    params: ModelParams
    velocity: dict
    kernel_spec: dict
    n_x: int
    initial_spec: dict
    times: list[float]
    seed: int
    tolerances: dict
    options: dict
    base_dir: Path
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")

    pblock = _need(raw, "params", "config")
    try:
        params = ModelParams(
            a=_as_float(_need(pblock, "a", "params"), "params.a"),
            b=_as_float(_need(pblock, "b", "params"), "params.b"),
            p=_as_float(_need(pblock, "p", "params"), "params.p"),
            q=_as_float(_need(pblock, "q", "params"), "params.q"),
        )
    except ValidationError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"params: {exc}") from None

    vblock = raw.get("velocity", {"kind": "continuous", "n": 200})
    kind = vblock.get("kind", "continuous")
    if kind not in ("continuous", "discrete"):
        raise ConfigError(f"velocity.kind: unknown kind {kind!r}")
    if kind == "continuous":
        n = _as_int(vblock.get("n", 200), "velocity.n")
        if n < 1:
            raise ConfigError("velocity.n: must be >= 1")
    else:
        if "nodes" not in vblock or "masses" not in vblock:
            raise ConfigError("velocity: discrete spaces need 'nodes' and 'masses'")

    kblock = raw.get("kernel", {"name": "constant"})
    if "csv" not in kblock and "name" not in kblock:
        raise ConfigError("kernel: need either 'name' (builtin) or 'csv' (tabulated)")

    grid = raw.get("grid", {})
    n_x = _as_int(grid.get("nx", 400), "grid.nx")
    if n_x < 2:
        raise ConfigError("grid.nx: must be >= 2")

    iblock = raw.get("initial", {"kind": "uniform"})
    if "csv" not in iblock and iblock.get("kind") not in ("uniform", "linear-x", "bump"):
        raise ConfigError(f"initial.kind: unknown kind {iblock.get('kind')!r}")
    if iblock.get("kind") == "bump":
        if "center" not in iblock or "width" not in iblock:
            raise ConfigError("initial: bump needs 'center' [x, v] and 'width'")

    times = raw.get("times", [])
    if not isinstance(times, list):
        raise ConfigError("times: expected a list")
    times = [_as_float(t, f"times[{i}]") for i, t in enumerate(times)]
    if any(t < 0 for t in times):
        raise ConfigError("times: must be nonnegative")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ConfigError("times: must be ascending")

    seed = _as_int(raw.get("seed", 0), "seed")
    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances: expected an object")
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("options: expected an object")

    return ExperimentConfig(params=params, velocity=vblock, kernel_spec=kblock, n_x=n_x,
                            initial_spec=iblock, times=times, seed=seed,
                            tolerances=tolerances, options=options,
                            base_dir=path.parent, raw=raw)


def build_space(cfg: ExperimentConfig) -> VelocitySpace:
    v = cfg.velocity
    if v.get("kind", "continuous") == "continuous":
        return VelocitySpace.midpoint(cfg.params, int(v.get("n", 200)))
    try:
        return VelocitySpace.discrete(cfg.params, v["nodes"], v["masses"])
    except ValidationError as exc:
        raise ConfigError(f"velocity: {exc}") from None


def load_kernel_csv(path: Path, space: VelocitySpace, renorm_tol: float = 1e-3) -> Kernel:
    """Tabulated kernel CSV: first row daughter nodes, first column mother
    nodes, body k values."""
    if not path.exists():
        raise ConfigError(f"kernel.csv: file not found: {path}")
    rows = [line.split(",") for line in path.read_text().splitlines()
            if line.strip() and not line.startswith("#")]
    try:
        daughters = np.array([float(x) for x in rows[0][1:]])
        mothers = np.array([float(r[0]) for r in rows[1:]])
        body = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"kernel.csv: malformed table ({exc})") from None
    if daughters.shape != space.nodes.shape or not np.allclose(daughters, space.nodes,
                                                               rtol=0, atol=1e-9):
        raise ConfigError("kernel.csv: daughter-velocity nodes do not match the velocity space")
    if mothers.shape != space.nodes.shape or not np.allclose(mothers, space.nodes,
                                                             rtol=0, atol=1e-9):
        raise ConfigError("kernel.csv: mother-velocity nodes do not match the velocity space")
    return tabulated_kernel(body, space.nodes, space, renorm_tol=renorm_tol)


def build_model(cfg: ExperimentConfig) -> Model:
    space = build_space(cfg)
    k = cfg.kernel_spec
    if "csv" in k:
        kernel = load_kernel_csv((cfg.base_dir / k["csv"]).resolve(), space,
                                 renorm_tol=float(k.get("renorm_tol", 1e-3)))
    else:
        try:
            kernel = builtin_kernel(k["name"], cfg.params)
        except ValidationError as exc:
            raise ConfigError(f"kernel.name: {exc}") from None
    return Model(cfg.params, space, kernel)


def build_initial(cfg: ExperimentConfig, space: VelocitySpace) -> DensityField:
    spec = cfg.initial_spec
    if "csv" in spec:
        path = (cfg.base_dir / spec["csv"]).resolve()
        if not path.exists():
            raise ConfigError(f"initial.csv: file not found: {path}")
        data = np.loadtxt(path, delimiter=",", comments="#")
        if data.ndim != 2 or data.shape != (cfg.n_x, space.n):
            raise ConfigError(
                f"initial.csv: expected an {cfg.n_x} x {space.n} table, got {data.shape}")
        return DensityField(data, space)
    kind = spec.get("kind", "uniform")
    opts = {k: v for k, v in spec.items() if k != "kind"}
    try:
        return builtin_density(kind, space, cfg.n_x, **opts)
    except ValidationError as exc:
        raise ConfigError(f"initial: {exc}") from None
