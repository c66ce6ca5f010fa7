"""Command-line interface.

    rotenberg <command> --config <path> [--out <dir>] [--seed <u64>]

Commands: validate, extend, evolve, norms, stationary, stability, decay,
report.  Exit codes: 0 success, 1 validation failure, 2 numerical abort,
64 unknown command.  ROTENBERG_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import backend
from .config import ConfigError, ExperimentConfig, build_initial, build_model, load_config
from .dual import operator_norm
from .errors import CoverageError, NumericsError, ValidationError
from .extension import build_extension
from .fields import l1_distance
from .model import validate_kernel
from .semigroup import trajectory
from .stationary import (decay_experiment, h4_check, invariant_density,
                         partial_integrality_check, power_iteration, stability_experiment)
from .csvout import write_csv

COMMANDS = ("validate", "extend", "evolve", "norms", "stationary", "stability",
            "decay", "report")

USAGE = ("usage: rotenberg <command> --config <path> [--out <dir>] [--seed <u64>]\n"
         f"commands: {', '.join(COMMANDS)}")


def _cmd_validate(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    tol = cfg.tolerance("kernel_row", 1e-6)
    rep = validate_kernel(model.kernel, model.space, tol)
    rows = model.kmat @ model.space.weights
    write_csv(out / "kernel_validation.csv",
              ["mother_velocity", "row_integral", "deviation"],
              [(float(w), float(r), float(abs(r - 1.0)))
               for w, r in zip(model.space.nodes, rows)],
              cfg.config_hash)
    build_initial(cfg, model.space)
    print(f"kernel '{model.kernel.name}': max row deviation {rep.max_row_deviation:.3g} "
          f"(tol {tol:g}) -> {'pass' if rep.passed else 'FAIL'}")
    if not rep.passed:
        print(f"reason: {rep.failure_reason}", file=sys.stderr)
        return 1
    return 0


def _cmd_extend(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    f = build_initial(cfg, model.space)
    t_max = float(cfg.options.get("t_max", cfg.times[-1] if cfg.times else 1.0))
    ext = build_extension(model, f, t_max)
    x, v, s, vals = ext.computed_cells()
    omega_rows = ((float(xx), float(vv), 0, float(val))
                  for xx, vv, val in zip(
                      np.repeat(f.x_centers, model.space.n),
                      np.tile(model.space.nodes, f.n_x),
                      f.values.ravel()))
    ext_rows = ((float(a), float(b), int(c), float(d)) for a, b, c, d in zip(x, v, s, vals))
    write_csv(out / "extension.csv", ["x", "v", "strip_index", "value"],
              list(ext_rows) + list(omega_rows), cfg.config_hash)
    print(f"extension: {x.size} cells over strips 1..{ext.max_level}, x_min={ext.x_min:.6g}")
    return 0


def _cmd_evolve(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    f = build_initial(cfg, model.space)
    results = trajectory(model, f, cfg.times or [0.0])
    rows = []
    for r in results:
        xs = np.repeat(r.field.x_centers, model.space.n)
        vs = np.tile(model.space.nodes, r.field.n_x)
        rows.extend((r.t, float(xx), float(vv), float(val))
                    for xx, vv, val in zip(xs, vs, r.field.values.ravel()))
    write_csv(out / "evolution.csv", ["t", "x", "v", "value"], rows, cfg.config_hash)
    write_csv(out / "mass_series.csv", ["t", "mass"],
              [(r.t, r.mass) for r in results], cfg.config_hash)
    print(f"evolved {len(results)} times up to t={results[-1].t:g}; "
          f"final mass {results[-1].mass:.6g}")
    return 0


def _cmd_norms(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    certs = [operator_norm(model, t, n_x=cfg.n_x) for t in (cfg.times or [0.0])]
    write_csv(out / "norm_certificates.csv", ["t", "norm", "bound", "bound_kind", "pass"],
              [(c.t, c.norm, c.bound, c.bound_kind, c.passed) for c in certs],
              cfg.config_hash)
    bad = [c for c in certs if not c.passed]
    print(f"{len(certs)} norm certificates; {'all bounds hold' if not bad else f'{len(bad)} FAILED'}")
    return 0 if not bad else 1


def _cmd_stationary(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    rep = power_iteration(model,
                          tol=cfg.tolerance("stationary", 1e-10),
                          max_iter=int(cfg.options.get("max_iter", 100_000)),
                          n_starts=int(cfg.options.get("starts", 3)),
                          seed=cfg.seed)
    h4 = None
    if model.kernel.is_evaluable and model.space.is_continuous:
        h4 = h4_check(model, refinements=int(cfg.options.get("h4_refinements", 3)))
    metrics = [
        ("converged", rep.converged), ("stationary_iterates", rep.stationary_iterates),
        ("residual", rep.residual), ("iterations", rep.iterations),
        ("positivity_min", rep.positivity_min), ("multi_start_agreement", rep.agreement),
        ("annihilated", rep.annihilated),
        ("h4_integral", h4.integral if h4 else rep.h4_integral),
        ("h4_divergent", h4.divergence_flag if h4 else ""),
        ("note", rep.note or "uniqueness is witnessed by multi-start agreement, not proven"),
    ]
    write_csv(out / "stationary_report.csv", ["metric", "value"], metrics, cfg.config_hash)
    if rep.f_diamond is None:
        print("no discrete stationary density (mass annihilated)")
        return 0
    if h4 is not None and h4.divergence_flag:
        rows = [(float(v), float(g), "") for v, g in zip(model.space.nodes, rep.f_diamond.values)]
    else:
        fstar = invariant_density(model, rep.f_diamond, cfg.n_x, h4)
        rows = [(float(v), float(g), float(fs)) for v, g, fs in
                zip(model.space.nodes, rep.f_diamond.values, fstar.values[0])]
    write_csv(out / "stationary_density.csv", ["v", "f_diamond", "f_star"], rows,
              cfg.config_hash)
    print(f"stationary density: residual {rep.residual:.3g}, "
          f"agreement {rep.agreement:.3g}, H4 integral {metrics[7][1]}")
    return 0


def _cmd_stability(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    f0 = build_initial(cfg, model.space)
    initials = [f0]
    labels = [cfg.initial_spec.get("kind", "csv")]
    for extra in cfg.options.get("extra_initials", []):
        sub = ExperimentConfig(**{**cfg.__dict__, "initial_spec": extra})
        initials.append(build_initial(sub, model.space))
        labels.append(extra.get("kind", "csv"))
    times = cfg.times or [float(t) for t in range(11)]
    res = stability_experiment(model, initials, times,
                               require_hypotheses=bool(cfg.options.get("require_hypotheses", True)))
    rows = [(labels[i], t, float(res.distances[i, j]))
            for i in range(len(initials)) for j, t in enumerate(times)]
    write_csv(out / "stability_distances.csv", ["initial", "t", "distance"], rows,
              cfg.config_hash)
    write_csv(out / "stability_checks.csv", ["check", "value"],
              sorted(res.hypothesis_notes.items()), cfg.config_hash)
    write_csv(out / "invariant_density.csv", ["v", "f_star"],
              [(float(v), float(val)) for v, val in
               zip(model.space.nodes, res.f_star.values[0])], cfg.config_hash)
    finals = res.distances[:, -1]
    print(f"stability: final distances {[f'{d:.3g}' for d in finals]}")
    return 0


def _cmd_decay(cfg: ExperimentConfig, out: Path) -> int:
    model = build_model(cfg)
    f = build_initial(cfg, model.space)
    times = cfg.times or [0.0, 1.0, 2.0]
    res = decay_experiment(model, f, times, n_x_dual=cfg.n_x)
    write_csv(out / "decay_series.csv",
              ["t", "mass_norm", "op_norm", "bound", "bound_kind", "certified"],
              [(t, m, c.norm, c.bound, c.bound_kind, c.passed)
               for t, m, c in zip(res.times, res.mass_norms, res.certificates)],
              cfg.config_hash)
    print(f"decay: bounds {'certified' if res.bound_certified else 'VIOLATED'}; "
          f"empirical log-slope {res.empirical_log_slope:.4g} "
          f"(orientation only, not a growth bound); velocity floor {res.velocity_floor:g}")
    return 0 if res.bound_certified else 1


def _cmd_report(cfg: ExperimentConfig, out: Path) -> int:
    files = sorted(p.name for p in out.glob("*.csv"))
    manifest = {
        "config": cfg.raw,
        "config_hash": cfg.config_hash,
        "backend": backend.NAME,
        "files": {
            name: hashlib.sha256((out / name).read_bytes()).hexdigest()
            for name in files
        },
    }
    tmp = out / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    tmp.replace(out / "manifest.json")
    print(f"manifest covers {len(files)} CSV files")
    return 0


_DISPATCH = {
    "validate": _cmd_validate,
    "extend": _cmd_extend,
    "evolve": _cmd_evolve,
    "norms": _cmd_norms,
    "stationary": _cmd_stationary,
    "stability": _cmd_stability,
    "decay": _cmd_decay,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return 0
    command, rest = argv[0], argv[1:]
    if command not in COMMANDS:
        print(f"unknown command: {command}\n{USAGE}", file=sys.stderr)
        return 64
    parser = argparse.ArgumentParser(prog=f"rotenberg {command}")
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(rest)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = int(args.seed)
            cfg.raw["seed"] = int(args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except (NumericsError, CoverageError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
