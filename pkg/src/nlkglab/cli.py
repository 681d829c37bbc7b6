"""Command-line orchestration: config parsing, experiment dispatch, result emission.

Configs are INI files with sections [grid], [model], [constraint], [solver],
[dynamics], [output] plus optional [subadd] and [rearrange].  Every command
writes its outputs into the output directory and exits 0 on success; failures
produce a single-line machine-parsable reason on stderr and a nonzero code.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fieldio
from .grid import build_grid
from .model import ConstraintSpec, ModelParams, validate_params
from .rearrange import LineProfile, check_steiner_lemma
from .solve import (ConstraintCollapseError, SolverConfig, minimize_charge_constrained,
                    minimize_mass_constrained, multipliers_and_residual, subadditivity_scan)
from .dynamics import evolve, standing_wave_state
from .stability import OrbitReference, stability_experiment

COMMANDS = ("validate", "solve", "solve-charge", "subadd", "rearr-check",
            "evolve", "stability")

OUTPUT_ENV = "NLKGLAB_OUT"


class CliError(Exception):
    """Carries the single-line failure reason."""


@dataclass
class RunConfig:
    grid_kind: str
    dimension: int
    extent: float
    cells: int
    model: ModelParams
    constraint: ConstraintSpec
    solver: SolverConfig
    dt: float
    horizon: float
    stride: int
    epsilons: list[float]
    output_dir: str
    splits: list[tuple[float, float]]
    rearr_count: int
    rearr_cells: int

    def build_grid(self):
        return build_grid(self.grid_kind, self.dimension, self.extent, self.cells)

    def to_dict(self) -> dict:
        return {
            "grid": {"kind": self.grid_kind, "n": self.dimension,
                     "R": self.extent, "M": self.cells},
            "model": self.model.to_dict(),
            "constraint": {"kind": self.constraint.kind, "values": list(self.constraint.values)},
            "solver": self.solver.to_dict(),
            "dynamics": {"dt": self.dt, "horizon": self.horizon, "stride": self.stride,
                         "epsilons": self.epsilons},
            "output": {"directory": self.output_dir},
            "subadd": {"splits": [list(s) for s in self.splits]},
            "rearrange": {"count": self.rearr_count, "cells": self.rearr_cells},
        }

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        grid = data["grid"]
        model = ModelParams(**data["model"])
        constraint = ConstraintSpec(data["constraint"]["kind"],
                                    tuple(data["constraint"]["values"]))
        solver = SolverConfig(**data["solver"])
        dyn = data["dynamics"]
        return RunConfig(grid_kind=grid["kind"], dimension=int(grid["n"]),
                         extent=float(grid["R"]), cells=int(grid["M"]),
                         model=model, constraint=constraint, solver=solver,
                         dt=float(dyn["dt"]), horizon=float(dyn["horizon"]),
                         stride=int(dyn["stride"]),
                         epsilons=[float(e) for e in dyn["epsilons"]],
                         output_dir=data["output"]["directory"],
                         splits=[tuple(s) for s in data["subadd"]["splits"]],
                         rearr_count=int(data["rearrange"]["count"]),
                         rearr_cells=int(data["rearrange"]["cells"]))


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise CliError(f"config file not readable: {path}")
    try:
        grid_sec = parser["grid"]
        model_sec = parser["model"]
        cons_sec = parser["constraint"]
    except KeyError as exc:
        raise CliError(f"missing config section {exc}") from exc

    model = ModelParams(beta=model_sec.getfloat("beta"), gamma=model_sec.getfloat("gamma"),
                        a=model_sec.getfloat("a"), p=model_sec.getfloat("p"),
                        m1=model_sec.getfloat("m1"), m2=model_sec.getfloat("m2"),
                        dimension=grid_sec.getint("n"))

    kind = cons_sec.get("kind")
    if kind == "mass":
        if "C1" in cons_sec or "C2" in cons_sec:
            raise CliError("constraint section mixes mass and charge values")
        values = (cons_sec.getfloat("rho1"), cons_sec.getfloat("rho2"))
    elif kind == "charge":
        if "rho1" in cons_sec or "rho2" in cons_sec:
            raise CliError("constraint section mixes mass and charge values")
        values = (cons_sec.getfloat("C1"), cons_sec.getfloat("C2"))
    else:
        raise CliError(f"constraint kind must be mass or charge, got {kind!r}")

    solver_sec = parser["solver"] if parser.has_section("solver") else {}
    solver = SolverConfig(
        step=float(solver_sec.get("step", 0.5)),
        tol=float(solver_sec.get("tol", 1e-12)),
        max_iters=int(solver_sec.get("max_iters", 20000)),
        backtrack=float(solver_sec.get("backtrack", 0.5)),
        seed=int(solver_sec.get("seed", 0)),
        rearrange_every=int(solver_sec.get("rearrange_every", 50)))

    dyn_sec = parser["dynamics"] if parser.has_section("dynamics") else {}
    epsilons = [float(tok) for tok in str(dyn_sec.get("epsilons", "0 0.01 0.05 0.1")).split()]

    out_sec = parser["output"] if parser.has_section("output") else {}

    splits: list[tuple[float, float]] = []
    if parser.has_section("subadd"):
        for chunk in parser["subadd"].get("splits", "").split(";"):
            chunk = chunk.strip()
            if chunk:
                a, b = chunk.split()
                splits.append((float(a), float(b)))
    rearr_sec = parser["rearrange"] if parser.has_section("rearrange") else {}

    cfg = RunConfig(
        grid_kind=grid_sec.get("kind"), dimension=grid_sec.getint("n"),
        extent=grid_sec.getfloat("R"), cells=grid_sec.getint("M"),
        model=model, constraint=ConstraintSpec(kind, values), solver=solver,
        dt=float(dyn_sec.get("dt", 0.0)) or 0.25 * grid_sec.getfloat("R") / grid_sec.getint("M"),
        horizon=float(dyn_sec.get("horizon", 10.0)),
        stride=int(dyn_sec.get("stride", 10)),
        epsilons=epsilons,
        output_dir=str(out_sec.get("directory", "out")),
        splits=splits,
        rearr_count=int(rearr_sec.get("count", 200)),
        rearr_cells=int(rearr_sec.get("cells", 256)))
    cfg.build_grid()  # surfaces grid precondition violations at load time
    return cfg


def _require_admissible(cfg: RunConfig):
    report = validate_params(cfg.model)
    if not report.all_passed:
        first = report.failures()[0]
        raise CliError(f"{first.label} violated: {first.detail}")
    return report


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cmd_validate(cfg: RunConfig, out: Path, quiet: bool) -> int:
    report = validate_params(cfg.model)
    payload = report.to_dict()
    payload["config"] = cfg.to_dict()
    _write_json(out / "validation.json", payload)
    if not report.all_passed:
        first = report.failures()[0]
        raise CliError(f"{first.label} violated: {first.detail}")
    if not quiet:
        print(f"validation passed; report in {out / 'validation.json'}")
    return 0


def _solve_ground_state(cfg: RunConfig):
    grid = cfg.build_grid()
    if cfg.constraint.kind == "mass":
        return grid, minimize_mass_constrained(grid, cfg.model, cfg.constraint.values, cfg.solver)
    return grid, minimize_charge_constrained(grid, cfg.model, cfg.constraint.values, cfg.solver)


def _cmd_solve(cfg: RunConfig, out: Path, quiet: bool, charge: bool) -> int:
    _require_admissible(cfg)
    expected = "charge" if charge else "mass"
    if cfg.constraint.kind != expected:
        raise CliError(f"command needs a {expected} constraint, config has {cfg.constraint.kind}")
    grid, gs = _solve_ground_state(cfg)
    stem = "charge_state" if charge else "ground_state"
    fieldio.write_real_field(out / f"{stem}.txt", gs.field)
    meta = gs.metadata()
    meta["config"] = cfg.to_dict()
    _write_json(out / f"{stem}.json", meta)
    if not gs.converged:
        raise CliError("solver did not converge within max_iters")
    if not quiet:
        print(f"value={gs.value:.12g} residual={gs.residual:.3g} iters={gs.iterations}")
    return 0


def _cmd_subadd(cfg: RunConfig, out: Path, quiet: bool) -> int:
    _require_admissible(cfg)
    if cfg.constraint.kind != "mass":
        raise CliError("subadd needs a mass constraint")
    rho = cfg.constraint.values
    splits = cfg.splits or [(0.25 * rho[0], 0.25 * rho[1]),
                            (0.5 * rho[0], 0.5 * rho[1]),
                            (0.75 * rho[0], 0.75 * rho[1])]
    grid = cfg.build_grid()
    table = subadditivity_scan(grid, cfg.model, rho, splits, cfg.solver)
    rows = [(r.split[0], r.split[1], r.value_split, r.value_complement,
             r.value_total, r.margin, r.converged) for r in table.rows]
    fieldio.write_csv(out / "subadd.csv",
                      ["tau1", "tau2", "I_split", "I_complement", "I_total",
                       "margin", "converged"], rows)
    _write_json(out / "subadd.json",
                {"all_margins_positive": table.all_margins_positive,
                 "margins": [r.margin for r in table.rows]})
    if not table.all_margins_positive:
        raise CliError("margin not positive for at least one split")
    if not quiet:
        print(f"{len(table.rows)} splits, all margins positive")
    return 0


def _random_bump(rng, half_width: float, exponent: float, amplitude: float,
                 center_grid, shift=0.0):
    x = center_grid.nodes - shift
    s = np.abs(x) / half_width
    return amplitude * np.where(s < 1.0, (1.0 - s ** exponent) ** 2, 0.0)


def _cmd_rearr_check(cfg: RunConfig, out: Path, quiet: bool) -> int:
    rng = np.random.default_rng(cfg.solver.seed)
    grid = build_grid("line", 1, 8.0, cfg.rearr_cells)
    rows = []
    violations = 0
    for case in range(cfg.rearr_count):
        cu = rng.uniform(0.5, 1.5)
        cv = rng.uniform(0.5, 1.5)
        amp_u = rng.uniform(0.2, 1.0)
        amp_v = amp_u * rng.uniform(1.0, 2.0)
        exp_u = rng.uniform(1.0, 3.0)
        exp_v = rng.uniform(1.0, 3.0)
        u = LineProfile(grid, _random_bump(rng, cu, exp_u, amp_u, grid))
        v = LineProfile(grid, _random_bump(rng, cv, exp_v, amp_v, grid))
        lo = cu + cv + 4 * grid.spacing
        hi = grid.extent - cv - 4 * grid.spacing
        shift = rng.uniform(lo, hi)
        report = check_steiner_lemma(u, v, shift)
        rows.append((case, report.lhs, report.rhs, report.margin, report.tol,
                     report.satisfied))
        if not report.satisfied:
            violations += 1
    fieldio.write_csv(out / "rearr.csv",
                      ["case", "lhs", "rhs", "margin", "tol", "satisfied"], rows)
    _write_json(out / "rearr.json", {"cases": cfg.rearr_count, "violations": violations})
    if violations:
        raise CliError(f"rearrangement margin violated in {violations} cases")
    if not quiet:
        print(f"{cfg.rearr_count} bump pairs, margins within tolerance")
    return 0


def _cmd_evolve(cfg: RunConfig, out: Path, quiet: bool) -> int:
    _require_admissible(cfg)
    grid, gs = _solve_ground_state(cfg)
    state = standing_wave_state(gs)
    record = evolve(state, cfg.model, cfg.horizon, cfg.dt, stride=cfg.stride, reference=gs)
    fieldio.write_trajectory(out / "trajectory.csv", record)
    _write_json(out / "evolve.json",
                {"blowup": record.blowup,
                 "energy_drift": record.relative_drift("energy"),
                 "charge1_drift": record.relative_drift("charge1"),
                 "charge2_drift": record.relative_drift("charge2")})
    if record.blowup:
        raise CliError("blow-up: non-finite samples; partial record written")
    if not quiet:
        print(f"energy drift {record.relative_drift('energy'):.3g} "
              f"over horizon {cfg.horizon:g}")
    return 0


def _cmd_stability(cfg: RunConfig, out: Path, quiet: bool) -> int:
    _require_admissible(cfg)
    if cfg.constraint.kind != "charge":
        raise CliError("stability needs a charge constraint")
    grid, gs = _solve_ground_state(cfg)
    reference = OrbitReference.from_ground_state(gs, cfg.model)
    report = stability_experiment(reference, cfg.model, cfg.epsilons,
                                  cfg.horizon, cfg.dt, stride=cfg.stride)
    rows = [(r.epsilon, r.max_dist, r.max_lyapunov, r.blowup) for r in report.rows]
    fieldio.write_csv(out / "stability.csv",
                      ["epsilon", "max_dist", "max_V", "blowup"], rows)
    _write_json(out / "stability.json", report.summary())
    if not (report.monotone_dist and report.monotone_lyapunov):
        raise CliError("ladder not monotone in epsilon")
    if not quiet:
        print(f"ladder of {len(report.rows)} rows, maxima monotone")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nlkglab",
                                     description="Coupled standing-wave laboratory")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="INI config path")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="override the solver seed")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.solver.seed = args.seed
        out_dir = args.out or os.environ.get(OUTPUT_ENV) or cfg.output_dir
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "validate":
            return _cmd_validate(cfg, out, args.quiet)
        if args.command == "solve":
            return _cmd_solve(cfg, out, args.quiet, charge=False)
        if args.command == "solve-charge":
            return _cmd_solve(cfg, out, args.quiet, charge=True)
        if args.command == "subadd":
            return _cmd_subadd(cfg, out, args.quiet)
        if args.command == "rearr-check":
            return _cmd_rearr_check(cfg, out, args.quiet)
        if args.command == "evolve":
            return _cmd_evolve(cfg, out, args.quiet)
        if args.command == "stability":
            return _cmd_stability(cfg, out, args.quiet)
        raise CliError(f"unknown command {args.command}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ConstraintCollapseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
