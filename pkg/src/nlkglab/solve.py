"""Constrained ground-state solvers and the sub-additivity scan.

Both solvers run a normalized gradient flow with the stiff linear part treated
implicitly: each step solves (I + tau*(-Lap + shift)) v = u - tau * (explicit
terms), takes moduli, and re-imposes the constraint.  A step is accepted only
if the objective decreases, otherwise tau is backtracked, so the accepted
value sequence is monotone by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import solve_banded

from .grid import GridSpec, RADIAL, apply_laplacian, dirichlet_energy, laplacian_bands, quadrature
from .model import (ModelParams, RealField, field_energy, nonlinearity_eval,
                    require_valid, total_energy)


class ConstraintCollapseError(RuntimeError):
    """A charge-constrained flow drove a component norm below the floor."""


@dataclass
class SolverConfig:
    """Flow parameters: initial step, stopping threshold, iteration cap,
    backtracking factor, and the RNG seed for the initial guess."""

    step: float = 0.5
    tol: float = 1e-12
    max_iters: int = 20000
    backtrack: float = 0.5
    seed: int = 0
    rearrange_every: int = 50

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtracking factor must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {"step": self.step, "tol": self.tol, "max_iters": self.max_iters,
                "backtrack": self.backtrack, "seed": self.seed,
                "rearrange_every": self.rearrange_every}


@dataclass
class GroundState:
    """Converged minimizer record."""

    field: RealField
    rho: tuple[float, float]
    omega: tuple[float, float]
    multipliers: tuple[float, float]
    value: float
    residual: float
    iterations: int
    converged: bool
    objective: str                      # "mass" or "charge"
    tail_fraction: float                # norm share in the outer 10% of the ball
    history: dict | None = None
    cross_check: dict | None = None

    def metadata(self) -> dict:
        out = {"objective": self.objective, "rho": list(self.rho),
               "omega": list(self.omega), "multipliers": list(self.multipliers),
               "value": self.value, "residual": self.residual,
               "iterations": self.iterations, "converged": self.converged,
               "tail_fraction": self.tail_fraction}
        if self.cross_check is not None:
            out["cross_check"] = self.cross_check
        return out


MASS_FLOOR = 1e-8

_TAU_CAP = 1e6
_TAU_MIN = 1e-15


def _initial_field(grid: GridSpec, norms: tuple[float, float], seed: int) -> RealField:
    """Positive radial bump scaled to the target norms, with a small seeded
    perturbation so distinct runs explore distinct bases."""
    rng = np.random.default_rng(seed)
    width = grid.extent / 4.0
    bump = np.exp(-(grid.nodes / width) ** 2)
    comps = []
    for target in norms:
        u = bump * (1.0 + 0.01 * rng.standard_normal(grid.cells))
        u = np.abs(u)
        u[-1] = 0.0
        comps.append(_rescale(grid, u, target))
    return RealField(grid, comps[0], comps[1])


def _rescale(grid: GridSpec, u: np.ndarray, target: float) -> np.ndarray:
    norm_sq = float(quadrature(grid, u * u))
    if norm_sq <= 0.0:
        raise ConstraintCollapseError("component norm vanished during renormalization")
    return u * math.sqrt(target / norm_sq)


def _implicit_bands(grid: GridSpec, tau: float, shift: float) -> np.ndarray:
    """Banded matrix of I + tau*(-Lap + shift) in solve_banded layout."""
    sub, diag, sup = laplacian_bands(grid)
    ab = np.zeros((3, grid.cells))
    ab[0, 1:] = tau * sup[:-1]
    ab[1] = 1.0 + tau * (diag + shift)
    ab[2, :-1] = tau * sub[1:]
    return ab


def _decreasing_sweep(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """Radially non-increasing candidate: the same values sorted outward."""
    return np.sort(u)[::-1]


def _tail_fraction(grid: GridSpec, field: RealField) -> float:
    outer = grid.nodes > 0.9 * grid.extent
    total = quadrature(grid, field.u1 ** 2) + quadrature(grid, field.u2 ** 2)
    tail = (np.dot(grid.weights[outer], field.u1[outer] ** 2)
            + np.dot(grid.weights[outer], field.u2[outer] ** 2))
    return float(tail / total) if total > 0 else 0.0


def multipliers_and_residual(grid: GridSpec, params: ModelParams,
                             field: RealField) -> tuple[tuple[float, float], float]:
    """Rayleigh-quotient multipliers and the stationarity defect.

    lambda_j = (||Du_j||^2 + <D_jF(u), u_j>) / ||u_j||^2 and the residual is
    the L2 norm of (-Lap u_j + D_jF(u) - lambda_j u_j) summed over components.
    """
    _, d1, d2 = nonlinearity_eval(params, field.u1, field.u2)
    lams = []
    res_sq = 0.0
    for u, d in ((field.u1, d1), (field.u2, d2)):
        norm_sq = float(quadrature(grid, u * u))
        if norm_sq <= 0.0:
            raise ValueError("multipliers undefined for a vanishing component")
        lam = (dirichlet_energy(grid, u) + float(quadrature(grid, d * u))) / norm_sq
        defect = -apply_laplacian(grid, u) + d - lam * u
        res_sq += float(quadrature(grid, defect * defect))
        lams.append(lam)
    return (lams[0], lams[1]), math.sqrt(res_sq)


def operator_scale(grid: GridSpec, field: RealField) -> float:
    """Reference magnitude for residual comparisons: L2 norm of (Lap u_1, Lap u_2)."""
    total = 0.0
    for u in field.components:
        lap = apply_laplacian(grid, u)
        total += float(quadrature(grid, lap * lap))
    return math.sqrt(total)


def _check_solver_grid(grid: GridSpec, params: ModelParams):
    if grid.kind != RADIAL:
        raise ValueError("ground-state solves require a radial grid")
    if grid.dimension != params.dimension:
        raise ValueError("grid dimension does not match the model dimension")


def minimize_mass_constrained(grid: GridSpec, params: ModelParams,
                              rho: tuple[float, float], cfg: SolverConfig,
                              initial: RealField | None = None,
                              track_history: bool = False) -> GroundState:
    """Minimize the field energy over fixed component norms ||u_j||^2 = rho_j.

    Normalized gradient flow: implicit Laplacian step, modulus flip (which
    never increases the energy), per-component renormalization, and a
    monotone-guarded decreasing-rearrangement sweep every rearrange_every
    accepted steps.  Stops once three consecutive accepted steps decrease the
    energy by less than tol relative, or at max_iters (flagged not converged).
    """
    require_valid(params)
    _check_solver_grid(grid, params)
    if any(r <= 0 for r in rho):
        raise ValueError("rho components must be positive")

    u = initial.copy() if initial is not None else _initial_field(grid, rho, cfg.seed)
    u = RealField(grid, _rescale(grid, np.abs(u.u1), rho[0]),
                  _rescale(grid, np.abs(u.u2), rho[1]))
    value = field_energy(grid, params, u)
    tau = cfg.step
    history_j, history_e = [value], [_dirichlet_total(grid, u)]
    small_steps = 0
    accepted = 0
    converged = False
    iters = 0

    while iters < cfg.max_iters:
        iters += 1
        _, d1, d2 = nonlinearity_eval(params, u.u1, u.u2)
        moved = False
        while tau >= _TAU_MIN:
            ab = _implicit_bands(grid, tau, 0.0)
            v1 = solve_banded((1, 1), ab, u.u1 - tau * d1)
            v2 = solve_banded((1, 1), ab, u.u2 - tau * d2)
            cand = RealField(grid, _rescale(grid, np.abs(v1), rho[0]),
                             _rescale(grid, np.abs(v2), rho[1]))
            cand_value = field_energy(grid, params, cand)
            if cand_value <= value:
                moved = True
                break
            tau *= cfg.backtrack
        if not moved:
            break
        drop = value - cand_value
        u, value = cand, cand_value
        accepted += 1
        tau = min(tau * 1.25, _TAU_CAP)

        if cfg.rearrange_every and accepted % cfg.rearrange_every == 0:
            swept = RealField(grid, _rescale(grid, _decreasing_sweep(grid, u.u1), rho[0]),
                              _rescale(grid, _decreasing_sweep(grid, u.u2), rho[1]))
            swept_value = field_energy(grid, params, swept)
            if swept_value <= value:
                u, value = swept, swept_value

        if track_history:
            history_j.append(value)
            history_e.append(_dirichlet_total(grid, u))
        small_steps = small_steps + 1 if drop < cfg.tol * max(abs(value), 1e-300) else 0
        if small_steps >= 3:
            converged = True
            break

    multipliers, residual = multipliers_and_residual(grid, params, u)
    omega = tuple(math.sqrt(lam + m * m) if lam + m * m >= 0 else math.nan
                  for lam, m in zip(multipliers, params.masses))
    history = {"value": np.array(history_j), "dirichlet": np.array(history_e)} \
        if track_history else None
    return GroundState(field=u, rho=tuple(rho), omega=omega, multipliers=multipliers,
                       value=value, residual=residual, iterations=iters,
                       converged=converged, objective="mass",
                       tail_fraction=_tail_fraction(grid, u), history=history)


def _dirichlet_total(grid: GridSpec, field: RealField) -> float:
    return dirichlet_energy(grid, field.u1) + dirichlet_energy(grid, field.u2)


def minimize_charge_constrained(grid: GridSpec, params: ModelParams,
                                charges: tuple[float, float], cfg: SolverConfig,
                                initial: RealField | None = None,
                                cross_check: bool = True,
                                track_history: bool = False) -> GroundState:
    """Minimize the total energy at fixed charges, with frequencies eliminated.

    The frequency of component j is w_j = C_j / ||u_j||^2, so the objective is
    the charge-form total energy and the flow runs unconstrained in u; the
    charge term penalizes norm collapse, and a component norm falling below
    MASS_FLOOR raises ConstraintCollapseError.  When cross_check is set, a
    mass-constrained solve at the attained norms is run and compared.
    """
    require_valid(params)
    _check_solver_grid(grid, params)
    if any(c <= 0 for c in charges):
        raise ValueError("charges must be positive")

    u = initial.copy() if initial is not None else _initial_field(grid, (1.0, 1.0), cfg.seed)
    u = RealField(grid, np.abs(u.u1), np.abs(u.u2))
    masses = params.masses

    def objective(f: RealField) -> float:
        return total_energy(grid, params, f, charges=charges)

    def norms_sq(f: RealField) -> tuple[float, float]:
        pair = (float(quadrature(grid, f.u1 ** 2)), float(quadrature(grid, f.u2 ** 2)))
        if min(pair) < MASS_FLOOR:
            raise ConstraintCollapseError(
                f"component norm {min(pair):.3g} fell below the floor {MASS_FLOOR:g}")
        return pair

    value = objective(u)
    tau = cfg.step
    history_e = [value]
    small_steps = 0
    converged = False
    iters = 0

    while iters < cfg.max_iters:
        iters += 1
        ns = norms_sq(u)
        omega_sq = (charges[0] ** 2 / ns[0] ** 2, charges[1] ** 2 / ns[1] ** 2)
        _, d1, d2 = nonlinearity_eval(params, u.u1, u.u2)
        rhs = (u.u1 - tau * (d1 - omega_sq[0] * u.u1),
               u.u2 - tau * (d2 - omega_sq[1] * u.u2))
        moved = False
        while tau >= _TAU_MIN:
            v1 = solve_banded((1, 1), _implicit_bands(grid, tau, masses[0] ** 2), rhs[0])
            v2 = solve_banded((1, 1), _implicit_bands(grid, tau, masses[1] ** 2), rhs[1])
            cand = RealField(grid, np.abs(v1), np.abs(v2))
            norms_sq(cand)
            cand_value = objective(cand)
            if cand_value <= value:
                moved = True
                break
            tau *= cfg.backtrack
            rhs = (u.u1 - tau * (d1 - omega_sq[0] * u.u1),
                   u.u2 - tau * (d2 - omega_sq[1] * u.u2))
        if not moved:
            break
        drop = value - cand_value
        u, value = cand, cand_value
        tau = min(tau * 1.25, _TAU_CAP)
        if track_history:
            history_e.append(value)
        small_steps = small_steps + 1 if drop < cfg.tol * max(abs(value), 1e-300) else 0
        if small_steps >= 3:
            converged = True
            break

    rho = norms_sq(u)
    omega = (charges[0] / rho[0], charges[1] / rho[1])
    multipliers, residual = multipliers_and_residual(grid, params, u)
    check = None
    if cross_check:
        mass_cfg = SolverConfig(step=cfg.step, tol=cfg.tol, max_iters=cfg.max_iters,
                                backtrack=cfg.backtrack, seed=cfg.seed + 1,
                                rearrange_every=cfg.rearrange_every)
        mass_gs = minimize_mass_constrained(grid, params, rho, mass_cfg, initial=u)
        j_here = field_energy(grid, params, u)
        check = {"rho": list(rho), "field_energy": j_here,
                 "mass_solve_value": mass_gs.value,
                 "rel_gap": abs(j_here - mass_gs.value) / max(abs(mass_gs.value), 1e-300)}
    history = {"value": np.array(history_e)} if track_history else None
    return GroundState(field=u, rho=rho, omega=omega, multipliers=multipliers,
                       value=value, residual=residual, iterations=iters,
                       converged=converged, objective="charge",
                       tail_fraction=_tail_fraction(grid, u),
                       history=history, cross_check=check)


@dataclass
class SubadditivityRow:
    split: tuple[float, float]
    value_split: float          # minimum at the split norms
    value_complement: float     # minimum at the complementary norms
    value_total: float          # minimum at the full norms
    margin: float               # value_split + value_complement - value_total
    converged: bool

    @property
    def margin_positive(self) -> bool:
        return self.margin > 0.0


@dataclass
class SubadditivityTable:
    rho: tuple[float, float]
    rows: list[SubadditivityRow] = dc_field(default_factory=list)

    @property
    def all_margins_positive(self) -> bool:
        return all(r.margin_positive for r in self.rows)


def subadditivity_scan(grid: GridSpec, params: ModelParams, rho: tuple[float, float],
                       splits: list[tuple[float, float]], cfg: SolverConfig) -> SubadditivityTable:
    """Tabulate the strict sub-additivity margins of the constrained minimum.

    For each split tau the row records the minima at tau, at rho - tau, and at
    rho, plus the margin; splitting the norms should always cost energy, so
    every margin is expected positive.  Splits must satisfy 0 < tau_j < rho_j
    componentwise; tau = rho raises "split equals total".
    """
    for tau in splits:
        if len(tau) != 2:
            raise ValueError("each split must have two components")
        if tau[0] == rho[0] and tau[1] == rho[1]:
            raise ValueError("split equals total")
        if any(t <= 0 for t in tau):
            raise ValueError("split components must be positive")
        if any(t > r for t, r in zip(tau, rho)):
            raise ValueError("split components must not exceed the totals")
        if any(t == r for t, r in zip(tau, rho)):
            raise ValueError("split leaves a zero-norm component; keep tau_j < rho_j")

    def solve(norms, seed):
        sub_cfg = SolverConfig(step=cfg.step, tol=cfg.tol, max_iters=cfg.max_iters,
                               backtrack=cfg.backtrack, seed=seed,
                               rearrange_every=cfg.rearrange_every)
        return minimize_mass_constrained(grid, params, norms, sub_cfg)

    total = solve(rho, cfg.seed)
    table = SubadditivityTable(rho=tuple(rho))
    for i, tau in enumerate(splits):
        sigma = (rho[0] - tau[0], rho[1] - tau[1])
        part = solve(tuple(tau), cfg.seed + 1000 + 2 * i)
        rest = solve(sigma, cfg.seed + 1001 + 2 * i)
        margin = part.value + rest.value - total.value
        table.rows.append(SubadditivityRow(
            split=tuple(tau), value_split=part.value, value_complement=rest.value,
            value_total=total.value, margin=margin,
            converged=part.converged and rest.converged and total.converged))
    return table
