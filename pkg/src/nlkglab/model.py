"""Coupled two-component nonlinearity, admissibility checks, and energy functionals.

The interaction density is

    F(z1, z2) = -beta |z1 z2|^gamma + a (|z1|^p + |z2|^p),

an attractive coupling plus a nonnegative power perturbation.  The functionals
built from it are the field energy (gradient + interaction terms, the quantity
minimized under fixed component norms) and the total energy, which adds mass
and frequency terms and is minimized under fixed charges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import (GridSpec, RADIAL, apply_laplacian, dirichlet_energy,
                   quadrature, same_grid)


@dataclass(frozen=True)
class ModelParams:
    """Nonlinearity and mass parameters.

    beta >= 0 is the coupling strength, gamma its exponent, a >= 0 and p the
    perturbation coefficient and growth exponent, m1/m2 the component masses,
    and dimension the ambient space dimension used for admissibility ranges.
    """

    beta: float
    gamma: float
    a: float
    p: float
    m1: float
    m2: float
    dimension: int = 3

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.a < 0:
            raise ValueError("a must be nonnegative")
        if self.m1 <= 0 or self.m2 <= 0:
            raise ValueError("masses must be positive")

    @property
    def masses(self) -> tuple[float, float]:
        return (self.m1, self.m2)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "gamma": self.gamma, "a": self.a, "p": self.p,
                "m1": self.m1, "m2": self.m2, "dimension": self.dimension}


@dataclass(frozen=True)
class ConstraintSpec:
    """Either fixed squared norms ("mass") or fixed charges ("charge")."""

    kind: str
    values: tuple[float, float]

    def __post_init__(self):
        if self.kind not in ("mass", "charge"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if len(self.values) != 2 or any(v <= 0 for v in self.values):
            raise ValueError("constraint values must be two positive numbers")


@dataclass(eq=False)
class RealField:
    """Two-component real field sampled on a grid."""

    grid: GridSpec
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        for u in (self.u1, self.u2):
            if u.shape != (self.grid.cells,):
                raise ValueError("component length must match the grid cell count")

    @property
    def components(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.u1, self.u2)

    def copy(self) -> "RealField":
        return RealField(self.grid, self.u1.copy(), self.u2.copy())


@dataclass(frozen=True)
class CheckResult:
    label: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    """Per-assumption admissibility results for a ModelParams."""

    coupling_range: CheckResult      # A1: 1 < gamma < 1 + 2/n
    growth_range: CheckResult        # A2: 2 gamma < p < 2n/(n-2)
    perturbation_sign: CheckResult   # A3: a >= 0, moduli dependence
    rearrangement: CheckResult       # A4: equimeasurability, holds with equality
    mass_floor: CheckResult          # A5: pointwise domination by the mass terms
    t_star: float
    min_admissible_mass: float

    @property
    def checks(self) -> tuple[CheckResult, ...]:
        return (self.coupling_range, self.growth_range, self.perturbation_sign,
                self.rearrangement, self.mass_floor)

    @property
    def all_passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> dict:
        out = {c.label: {"ok": c.ok, "detail": c.detail} for c in self.checks}
        out["t_star"] = self.t_star
        out["min_admissible_mass"] = self.min_admissible_mass
        return out


def validate_params(params: ModelParams) -> ValidationReport:
    """Check the admissibility ranges A1-A5 and report each outcome.

    A5 (the quadratic mass terms dominate the attractive coupling pointwise)
    is decided by a scalar reduction: |z1 z2|^gamma <= (|z1|^(2g) + |z2|^(2g))/2
    leaves per-component profiles h(t) = -(beta/2) t^(2g) + a t^p + (m^2/2) t^2,
    whose sign is settled analytically and cross-checked by a scan on [0, T*],
    T* chosen so the p-term dominates beyond it.  When A5 fails the report
    carries the minimal admissible mass (inf when a = 0 and beta > 0).
    """
    n = params.dimension
    g, p = params.gamma, params.p
    gamma_hi = 1.0 + 2.0 / n
    a1 = CheckResult("A1", 1.0 < g < gamma_hi,
                     f"gamma={g} must lie in (1, {gamma_hi:.6g})")
    crit = 2.0 * n / (n - 2) if n > 2 else math.inf
    a2 = CheckResult("A2", 2.0 * g < p < crit,
                     f"p={p} must lie in ({2.0 * g:.6g}, {crit:.6g})")
    a3 = CheckResult("A3", params.a >= 0,
                     f"a={params.a} must be nonnegative so the perturbation is >= 0")
    a4 = CheckResult("A4", params.a >= 0,
                     "perturbation depends on moduli only; rearrangement preserves its integral")

    beta, a = params.beta, params.a
    m_min = min(params.m1, params.m2)
    t_star = 0.0
    if beta == 0.0:
        a5 = CheckResult("A5", True, "no attractive coupling; mass terms trivially dominate")
        need = 0.0
    elif a == 0.0:
        need = math.inf
        a5 = CheckResult("A5", False,
                         "a=0: the quadratic term cannot dominate the coupling growth")
    elif p <= 2.0 * g:
        need = math.inf
        a5 = CheckResult("A5", False, "requires p > 2*gamma for the p-term to dominate")
    else:
        # need m^2/2 >= max_t [ (beta/2) t^(2g-2) - a t^(p-2) ]
        t_peak = (beta * (g - 1.0) / (a * (p - 2.0))) ** (1.0 / (p - 2.0 * g))
        peak = 0.5 * beta * t_peak ** (2.0 * g - 2.0) - a * t_peak ** (p - 2.0)
        need = math.sqrt(max(2.0 * peak, 0.0))
        t_star = 2.0 * (beta / a) ** (1.0 / (p - 2.0 * g))
        ts = np.linspace(0.0, t_star, 2001)
        h = -0.5 * beta * ts ** (2.0 * g) + a * ts ** p + 0.5 * m_min ** 2 * ts ** 2
        scan_min = float(h.min())
        ok = m_min >= need * (1.0 - 1e-12)
        a5 = CheckResult("A5", ok,
                         f"min mass {m_min:.6g} vs required {need:.6g} "
                         f"(scan min over [0, {t_star:.4g}] = {scan_min:.3g})")
    return ValidationReport(a1, a2, a3, a4, a5, t_star=t_star, min_admissible_mass=need)


def require_valid(params: ModelParams):
    """Raise ValueError listing every violated admissibility range."""
    report = validate_params(params)
    if not report.all_passed:
        msgs = "; ".join(f"{c.label} violated: {c.detail}" for c in report.failures())
        raise ValueError(msgs)
    return report


def nonlinearity_eval(params: ModelParams, z1, z2):
    """Interaction density and its partial derivatives, (F, D1F, D2F).

    Accepts scalars or arrays.  At z_j = 0 the derivatives extend continuously
    to 0 (valid since gamma > 1 and p > 2).
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    b, g, a, p = params.beta, params.gamma, params.a, params.p
    a1, a2 = np.abs(z1), np.abs(z2)
    s1, s2 = np.sign(z1), np.sign(z2)
    f = -b * (a1 * a2) ** g + a * (a1 ** p + a2 ** p)
    d1 = -b * g * a1 ** (g - 1.0) * s1 * a2 ** g + a * p * a1 ** (p - 1.0) * s1
    d2 = -b * g * a2 ** (g - 1.0) * s2 * a1 ** g + a * p * a2 ** (p - 1.0) * s2
    if f.ndim == 0:
        return float(f), float(d1), float(d2)
    return f, d1, d2


def field_energy(grid: GridSpec, params: ModelParams, field: RealField) -> float:
    """Gradient plus interaction energy, (1/2) sum_j ||Du_j||^2 + int F(u)."""
    if not same_grid(grid, field.grid):
        raise ValueError("field grid does not match")
    f, _, _ = nonlinearity_eval(params, field.u1, field.u2)
    return 0.5 * (dirichlet_energy(grid, field.u1) + dirichlet_energy(grid, field.u2)) \
        + float(quadrature(grid, f))


def field_energy_gradient(grid: GridSpec, params: ModelParams, field: RealField) -> RealField:
    """L2 gradient of the field energy: component j is -Lap(u_j) + D_jF(u)."""
    if not same_grid(grid, field.grid):
        raise ValueError("field grid does not match")
    _, d1, d2 = nonlinearity_eval(params, field.u1, field.u2)
    return RealField(grid,
                     -apply_laplacian(grid, field.u1) + d1,
                     -apply_laplacian(grid, field.u2) + d2)


def total_energy(grid: GridSpec, params: ModelParams, field: RealField,
                 omega: tuple[float, float] | None = None,
                 charges: tuple[float, float] | None = None) -> float:
    """Full energy with mass terms, in frequency or charge form.

    Frequency form: (1/2) sum_j (||Du_j||^2 + m_j^2 ||u_j||^2 + w_j^2 ||u_j||^2)
    plus int F(u).  Charge form eliminates w_j = C_j / ||u_j||^2, adding
    (1/2) C_j^2 / ||u_j||^2 instead; it requires both component norms positive.
    """
    if (omega is None) == (charges is None):
        raise ValueError("pass exactly one of omega or charges")
    if not same_grid(grid, field.grid):
        raise ValueError("field grid does not match")
    masses = params.masses
    value = field_energy(grid, params, field)
    for j, u in enumerate(field.components):
        norm_sq = float(quadrature(grid, u * u))
        value += 0.5 * masses[j] ** 2 * norm_sq
        if omega is not None:
            value += 0.5 * omega[j] ** 2 * norm_sq
        else:
            if norm_sq <= 0.0:
                raise ValueError("charge form requires both component norms positive")
            value += 0.5 * charges[j] ** 2 / norm_sq
    return value


def scaling_trial(params: ModelParams, grid: GridSpec, rho: tuple[float, float],
                  r_scale: float, support_radius: float = 10.0) -> RealField:
    """Dilated-bump trial field with component norms renormalized to rho.

    The base profile is the smooth bump (1 - (r/support_radius)^2)^2, dilated
    by r_scale and scaled per component so ||u_j||^2 = rho_j exactly.  Both
    components share the profile, so u2 = sqrt(rho2/rho1) * u1.  Raises if the
    dilated support does not fit strictly inside the grid.
    """
    if grid.kind != RADIAL:
        raise ValueError("scaling trials require a radial grid")
    if r_scale <= 0 or support_radius <= 0:
        raise ValueError("r_scale and support_radius must be positive")
    if any(r <= 0 for r in rho):
        raise ValueError("rho components must be positive")
    support = r_scale * support_radius
    if support > grid.extent - grid.spacing:
        raise ValueError(f"grid too small: dilated support {support:.6g} does not fit "
                         f"inside extent {grid.extent:.6g}")
    s = grid.nodes / support
    profile = np.where(s < 1.0, (1.0 - s ** 2) ** 2, 0.0)
    norm_sq = float(quadrature(grid, profile * profile))
    u1 = math.sqrt(rho[0] / norm_sq) * profile
    u2 = math.sqrt(rho[1] / norm_sq) * profile
    return RealField(grid, u1, u2)
