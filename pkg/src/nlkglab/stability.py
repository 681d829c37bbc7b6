"""Distance to the standing-wave orbit, the Lyapunov functional, and experiments.

The orbit of a ground state consists of its per-component phase rotations
(translations are frozen: radial states have a canonical center).  Distance is
measured in the metric induced by the phase-space scalar product on values and
time derivatives; an optional gradient weight adds the derivative pairing to
the value slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import GridSpec, LINE, dirichlet_energy, gradient_pairing, quadrature, same_grid
from .model import ModelParams, total_energy
from .solve import GroundState
from .dynamics import PhaseState, evolve, observables, standing_wave_state


@dataclass(frozen=True)
class OrbitReference:
    """A ground state together with its orbit energy and charges."""

    ground_state: GroundState
    orbit_energy: float
    charges: tuple[float, float]

    @classmethod
    def from_ground_state(cls, gs: GroundState, params: ModelParams) -> "OrbitReference":
        if any(not math.isfinite(w) for w in gs.omega):
            raise ValueError("ground state has no real frequency pair")
        charges = (gs.omega[0] * gs.rho[0], gs.omega[1] * gs.rho[1])
        if gs.objective == "charge":
            energy = gs.value
        else:
            energy = total_energy(gs.field.grid, params, gs.field, omega=gs.omega)
        return cls(ground_state=gs, orbit_energy=energy, charges=charges)


def _component_distance_sq(grid: GridSpec, phi: np.ndarray, phit: np.ndarray,
                           u: np.ndarray, omega: float, grad_weight: float) -> float:
    """Squared distance of one component to its phase orbit, minimized in
    closed form over the unit phase: lam* = z/|z| with

        z = <phi, u> + gw <D phi, D u> + <phi_t, -i w u>

    (complex pairings against the real profile u); z = 0 falls back to lam = 1.
    """
    norm_u = float(quadrature(grid, u * u))
    z = complex(quadrature(grid, phi * u))
    const = (float(quadrature(grid, np.abs(phi) ** 2)) + norm_u
             + float(quadrature(grid, np.abs(phit) ** 2)) + omega ** 2 * norm_u)
    if grad_weight:
        z += grad_weight * complex(gradient_pairing(grid, phi, u))
        const += grad_weight * (dirichlet_energy(grid, phi) + dirichlet_energy(grid, u))
    z += 1j * omega * complex(quadrature(grid, phit * u))
    best = abs(z) if z != 0 else z.real  # lam = 1 when z vanishes
    return max(const - 2.0 * best, 0.0)


def _shifted(u: np.ndarray, cells: int) -> np.ndarray:
    out = np.zeros_like(u)
    if cells >= 0:
        out[cells:] = u[:u.size - cells] if cells else u
    else:
        out[:cells] = u[-cells:]
    return out


def orbit_distance(state: PhaseState, reference: OrbitReference,
                   grad_weight: float = 0.0, translation_search: bool | None = None) -> float:
    """Distance from a phase-space point to the standing-wave orbit.

    The optimal phase per component is closed-form; on line grids an integer
    cross-correlation shift search over the profile is run as well (radial
    states have a canonical center, so no translation there).
    """
    gs = reference.ground_state
    grid = state.grid
    if not same_grid(grid, gs.field.grid):
        raise ValueError("state and reference grids do not match")
    if translation_search is None:
        translation_search = grid.kind == LINE
    shifts = range(-grid.cells // 2, grid.cells // 2 + 1) if translation_search else (0,)

    best = math.inf
    for k in shifts:
        total = 0.0
        for phi, phit, u, w in ((state.phi1, state.phit1, gs.field.u1, gs.omega[0]),
                                (state.phi2, state.phit2, gs.field.u2, gs.omega[1])):
            total += _component_distance_sq(grid, phi, phit, _shifted(u, k), w, grad_weight)
        best = min(best, total)
    return math.sqrt(best)


def lyapunov(state: PhaseState, reference: OrbitReference, params: ModelParams) -> float:
    """(E - E_orbit)^2 + sum_j (C_j - C_j_orbit)^2; zero exactly on the orbit."""
    e, c1, c2 = observables(state, params)
    return ((e - reference.orbit_energy) ** 2
            + (c1 - reference.charges[0]) ** 2
            + (c2 - reference.charges[1]) ** 2)


@dataclass(frozen=True)
class ModulusPhaseReport:
    """Outcome of the modulus/phase rigidity check for one complex field."""

    norm_gap: float            # energy(phi) - energy(|phi|), nonnegative up to roundoff
    scale: float               # energy(phi), the comparison magnitude
    hypothesis_ok: bool        # |phi| > 0 at every cell
    phase_constant: bool | None  # None when the positivity hypothesis fails
    lam: complex | None        # the constant unit phase, when recovered
    total_variation: float     # summed phase increments across cells


def modulus_phase_check(grid: GridSpec, samples: np.ndarray,
                        tol: float = 1e-9) -> ModulusPhaseReport:
    """Compare gradient energies of a complex field and its modulus.

    The gap is nonnegative for every field.  When the modulus is positive
    everywhere and the gap is below tol * scale, the phase field phi/|phi| is
    extracted; if its total variation is below 1e-6 per cell the field is a
    constant unit phase times its modulus, and that phase is reported.
    """
    samples = np.asarray(samples, dtype=complex)
    mod = np.abs(samples)
    energy_phi = dirichlet_energy(grid, samples)
    energy_mod = dirichlet_energy(grid, mod)
    gap = energy_phi - energy_mod
    scale = max(energy_phi, 1e-300)
    hypothesis_ok = bool(np.all(mod > 0))
    if not hypothesis_ok:
        return ModulusPhaseReport(norm_gap=gap, scale=scale, hypothesis_ok=False,
                                  phase_constant=None, lam=None, total_variation=math.nan)
    phase = samples / mod
    tv = float(np.sum(np.abs(np.diff(phase))))
    constant = gap <= tol * scale and tv <= 1e-6 * grid.cells
    lam = None
    if constant:
        weighted = np.sum(grid.weights * mod * phase)
        lam = complex(weighted / abs(weighted))
    return ModulusPhaseReport(norm_gap=gap, scale=scale, hypothesis_ok=True,
                              phase_constant=constant, lam=lam, total_variation=tv)


@dataclass
class StabilityRow:
    epsilon: float
    max_dist: float
    max_lyapunov: float
    blowup: bool


@dataclass
class StabilityReport:
    """Perturbation-ladder outcome: per-epsilon maxima plus the pooled
    (lyapunov, dist) samples for the equivalence scatter."""

    rows: list[StabilityRow] = dc_field(default_factory=list)
    samples: list[tuple[float, float, float]] = dc_field(default_factory=list)  # (eps, V, dist)

    @property
    def monotone_dist(self) -> bool:
        vals = [r.max_dist for r in self.rows]
        return all(a <= b * (1.0 + 1e-12) for a, b in zip(vals, vals[1:]))

    @property
    def monotone_lyapunov(self) -> bool:
        vals = [r.max_lyapunov for r in self.rows]
        return all(a <= b * (1.0 + 1e-12) for a, b in zip(vals, vals[1:]))

    def summary(self) -> dict:
        return {"epsilons": [r.epsilon for r in self.rows],
                "max_dist": [r.max_dist for r in self.rows],
                "max_lyapunov": [r.max_lyapunov for r in self.rows],
                "blowup": [r.blowup for r in self.rows],
                "monotone_dist": self.monotone_dist,
                "monotone_lyapunov": self.monotone_lyapunov}


def perturbed_standing_wave(reference: OrbitReference, epsilon: float) -> PhaseState:
    """Standing wave scaled by the multiplicative radial bump (1 + eps b(r)),
    b a centered Gaussian of width a quarter of the domain."""
    state = standing_wave_state(reference.ground_state)
    grid = state.grid
    bump = 1.0 + epsilon * np.exp(-(grid.nodes / (grid.extent / 4.0)) ** 2)
    state.phi1 = state.phi1 * bump
    state.phi2 = state.phi2 * bump
    state.phit1 = state.phit1 * bump
    state.phit2 = state.phit2 * bump
    return state


def stability_experiment(reference: OrbitReference, params: ModelParams,
                         epsilons: list[float], horizon: float, dt: float,
                         stride: int = 10) -> StabilityReport:
    """Evolve a ladder of multiplicatively perturbed standing waves.

    epsilons must be nonnegative and increasing with first entry 0 (the
    baseline row measures the pure integrator drift).  Each row records the
    maximum orbit distance and Lyapunov value over the sampled trajectory;
    blow-ups are flagged and propagate into the row.
    """
    if len(epsilons) == 0 or epsilons[0] != 0.0:
        raise ValueError("epsilons must start at 0")
    if any(e < 0 for e in epsilons) or any(a >= b for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("epsilons must be nonnegative and strictly increasing")

    report = StabilityReport()
    for eps in epsilons:
        state = perturbed_standing_wave(reference, eps)
        record = evolve(state, params, horizon, dt, stride=stride, reference=reference)
        report.rows.append(StabilityRow(epsilon=eps,
                                        max_dist=float(np.max(record.dist)),
                                        max_lyapunov=float(np.max(record.lyapunov)),
                                        blowup=record.blowup))
        report.samples.extend((eps, v, d) for v, d in zip(record.lyapunov, record.dist))
    return report
