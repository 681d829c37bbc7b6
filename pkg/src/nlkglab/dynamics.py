"""Time evolution of the coupled wave system for complex two-component fields.

The second-order system phi_tt = Lap(phi_j) - m_j^2 phi_j - N_j(phi) is
integrated with velocity Verlet under the step bound dt <= h/2.  The complex
nonlinear force follows the modulus chain rule: the interaction density
depends on |phi_1|, |phi_2| only, so its gradient points along phi_j / |phi_j|
(extended by 0 where the modulus vanishes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, apply_laplacian, dirichlet_energy, quadrature, same_grid
from .model import ModelParams, nonlinearity_eval, total_energy
from .solve import GroundState


@dataclass(eq=False)
class PhaseState:
    """Point of the phase space: complex field pair plus time derivatives."""

    grid: GridSpec
    phi1: np.ndarray
    phi2: np.ndarray
    phit1: np.ndarray
    phit2: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        for name in ("phi1", "phi2", "phit1", "phit2"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.cells,):
                raise ValueError("component length must match the grid cell count")
            setattr(self, name, arr)

    def copy(self) -> "PhaseState":
        return PhaseState(self.grid, self.phi1.copy(), self.phi2.copy(),
                          self.phit1.copy(), self.phit2.copy(), self.time)

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in (self.phi1, self.phi2, self.phit1, self.phit2))


@dataclass
class TrajectoryRecord:
    """Sampled conserved quantities along an evolution, in CSV column order
    (t, E, C1, C2, dist, V); dist and V are NaN when no reference is given."""

    times: np.ndarray
    energy: np.ndarray
    charge1: np.ndarray
    charge2: np.ndarray
    dist: np.ndarray
    lyapunov: np.ndarray
    blowup: bool
    dt: float
    stride: int

    def relative_drift(self, which: str = "energy") -> float:
        """Max relative deviation of a tracked quantity from its initial value."""
        series = getattr(self, which)
        base = series[0]
        scale = abs(base) if base != 0 else 1.0
        return float(np.max(np.abs(series - base)) / scale)


def max_time_step(grid: GridSpec) -> float:
    """Stability bound for the explicit integrator."""
    return 0.5 * grid.spacing


def standing_wave_state(ground_state: GroundState,
                        phases: tuple[complex, complex] = (1.0, 1.0)) -> PhaseState:
    """Phase-space point (lam_j u_j, -i w_j lam_j u_j) at time zero.

    phases must be unit complex numbers; the ground state must carry finite
    frequencies.
    """
    for lam in phases:
        if abs(abs(lam) - 1.0) > 1e-12:
            raise ValueError("phases must have unit modulus")
    omega = ground_state.omega
    if any(not math.isfinite(w) for w in omega):
        raise ValueError("ground state has no real frequency pair")
    u1, u2 = ground_state.field.components
    l1, l2 = phases
    return PhaseState(ground_state.field.grid,
                      l1 * u1, l2 * u2,
                      -1j * omega[0] * l1 * u1, -1j * omega[1] * l2 * u2,
                      time=0.0)


def observables(state: PhaseState, params: ModelParams) -> tuple[float, float, float]:
    """Conserved energy and charges (E, C1, C2) of a phase-space point.

    E = (1/2) int |phi_t|^2 + |D phi|^2 + 2 V(phi) with
    V(phi) = (1/2)(m1^2 |phi1|^2 + m2^2 |phi2|^2) + F(|phi1|, |phi2|);
    C_j = -Im int phi_t^j conj(phi_j).
    """
    grid = state.grid
    mod1, mod2 = np.abs(state.phi1), np.abs(state.phi2)
    f, _, _ = nonlinearity_eval(params, mod1, mod2)
    potential = 0.5 * (params.m1 ** 2 * mod1 ** 2 + params.m2 ** 2 * mod2 ** 2) + f
    kinetic = 0.5 * float(quadrature(grid, np.abs(state.phit1) ** 2 + np.abs(state.phit2) ** 2))
    gradient = 0.5 * (dirichlet_energy(grid, state.phi1) + dirichlet_energy(grid, state.phi2))
    energy = kinetic + gradient + float(quadrature(grid, potential))
    c1 = -float(np.imag(quadrature(grid, state.phit1 * np.conj(state.phi1))))
    c2 = -float(np.imag(quadrature(grid, state.phit2 * np.conj(state.phi2))))
    return energy, c1, c2


def _unit_direction(phi: np.ndarray, mod: np.ndarray) -> np.ndarray:
    out = np.zeros_like(phi)
    np.divide(phi, mod, out=out, where=mod > 0)
    return out


def _acceleration(state: PhaseState, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    grid = state.grid
    mod1, mod2 = np.abs(state.phi1), np.abs(state.phi2)
    _, d1, d2 = nonlinearity_eval(params, mod1, mod2)
    force1 = d1 * _unit_direction(state.phi1, mod1)
    force2 = d2 * _unit_direction(state.phi2, mod2)
    a1 = apply_laplacian(grid, state.phi1) - params.m1 ** 2 * state.phi1 - force1
    a2 = apply_laplacian(grid, state.phi2) - params.m2 ** 2 * state.phi2 - force2
    return a1, a2


def step_leapfrog(state: PhaseState, params: ModelParams, dt: float) -> PhaseState:
    """One velocity-Verlet step; second order, symmetric, time-reversible.

    Raises ValueError when dt exceeds the stability bound h/2.
    """
    if dt > max_time_step(state.grid) * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the stability bound {max_time_step(state.grid):g}")
    a1, a2 = _acceleration(state, params)
    phi1 = state.phi1 + dt * state.phit1 + 0.5 * dt * dt * a1
    phi2 = state.phi2 + dt * state.phit2 + 0.5 * dt * dt * a2
    mid = PhaseState(state.grid, phi1, phi2, state.phit1, state.phit2, state.time)
    b1, b2 = _acceleration(mid, params)
    phit1 = state.phit1 + 0.5 * dt * (a1 + b1)
    phit2 = state.phit2 + 0.5 * dt * (a2 + b2)
    return PhaseState(state.grid, phi1, phi2, phit1, phit2, state.time + dt)


def evolve(state: PhaseState, params: ModelParams, horizon: float, dt: float,
           stride: int = 1, reference=None) -> TrajectoryRecord:
    """Evolve a state and sample observables every `stride` steps.

    With a reference (an OrbitReference, or a GroundState which is wrapped),
    the distance to the standing-wave orbit and the Lyapunov value are sampled
    too.  Any non-finite sample aborts the run and flags blow-up; the partial
    record is returned.
    """
    if dt <= 0 or horizon <= 0:
        raise ValueError("horizon and dt must be positive")
    if dt > max_time_step(state.grid) * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the stability bound {max_time_step(state.grid):g}")
    if stride < 1:
        raise ValueError("stride must be at least 1")

    orbit_ref = None
    if reference is not None:
        from .stability import OrbitReference, lyapunov as lyapunov_value, orbit_distance
        orbit_ref = reference if isinstance(reference, OrbitReference) \
            else OrbitReference.from_ground_state(reference, params)

    rows = []

    def sample(s: PhaseState):
        e, c1, c2 = observables(s, params)
        if orbit_ref is not None:
            d = orbit_distance(s, orbit_ref)
            v = lyapunov_value(s, orbit_ref, params)
        else:
            d = v = math.nan
        rows.append((s.time, e, c1, c2, d, v))

    steps = max(1, int(round(horizon / dt)))
    current = state.copy()
    sample(current)
    blowup = False
    a_prev = _acceleration(current, params)
    for k in range(1, steps + 1):
        # velocity Verlet with the force reused across steps
        phi1 = current.phi1 + dt * current.phit1 + 0.5 * dt * dt * a_prev[0]
        phi2 = current.phi2 + dt * current.phit2 + 0.5 * dt * dt * a_prev[1]
        nxt = PhaseState(current.grid, phi1, phi2, current.phit1, current.phit2, current.time)
        a_next = _acceleration(nxt, params)
        nxt.phit1 = current.phit1 + 0.5 * dt * (a_prev[0] + a_next[0])
        nxt.phit2 = current.phit2 + 0.5 * dt * (a_prev[1] + a_next[1])
        nxt.time = current.time + dt
        current, a_prev = nxt, a_next
        if not current.is_finite():
            blowup = True
            break
        if k % stride == 0 or k == steps:
            sample(current)

    cols = np.array(rows, dtype=float)
    return TrajectoryRecord(times=cols[:, 0], energy=cols[:, 1], charge1=cols[:, 2],
                            charge2=cols[:, 3], dist=cols[:, 4], lyapunov=cols[:, 5],
                            blowup=blowup, dt=dt, stride=stride)
