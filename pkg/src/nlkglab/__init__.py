"""Numerical laboratory for coupled nonlinear Klein-Gordon standing waves."""

from .grid import GridSpec, build_grid, quadrature, apply_laplacian, dirichlet_energy
from .model import (ModelParams, ConstraintSpec, RealField, ValidationReport,
                    validate_params, nonlinearity_eval, field_energy,
                    field_energy_gradient, total_energy, scaling_trial)
from .solve import (SolverConfig, GroundState, ConstraintCollapseError,
                    minimize_mass_constrained, minimize_charge_constrained,
                    multipliers_and_residual, subadditivity_scan)
from .rearrange import (LineProfile, symmetric_rearrange_line, steiner_rearrange,
                        check_steiner_lemma)
from .dynamics import PhaseState, TrajectoryRecord, standing_wave_state, observables, \
    step_leapfrog, evolve
from .stability import (OrbitReference, orbit_distance, lyapunov,
                        modulus_phase_check, stability_experiment)

__version__ = "0.1.0"
