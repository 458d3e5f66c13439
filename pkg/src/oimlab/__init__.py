"""Oscillator Ising machine simulation and fixed-point stability analysis."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .dynamics import (IntegratorConfig, NonBinary, OimParams, Trajectory, dissipation_rate,
                       energy, energy_gradient, integrate, phases_to_spins, velocity)
from .experiments import BasinStats, SweepTable, ks_sweep, monte_carlo_basins, solve
from .fixed_points import (FixedPointCatalog, FixedPointRecord, enumerate_spin_fixed_points,
                           harvest_from_trajectories, refine_fixed_point)
from .ising import (GroundStateResult, IsingInstance, MaxCutGraph, brute_force_ground,
                    cut_value, ising_energy, parse_edge_list, to_ising)
from .stability import (Classification, EigenSpectrum, EquivalenceReport, classify,
                        eigenvalues_symmetric, equivalence_report, finite_difference_matrix,
                        hessian, jacobian)
