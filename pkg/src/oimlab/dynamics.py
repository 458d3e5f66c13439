"""OIM phase dynamics under second-harmonic injection.

The phase velocity is

    f_i = -K sum_{j != i} W_ij sin(t_i - t_j) - K_s sin(2 t_i)

and the energy it descends is

    E = -K sum_{i != j} W_ij cos(t_i - t_j) - K_s sum_i cos(2 t_i),

with the pair sum running over ordered pairs, so that f = -grad(E) / 2.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from ._backend import kernels
from .ising import IsingInstance, as_spins

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OimParams:
    """Coupling strength ``k``, injection strength ``ks`` and gradient-flow constant ``alpha``.

    ``alpha`` never changes the simulated velocity; it only rescales the flow
    in the stability checks (dtheta/dt = 2*alpha*f).
    """

    k: float = 1.0
    ks: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if not self.ks >= 0:
            raise ValueError(f"ks must be >= 0, got {self.ks}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    t_max: float = 100.0
    stop_tol: float = 1e-8
    record_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_max >= self.dt:
            raise ValueError(f"t_max must be >= dt, got {self.t_max}")
        if not self.stop_tol > 0:
            raise ValueError(f"stop_tol must be > 0, got {self.stop_tol}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    converged: bool
    final_velocity_norm: float

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class NonBinary:
    """Readout outcome for phases that are not within tolerance of {0, pi}."""

    indices: tuple[int, ...]


class NonFiniteStateError(FloatingPointError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite phase state at integration step {step}")


def _phases(inst: IsingInstance, x) -> np.ndarray:
    theta = np.asarray(x, dtype=np.float64)
    if theta.shape != (inst.n,):
        raise ValueError(f"phase vector has shape {theta.shape}, expected ({inst.n},)")
    return theta


def _differences(theta):
    return theta[:, None] - theta[None, :]


def velocity(params: OimParams, inst: IsingInstance, x) -> np.ndarray:
    theta = _phases(inst, x)
    coupling = (inst.w * np.sin(_differences(theta))).sum(axis=1)
    return -params.k * coupling - params.ks * np.sin(2.0 * theta)


def energy(params: OimParams, inst: IsingInstance, x) -> float:
    theta = _phases(inst, x)
    pair = float((inst.w * np.cos(_differences(theta))).sum())
    return -params.k * pair - params.ks * float(np.cos(2.0 * theta).sum())


def energy_gradient(params: OimParams, inst: IsingInstance, x) -> np.ndarray:
    """Analytic gradient of :func:`energy`.

    Written as K * sum_j (W_ij + W_ji) sin(t_i - t_j) + 2 K_s sin(2 t_i), which
    is the true derivative even if ``w`` were not symmetric.
    """
    theta = _phases(inst, x)
    sym = inst.w + inst.w.T
    coupling = (sym * np.sin(_differences(theta))).sum(axis=1)
    return params.k * coupling + 2.0 * params.ks * np.sin(2.0 * theta)


def dissipation_rate(params: OimParams, inst: IsingInstance, x) -> float:
    """dE/dt along the flow, -2 * sum f_i^2."""
    f = velocity(params, inst, x)
    return -2.0 * float(f @ f)


def integrate(params: OimParams, inst: IsingInstance, init,
              cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Classical RK4 at fixed ``cfg.dt`` with early stop once ||f||_inf < stop_tol.

    Every ``record_stride``-th step is kept, together with the initial and
    final states. Phases are not wrapped.
    """
    theta0 = np.ascontiguousarray(_phases(inst, init))
    steps, states, converged, norm, bad = kernels.rk4_run(
        np.ascontiguousarray(inst.w), float(params.k), float(params.ks), theta0,
        float(cfg.dt), cfg.n_steps, float(cfg.stop_tol), int(cfg.record_stride))
    if bad >= 0:
        raise NonFiniteStateError(int(bad))
    energies = np.array([energy(params, inst, s) for s in states])
    return Trajectory(steps * cfg.dt, states, energies, bool(converged), float(norm))


def canonical_phases(x) -> np.ndarray:
    """Wrap phases into [0, 2*pi)."""
    c = np.mod(np.asarray(x, dtype=np.float64), TWO_PI)
    c[c >= TWO_PI] = 0.0
    return c


def angular_distance(a, b) -> np.ndarray:
    d = np.abs(canonical_phases(np.asarray(a) - np.asarray(b)))
    return np.minimum(d, TWO_PI - d)


def phases_to_spins(x, bin_tol: float = 0.1):
    """Read spins off phases: 0 -> +1, pi -> -1.

    Returns a spin array, or :class:`NonBinary` listing the indices farther
    than ``bin_tol`` from both 0 and pi.
    """
    if not 0 < bin_tol < math.pi / 4:
        raise ValueError(f"bin_tol must lie in (0, pi/4), got {bin_tol}")
    theta = np.asarray(x, dtype=np.float64)
    to_zero = angular_distance(theta, 0.0)
    to_pi = angular_distance(theta, math.pi)
    spins = np.where(to_zero <= bin_tol, 1, np.where(to_pi <= bin_tol, -1, 0))
    bad = np.flatnonzero(spins == 0)
    if bad.size:
        return NonBinary(tuple(int(i) for i in bad))
    return spins.astype(np.int64)


def spins_to_phases(s) -> np.ndarray:
    s = as_spins(s)
    return np.where(s == 1, 0.0, math.pi)


def write_trajectory_csv(traj: Trajectory, dest) -> None:
    """Write ``t,theta_0..theta_{N-1},energy`` rows to a path or open text file."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="") as fh:
            write_trajectory_csv(traj, fh)
        return
    n = traj.states.shape[1]
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(["t", *(f"theta_{i}" for i in range(n)), "energy"])
    for t, state, e in zip(traj.times, traj.states, traj.energies):
        writer.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in state), f"{e:.17g}"])


def read_trajectory_csv(path):
    """Return ``(times, states, energies)`` arrays from a trajectory CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:-1], data[:, -1]
