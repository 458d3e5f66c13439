"""Fixed-point catalogs: binary spin points, Newton refinement and trajectory harvesting."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ._parallel import RNG_NAME, ordered_map, sample_rng
from .dynamics import (TWO_PI, IntegratorConfig, OimParams, angular_distance,
                       canonical_phases, integrate, phases_to_spins, spins_to_phases, velocity)
from .ising import (MAX_ENUMERATION_N, EnumerationGuardError, IsingInstance, brute_force_ground,
                    degeneracy_tol, spins_from_index, spins_to_str)
from .stability import DEFAULT_EIGEN_TOL, StabilityReport, inf_norm, jacobian, stability_report

FIXED_POINT_TOL = 1e-10
BINARY_VELOCITY_TOL = 1e-12
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
DEDUP_TOL = 1e-6


class SingularJacobianError(ArithmeticError):
    pass


class MaxIterationsError(ArithmeticError):
    def __init__(self, message, theta=None, residual=math.nan):
        super().__init__(message)
        self.theta = theta
        self.residual = residual


@dataclass(frozen=True, eq=False)
class FixedPointRecord:
    report: StabilityReport
    is_global_optimum: bool | None = None
    bin_tol: float = 0.1

    @property
    def phases(self) -> np.ndarray:
        return self.report.point

    @property
    def spins(self):
        """Spin array, or :class:`NonBinary` when the phases do not binarize."""
        if self.report.spins is not None:
            return self.report.spins
        return phases_to_spins(self.phases, self.bin_tol)

    @property
    def oim_energy(self) -> float:
        return self.report.energy

    @property
    def ising_energy(self) -> float | None:
        return self.report.ising_energy

    def to_dict(self, id_: int | None = None) -> dict:
        d = {} if id_ is None else {"id": id_}
        d.update(self.report.to_dict())
        d["is_global_optimum"] = self.is_global_optimum
        return d

    @classmethod
    def from_dict(cls, d: dict, bin_tol: float = 0.1) -> "FixedPointRecord":
        return cls(StabilityReport.from_dict(d), d.get("is_global_optimum"), bin_tol)


@dataclass(frozen=True, eq=False)
class FixedPointCatalog:
    records: tuple[FixedPointRecord, ...]
    params: OimParams
    n: int
    metadata: dict = field(default_factory=dict)
    failures: tuple[tuple[int, str], ...] = ()

    def __len__(self):
        return len(self.records)

    def to_dict(self) -> dict:
        return {
            "metadata": {"n": self.n, "params": self.params.to_dict(), **self.metadata},
            "records": [r.to_dict(i) for i, r in enumerate(self.records)],
            "failures": [{"start": i, "error": msg} for i, msg in self.failures],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FixedPointCatalog":
        d = json.loads(text)
        meta = dict(d["metadata"])
        n = meta.pop("n")
        params = OimParams(**meta.pop("params"))
        bin_tol = meta.get("bin_tol", 0.1)
        records = tuple(FixedPointRecord.from_dict(r, bin_tol) for r in d["records"])
        failures = tuple((f["start"], f["error"]) for f in d.get("failures", []))
        return cls(records, params, n, meta, failures)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["id", "spins", "oim_energy", "ising_energy", "min_eig_H",
                         "classification", "is_global_optimum"])
        for i, r in enumerate(self.records):
            spins = r.report.spins
            writer.writerow([
                i,
                "nonbinary" if spins is None else spins_to_str(spins),
                f"{r.oim_energy:.17g}",
                "" if r.ising_energy is None else f"{r.ising_energy:.17g}",
                f"{r.report.min_eig_hessian:.17g}",
                r.report.classification_hessian.value,
                "" if r.is_global_optimum is None else str(r.is_global_optimum).lower(),
            ])
        return out.getvalue()


def _sort_key(rec: FixedPointRecord):
    return (rec.oim_energy, tuple(canonical_phases(rec.phases)))


def same_point(a, b, tol: float = DEDUP_TOL) -> bool:
    """Componentwise angular distance modulo 2*pi within ``tol``."""
    return bool(np.max(angular_distance(a, b), initial=0.0) <= tol)


def _global_flag(inst, ground, ising_e):
    if ground is None:
        return None
    if ising_e is None:
        return False
    return bool(abs(ising_e - ground.min_energy) <= degeneracy_tol(inst))


def enumerate_spin_fixed_points(inst: IsingInstance, params: OimParams, bin_tol: float = 0.1,
                                eigen_tol: float = DEFAULT_EIGEN_TOL,
                                max_n: int = MAX_ENUMERATION_N) -> FixedPointCatalog:
    """Classify all 2^N binary phase states theta in {0, pi}^N."""
    if inst.n > max_n:
        raise EnumerationGuardError(
            f"N={inst.n} exceeds the enumeration guard N<={max_n}; "
            "use trajectory harvesting or `solve` instead")
    ground = brute_force_ground(inst, max_n)
    records = []
    for b in range(1 << inst.n):
        theta = spins_to_phases(spins_from_index(b, inst.n))
        resid = float(np.max(np.abs(velocity(params, inst, theta))))
        if resid > BINARY_VELOCITY_TOL:
            raise ArithmeticError(f"binary state {b} has velocity residual {resid:.3g}")
        rep = stability_report(params, inst, theta, bin_tol, eigen_tol)
        records.append(FixedPointRecord(rep, _global_flag(inst, ground, rep.ising_energy), bin_tol))
    records.sort(key=_sort_key)
    meta = {"source": "spin_enumeration", "bin_tol": bin_tol, "eigen_tol": eigen_tol,
            "ground_energy": ground.min_energy}
    return FixedPointCatalog(tuple(records), params, inst.n, meta)


def refine_fixed_point(inst: IsingInstance, params: OimParams, guess, tol: float = NEWTON_TOL,
                       max_iter: int = NEWTON_MAX_ITER) -> np.ndarray:
    """Newton's method on the velocity field, theta <- theta - J^{-1} f.

    Returns the refined phases once ||f||_inf <= tol. Raises
    :class:`SingularJacobianError` when an LU pivot falls below
    ``1e-12 * ||J||_inf`` and :class:`MaxIterationsError` when ``max_iter``
    steps do not reach ``tol``.
    """
    theta = np.array(guess, dtype=np.float64)
    f = velocity(params, inst, theta)
    r0 = float(np.max(np.abs(f), initial=0.0))
    if not math.isfinite(r0):
        raise ValueError("initial guess has a non-finite velocity")
    if r0 <= tol:
        return theta
    scale = 2.0 * params.alpha
    resid = r0
    for _ in range(max_iter):
        jac = jacobian(params, inst, theta)
        with warnings.catch_warnings():
            # exactly singular pivots are reported below
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(jac, check_finite=False)
        norm = inf_norm(jac)
        if norm == 0.0 or np.min(np.abs(np.diag(lu))) < 1e-12 * norm:
            raise SingularJacobianError(f"Jacobian numerically singular at {theta.tolist()}")
        theta = theta - lu_solve((lu, piv), scale * f, check_finite=False)
        f = velocity(params, inst, theta)
        resid = float(np.max(np.abs(f)))
        if not math.isfinite(resid):
            break
        if resid <= tol:
            return theta
    raise MaxIterationsError(f"Newton stopped at residual {resid:.3g} after {max_iter} iterations",
                             theta, resid)


@dataclass(frozen=True, eq=False)
class Settled:
    """Where one start ended: the polished endpoint, or the raw one plus an error."""

    theta: np.ndarray
    converged: bool
    polished: bool
    error: str | None = None


def settle(inst: IsingInstance, params: OimParams, theta0, cfg: IntegratorConfig) -> Settled:
    """Integrate from ``theta0`` and Newton-polish the endpoint."""
    try:
        traj = integrate(params, inst, theta0, cfg)
    except FloatingPointError as exc:
        return Settled(np.asarray(theta0, dtype=np.float64), False, False, str(exc))
    end = traj.final_state
    try:
        return Settled(refine_fixed_point(inst, params, end), traj.converged, True)
    except (ArithmeticError, ValueError) as exc:
        return Settled(end, traj.converged, False, f"{type(exc).__name__}: {exc}")


def random_start(seed: int, index: int, n: int) -> np.ndarray:
    return sample_rng(seed, index).uniform(0.0, TWO_PI, size=n)


def harvest_from_trajectories(inst: IsingInstance, params: OimParams, n_starts: int, seed: int,
                              cfg: IntegratorConfig = IntegratorConfig(), bin_tol: float = 0.1,
                              eigen_tol: float = DEFAULT_EIGEN_TOL, merge_spins: bool = True,
                              initial_states=None,
                              max_n: int = MAX_ENUMERATION_N) -> FixedPointCatalog:
    """Collect fixed points reached from many starts, including non-binary ones.

    Starts are uniform on [0, 2*pi)^N with per-start streams keyed by
    ``(seed, index)`` unless ``initial_states`` is given. Each endpoint is
    Newton-polished, checked against the residual bound, deduplicated
    modulo 2*pi and classified. A start that fails is logged in
    ``failures`` and the batch carries on.
    """
    if initial_states is not None:
        starts = [np.asarray(s, dtype=np.float64) for s in initial_states]
    else:
        if n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        starts = [random_start(seed, i, inst.n) for i in range(n_starts)]
    settled = ordered_map(lambda th: settle(inst, params, th, cfg), starts)

    ground = brute_force_ground(inst, max_n) if inst.n <= max_n else None
    kept: list[np.ndarray] = []
    failures = []
    for i, s in enumerate(settled):
        if s.error is not None:
            failures.append((i, s.error))
            continue
        point = canonical_phases(s.theta)
        resid = float(np.max(np.abs(velocity(params, inst, point))))
        if resid > FIXED_POINT_TOL:
            failures.append((i, f"residual {resid:.3g} above {FIXED_POINT_TOL:g} after wrapping"))
            continue
        if not any(same_point(point, q) for q in kept):
            kept.append(point)
    if merge_spins and ground is not None:
        for b in range(1 << inst.n):
            point = spins_to_phases(spins_from_index(b, inst.n))
            if not any(same_point(point, q) for q in kept):
                kept.append(point)

    records = []
    for point in kept:
        rep = stability_report(params, inst, point, bin_tol, eigen_tol)
        records.append(FixedPointRecord(rep, _global_flag(inst, ground, rep.ising_energy), bin_tol))
    records.sort(key=_sort_key)
    meta = {"source": "trajectory_harvest", "seed": seed, "rng_name": RNG_NAME,
            "n_starts": len(starts), "bin_tol": bin_tol, "eigen_tol": eigen_tol,
            "integrator": cfg.to_dict()}
    if ground is not None:
        meta["ground_energy"] = ground.min_energy
    return FixedPointCatalog(tuple(records), params, inst.n, meta, tuple(failures))
