"""Jacobian and Hessian stability tests at OIM phase states.

The Jacobian is taken of the flow dtheta/dt = 2*alpha*f (alpha = 1/2 gives
the plain OIM velocity) and the Hessian of the energy E. Both are built from
their own closed forms, so ``J = -alpha * H`` is something we check rather
than something we assume.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._backend import kernels
from .dynamics import NonBinary, OimParams, energy, phases_to_spins, velocity
from .ising import IsingInstance, ising_energy

JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
DEFAULT_EIGEN_TOL = 1e-8


class EigenSolverError(ArithmeticError):
    pass


class Classification(str, enum.Enum):
    ATTRACTIVE_MINIMUM = "AttractiveMinimum"
    SADDLE = "Saddle"
    MAXIMUM = "Maximum"
    DEGENERATE = "Degenerate"

    def __str__(self):
        return self.value


def inf_norm(m) -> float:
    """Induced infinity norm (max absolute row sum)."""
    m = np.asarray(m)
    return float(np.abs(m).sum(axis=1).max()) if m.size else 0.0


def scaled_tol(m, rel: float = DEFAULT_EIGEN_TOL) -> float:
    return rel * max(1.0, inf_norm(m))


def _diff_cos(inst: IsingInstance, x):
    theta = np.asarray(x, dtype=np.float64)
    if theta.shape != (inst.n,):
        raise ValueError(f"phase vector has shape {theta.shape}, expected ({inst.n},)")
    return theta, np.cos(theta[:, None] - theta[None, :])


def hessian(params: OimParams, inst: IsingInstance, x) -> np.ndarray:
    """Second derivatives of the energy.

    Off-diagonal: -K (W_ij + W_ji) cos(t_i - t_j); diagonal:
    K sum_j (W_ij + W_ji) cos(t_i - t_j) + 4 K_s cos(2 t_i).
    """
    theta, c = _diff_cos(inst, x)
    sym = inst.w + inst.w.T
    h = -params.k * sym * c
    np.fill_diagonal(h, params.k * (sym * c).sum(axis=1) + 4.0 * params.ks * np.cos(2.0 * theta))
    return h


def jacobian(params: OimParams, inst: IsingInstance, x) -> np.ndarray:
    """d(2*alpha*f_i)/d(t_j), differentiated directly from the velocity field."""
    theta, c = _diff_cos(inst, x)
    df = params.k * inst.w * c
    np.fill_diagonal(df, -params.k * (inst.w * c).sum(axis=1) - 2.0 * params.ks * np.cos(2.0 * theta))
    return (2.0 * params.alpha) * df


def finite_difference_matrix(kind: str, params: OimParams, inst: IsingInstance, x,
                             h: float = 1e-4, symmetrize: bool = True,
                             asym_tol: float = 1e-6) -> np.ndarray:
    """Central-difference oracle for ``hessian`` (kind="hessian") or ``jacobian`` (kind="jacobian")."""
    if not h > 0:
        raise ValueError("step h must be positive")
    theta = np.asarray(x, dtype=np.float64)
    n = theta.shape[0]
    eye = np.eye(n) * h
    if kind == "hessian":
        e0 = energy(params, inst, theta)
        out = np.empty((n, n))
        for i in range(n):
            out[i, i] = (energy(params, inst, theta + eye[i]) - 2.0 * e0
                         + energy(params, inst, theta - eye[i])) / (h * h)
            for j in range(i + 1, n):
                pp = energy(params, inst, theta + eye[i] + eye[j])
                pm = energy(params, inst, theta + eye[i] - eye[j])
                mp = energy(params, inst, theta - eye[i] + eye[j])
                mm = energy(params, inst, theta - eye[i] - eye[j])
                out[i, j] = out[j, i] = (pp - pm - mp + mm) / (4.0 * h * h)
        return out
    if kind == "jacobian":
        scale = 2.0 * params.alpha
        out = np.empty((n, n))
        for j in range(n):
            fp = velocity(params, inst, theta + eye[j])
            fm = velocity(params, inst, theta - eye[j])
            out[:, j] = scale * (fp - fm) / (2.0 * h)
        if not symmetrize:
            return out
        asym = float(np.max(np.abs(out - out.T))) if n else 0.0
        if asym > asym_tol:
            raise ValueError(f"finite-difference Jacobian asymmetry {asym:.3g} exceeds {asym_tol:g}")
        return 0.5 * (out + out.T)
    raise ValueError(f"unknown kind {kind!r}; expected 'hessian' or 'jacobian'")


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    values: np.ndarray
    residual: float
    vectors: np.ndarray = field(repr=False)
    sweeps: int = 0


def eigenvalues_symmetric(m) -> EigenSpectrum:
    """Full spectrum of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.

    Raises ``ValueError`` for non-symmetric input and :class:`EigenSolverError`
    if the sweeps do not converge or the eigenpair residual exceeds
    ``1e-8 * max(1, ||m||_inf)``.
    """
    a = np.ascontiguousarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    vals, vecs, sweeps = kernels.jacobi_eigh(a, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise EigenSolverError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    order = np.argsort(vals, kind="stable")
    vals = np.asarray(vals)[order]
    vecs = np.asarray(vecs)[:, order]
    resid = float(np.max(np.abs(a @ vecs - vecs * vals))) if a.size else 0.0
    if resid > scaled_tol(a):
        raise EigenSolverError(f"eigenpair residual {resid:.3g} exceeds certification bound")
    return EigenSpectrum(vals, resid, vecs, int(sweeps))


def classify(spec: EigenSpectrum | Sequence[float], matrix_kind: str, tol: float) -> Classification:
    """Label a fixed point from a Hessian or Jacobian spectrum.

    Any eigenvalue within ``tol`` of zero makes the test inconclusive
    (``DEGENERATE``). Jacobian spectra are read with the opposite sign.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    values = np.asarray(spec.values if isinstance(spec, EigenSpectrum) else spec, dtype=np.float64)
    if matrix_kind == "jacobian":
        values = -values
    elif matrix_kind != "hessian":
        raise ValueError(f"unknown matrix kind {matrix_kind!r}")
    if values.size == 0 or np.any(np.abs(values) <= tol):
        return Classification.DEGENERATE
    if np.all(values > tol):
        return Classification.ATTRACTIVE_MINIMUM
    if np.all(values < -tol):
        return Classification.MAXIMUM
    return Classification.SADDLE


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    max_abs_residual_matrix: float
    max_abs_residual_eigen: float
    jacobian_classification: Classification
    hessian_classification: Classification
    agree: bool
    eigs_jacobian: np.ndarray
    eigs_hessian: np.ndarray
    hessian_matrix: np.ndarray = field(repr=False)
    jacobian_matrix: np.ndarray = field(repr=False)


def equivalence_report(params: OimParams, inst: IsingInstance, x,
                       eigen_tol: float = DEFAULT_EIGEN_TOL) -> EquivalenceReport:
    """Compare the Jacobian and Hessian tests at ``x``.

    The Hessian threshold is ``eigen_tol * max(1, ||H||_inf)`` and the
    Jacobian one is ``alpha`` times that, so the two labels are read against
    the same scale.
    """
    h = hessian(params, inst, x)
    j = jacobian(params, inst, x)
    alpha = params.alpha
    resid_matrix = float(np.max(np.abs(j + alpha * h)))
    spec_h = eigenvalues_symmetric(h)
    spec_j = eigenvalues_symmetric(j)
    resid_eigen = float(np.max(np.abs(spec_j.values + alpha * spec_h.values[::-1])))
    tol_h = scaled_tol(h, eigen_tol)
    cls_h = classify(spec_h, "hessian", tol_h)
    cls_j = classify(spec_j, "jacobian", alpha * tol_h)
    return EquivalenceReport(resid_matrix, resid_eigen, cls_j, cls_h, cls_j == cls_h,
                             spec_j.values, spec_h.values, h, j)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Everything known about one phase state, in the exported JSON layout."""

    point: np.ndarray
    spins: np.ndarray | None
    energy: float
    ising_energy: float | None
    eigs_hessian: np.ndarray
    eigs_jacobian: np.ndarray
    classification_hessian: Classification
    classification_jacobian: Classification
    equivalence_residual_matrix: float
    equivalence_residual_eigen: float
    agree: bool

    def to_dict(self) -> dict:
        return {
            "point": [float(v) for v in self.point],
            "spins": None if self.spins is None else [int(v) for v in self.spins],
            "energy": float(self.energy),
            "ising_energy": None if self.ising_energy is None else float(self.ising_energy),
            "eigs_hessian": [float(v) for v in self.eigs_hessian],
            "eigs_jacobian": [float(v) for v in self.eigs_jacobian],
            "classification_hessian": self.classification_hessian.value,
            "classification_jacobian": self.classification_jacobian.value,
            "equivalence_residual_matrix": float(self.equivalence_residual_matrix),
            "equivalence_residual_eigen": float(self.equivalence_residual_eigen),
            "agree": bool(self.agree),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityReport":
        return cls(
            point=np.array(d["point"], dtype=np.float64),
            spins=None if d["spins"] is None else np.array(d["spins"], dtype=np.int64),
            energy=float(d["energy"]),
            ising_energy=None if d["ising_energy"] is None else float(d["ising_energy"]),
            eigs_hessian=np.array(d["eigs_hessian"], dtype=np.float64),
            eigs_jacobian=np.array(d["eigs_jacobian"], dtype=np.float64),
            classification_hessian=Classification(d["classification_hessian"]),
            classification_jacobian=Classification(d["classification_jacobian"]),
            equivalence_residual_matrix=float(d["equivalence_residual_matrix"]),
            equivalence_residual_eigen=float(d["equivalence_residual_eigen"]),
            agree=bool(d["agree"]),
        )

    @property
    def min_eig_hessian(self) -> float:
        return float(self.eigs_hessian[0]) if len(self.eigs_hessian) else math.nan


def stability_report(params: OimParams, inst: IsingInstance, x, bin_tol: float = 0.1,
                     eigen_tol: float = DEFAULT_EIGEN_TOL) -> StabilityReport:
    theta = np.asarray(x, dtype=np.float64)
    eq = equivalence_report(params, inst, theta, eigen_tol)
    spins = phases_to_spins(theta, bin_tol)
    if isinstance(spins, NonBinary):
        spins, h_ising = None, None
    else:
        h_ising = ising_energy(inst, spins)
    return StabilityReport(
        point=theta.copy(), spins=spins, energy=energy(params, inst, theta), ising_energy=h_ising,
        eigs_hessian=eq.eigs_hessian, eigs_jacobian=eq.eigs_jacobian,
        classification_hessian=eq.hessian_classification,
        classification_jacobian=eq.jacobian_classification,
        equivalence_residual_matrix=eq.max_abs_residual_matrix,
        equivalence_residual_eigen=eq.max_abs_residual_eigen,
        agree=eq.agree,
    )
