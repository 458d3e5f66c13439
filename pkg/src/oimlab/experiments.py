"""Injection-strength sweeps, Monte-Carlo basin estimates and the multistart solver."""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from ._parallel import RNG_NAME, ordered_map
from .dynamics import IntegratorConfig, NonBinary, OimParams, phases_to_spins, spins_to_phases
from .fixed_points import random_start, settle
from .ising import (MAX_ENUMERATION_N, EnumerationGuardError, IsingInstance, brute_force_ground,
                    degeneracy_tol, ising_energy, spins_from_index, spins_from_str,
                    spins_to_index, spins_to_str)
from .stability import DEFAULT_EIGEN_TOL, Classification, stability_report

NONBINARY = "nonbinary"
NONCONVERGED = "nonconverged"


@dataclass(frozen=True)
class SweepRow:
    ks_over_k: float
    fp_id: int
    spins: str
    ising_energy: float
    min_eig_hessian: float
    classification: Classification
    is_global_optimum: bool
    agree: bool = True


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]
    k: float

    HEADER = ("ks_over_k", "fp_id", "spins", "ising_energy", "min_eig_H", "classification",
              "is_global_optimum")

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.HEADER)
        for r in self.rows:
            writer.writerow([f"{r.ks_over_k:.17g}", r.fp_id, r.spins, f"{r.ising_energy:.17g}",
                             f"{r.min_eig_hessian:.17g}", r.classification.value,
                             str(r.is_global_optimum).lower()])
        return out.getvalue()

    def rows_for(self, spins: str) -> list[SweepRow]:
        return [r for r in self.rows if r.spins == spins]


def ks_sweep(inst: IsingInstance, k: float, ratios: Sequence[float], alpha: float = 0.5,
             eigen_tol: float = DEFAULT_EIGEN_TOL,
             max_n: int = MAX_ENUMERATION_N) -> SweepTable:
    """Classify every binary fixed point at K_s = r*K for each ratio r.

    ``fp_id`` is the spin enumeration index (bit i set means s_i = -1), so a
    fixed point keeps its id across ratios. The stability margin reported
    is the smallest Hessian eigenvalue.
    """
    ratios = [float(r) for r in ratios]
    if any(not r > 0 for r in ratios):
        raise ValueError("ratios must be positive")
    if any(b <= a for a, b in zip(ratios, ratios[1:])):
        raise ValueError("ratios must be strictly increasing")
    if inst.n > max_n:
        raise EnumerationGuardError(f"N={inst.n} exceeds the enumeration guard N<={max_n}")
    if not ratios:
        return SweepTable((), k)
    ground = brute_force_ground(inst, max_n)
    tol_e = degeneracy_tol(inst)
    points = [spins_from_index(b, inst.n) for b in range(1 << inst.n)]
    energies = [ising_energy(inst, s) for s in points]
    rows = []
    for r in ratios:
        params = OimParams(k=k, ks=r * k, alpha=alpha)
        for b, (s, h) in enumerate(zip(points, energies)):
            rep = stability_report(params, inst, spins_to_phases(s), eigen_tol=eigen_tol)
            rows.append(SweepRow(r, b, spins_to_str(s), h, rep.min_eig_hessian,
                                 rep.classification_hessian,
                                 abs(h - ground.min_energy) <= tol_e, rep.agree))
    return SweepTable(tuple(rows), k)


@dataclass(frozen=True)
class BasinStats:
    n_samples: int
    counts: dict
    ground_state_hit_rate: float | None
    seed: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metadata": {"seed": self.seed, "rng_name": RNG_NAME, "n_samples": self.n_samples,
                         **self.metadata},
            "counts": dict(self.counts),
            "ground_state_hit_rate": self.ground_state_hit_rate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _outcome(inst, params, theta0, cfg, bin_tol) -> str:
    s = settle(inst, params, theta0, cfg)
    if not s.polished and not s.converged:
        return NONCONVERGED
    spins = phases_to_spins(s.theta, bin_tol)
    if isinstance(spins, NonBinary):
        return NONBINARY
    return spins_to_str(spins)


def sample_outcomes(inst: IsingInstance, params: OimParams, n_samples: int, seed: int,
                    cfg: IntegratorConfig = IntegratorConfig(), bin_tol: float = 0.1) -> list[str]:
    """Outcome key for each seeded start, in sample order."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    return ordered_map(
        lambda i: _outcome(inst, params, random_start(seed, i, inst.n), cfg, bin_tol),
        range(n_samples))


def _run_metadata(params, cfg, bin_tol):
    return {"params": params.to_dict(), "integrator": cfg.to_dict(), "bin_tol": bin_tol,
            "backend": _backend.NAME}


def monte_carlo_basins(inst: IsingInstance, params: OimParams, n_samples: int, seed: int,
                       cfg: IntegratorConfig = IntegratorConfig(), bin_tol: float = 0.1,
                       max_n: int = MAX_ENUMERATION_N) -> BasinStats:
    """Tally where uniformly random starts settle.

    Keys are spin strings such as ``"+-+"``, or ``"nonbinary"`` /
    ``"nonconverged"``. The hit rate is only computed when the ground state
    can be enumerated.
    """
    outcomes = sample_outcomes(inst, params, n_samples, seed, cfg, bin_tol)
    counts = dict(sorted(Counter(outcomes).items()))
    hit = None
    if inst.n <= max_n:
        ground = brute_force_ground(inst, max_n)
        tol = degeneracy_tol(inst)
        hits = sum(c for key, c in counts.items()
                   if key not in (NONBINARY, NONCONVERGED)
                   and ising_energy(inst, spins_from_str(key)) <= ground.min_energy + tol)
        hit = hits / n_samples
    return BasinStats(n_samples, counts, hit, seed, _run_metadata(params, cfg, bin_tol))


@dataclass(frozen=True, eq=False)
class SolveResult:
    spins: np.ndarray | None
    ising_energy: float | None
    n_starts: int
    n_binary: int
    counts: dict
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "spins": None if self.spins is None else [int(v) for v in self.spins],
            "ising_energy": self.ising_energy,
            "n_starts": self.n_starts,
            "n_binary": self.n_binary,
            "counts": dict(self.counts),
            "metadata": {"rng_name": RNG_NAME, **self.metadata},
        }


def solve(inst: IsingInstance, params: OimParams, n_starts: int, seed: int,
          cfg: IntegratorConfig = IntegratorConfig(), bin_tol: float = 0.1) -> SolveResult:
    """Best binary outcome over ``n_starts`` seeded runs of the OIM dynamics.

    ``spins`` is ``None`` when no start binarizes. Ties are broken by the
    spin enumeration order so the answer is deterministic.
    """
    outcomes = sample_outcomes(inst, params, n_starts, seed, cfg, bin_tol)
    counts = dict(sorted(Counter(outcomes).items()))
    binary = [key for key in counts if key not in (NONBINARY, NONCONVERGED)]
    meta = {"seed": seed, **_run_metadata(params, cfg, bin_tol)}
    if not binary:
        return SolveResult(None, None, n_starts, 0, counts, meta)
    scored = sorted((ising_energy(inst, spins_from_str(key)), spins_to_index(spins_from_str(key)))
                    for key in binary)
    best_e, best_index = scored[0]
    n_binary = sum(counts[key] for key in binary)
    return SolveResult(spins_from_index(best_index, inst.n), best_e, n_starts, n_binary, counts,
                       meta)
