"""Ising / Max-Cut problem instances, edge-list I/O and brute-force ground states."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from ._backend import kernels

MAX_ENUMERATION_N = 20


class EdgeListError(ValueError):
    """Malformed edge-list input; ``line`` is 1-based (0 when unknown)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class EnumerationGuardError(ValueError):
    """Raised when exhaustive 2^N enumeration is requested for too large N."""


@dataclass(frozen=True)
class MaxCutGraph:
    """Undirected weighted graph with 0-based nodes and edges stored as (i, j, E_ij), i < j."""

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        edges = tuple((int(i), int(j), float(e)) for i, j, e in self.edges)
        seen = set()
        for i, j, _ in edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i}, {j}) not canonical for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return float(sum(e for _, _, e in self.edges))


@dataclass(frozen=True, eq=False)
class IsingInstance:
    """Symmetric coupling matrix ``w`` (zero diagonal) over ``n`` spins.

    The matrix is copied and made read-only on construction.
    """

    w: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"coupling matrix must be square and non-empty, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("coupling matrix has non-finite entries")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("coupling matrix must have zero diagonal")
        if not np.array_equal(w, w.T):
            raise ValueError("coupling matrix must be symmetric")
        self._freeze(w)

    def _freeze(self, w):
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "n", w.shape[0])

    @classmethod
    def from_upper(cls, n: int, couplings: Iterable[tuple[int, int, float]]) -> "IsingInstance":
        """Build from ``(i, j, W_ij)`` triples; each pair is mirrored."""
        w = np.zeros((n, n))
        for i, j, wij in couplings:
            w[i, j] = w[j, i] = wij
        return cls(w)

    @classmethod
    def unchecked(cls, w) -> "IsingInstance":
        """Wrap ``w`` without validating symmetry. Only for negative controls."""
        inst = object.__new__(cls)
        inst._freeze(np.array(w, dtype=np.float64))
        return inst

    def __eq__(self, other):
        if not isinstance(other, IsingInstance):
            return NotImplemented
        return np.array_equal(self.w, other.w)

    __hash__ = None


def as_spins(s, n: int | None = None) -> np.ndarray:
    """Validate a spin configuration and return it as an int array of +/-1."""
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise ValueError("spin configuration must be one-dimensional")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spins must be exactly -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"spin configuration has length {arr.shape[0]}, expected {n}")
    return arr.astype(np.int64)


def spins_from_index(index: int, n: int) -> np.ndarray:
    """Spin config for enumeration ``index``: bit i set means s_i = -1."""
    bits = (index >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int64)


def spins_to_index(s) -> int:
    s = as_spins(s)
    return int(sum(1 << i for i, v in enumerate(s) if v == -1))


def spins_to_str(s) -> str:
    return "".join("+" if v == 1 else "-" for v in as_spins(s))


def spins_from_str(text: str) -> np.ndarray:
    table = {"+": 1, "-": -1}
    try:
        return np.array([table[c] for c in text], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"bad spin character {exc.args[0]!r}") from None


# -- edge-list format ------------------------------------------------------

def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_edge_list(source: str | TextIO) -> MaxCutGraph:
    """Parse the "N M" header plus M "i j w" lines (1-indexed, '#' comments)."""
    text = source if isinstance(source, str) else source.read()
    lines = _data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise EdgeListError("missing 'N M' header") from None
    parts = header.split()
    if len(parts) != 2:
        raise EdgeListError(f"expected 'N M' header, got {header!r}", lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise EdgeListError(f"header values must be integers, got {header!r}", lineno) from None
    if n < 1 or m < 0:
        raise EdgeListError(f"invalid header N={n} M={m}", lineno)

    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError(f"expected 'i j w', got {line!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            e = float(parts[2])
        except ValueError:
            raise EdgeListError(f"could not parse {line!r}", lineno) from None
        if not np.isfinite(e):
            raise EdgeListError(f"non-finite weight {parts[2]!r}", lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise EdgeListError(f"node index out of range 1..{n}: {line!r}", lineno)
        if i == j:
            raise EdgeListError(f"self-loop at node {i}", lineno)
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in seen:
            raise EdgeListError(
                f"duplicate edge {key[0] + 1}-{key[1] + 1} (first at line {seen[key]})", lineno)
        seen[key] = lineno
        if len(edges) == m:
            raise EdgeListError(f"more than the {m} edges declared in the header", lineno)
        edges.append((key[0], key[1], e))
    if len(edges) != m:
        raise EdgeListError(f"header declares {m} edges but {len(edges)} were found",
                            max(1, len(text.splitlines())))
    return MaxCutGraph(n, tuple(edges))


def format_edge_list(g: MaxCutGraph) -> str:
    out = io.StringIO()
    out.write(f"{g.n} {g.m}\n")
    for i, j, e in g.edges:
        out.write(f"{i + 1} {j + 1} {e:.17g}\n")
    return out.getvalue()


def read_edge_list(path) -> MaxCutGraph:
    with open(path) as fh:
        return parse_edge_list(fh)


def write_edge_list(g: MaxCutGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))


# -- Hamiltonians ----------------------------------------------------------

def to_ising(g: MaxCutGraph) -> IsingInstance:
    """Map Max-Cut edge weights onto couplings with W_ij = -E_ij."""
    return IsingInstance.from_upper(g.n, ((i, j, -e) for i, j, e in g.edges))


def ising_energy(inst: IsingInstance, s) -> float:
    """H(s) = -sum_{i<j} W_ij s_i s_j."""
    s = as_spins(s, inst.n).astype(np.float64)
    upper = np.triu(inst.w, 1)
    return float(-(s @ upper @ s))


def cut_value(g: MaxCutGraph, s) -> float:
    s = as_spins(s, g.n)
    return float(sum(e * (1 - s[i] * s[j]) / 2 for i, j, e in g.edges))


@dataclass(frozen=True)
class GroundStateResult:
    min_energy: float
    argmin: tuple[tuple[int, ...], ...]


def degeneracy_tol(inst: IsingInstance) -> float:
    """Energy gap below which two spin configs count as degenerate."""
    return 1e-9 * max(1.0, float(np.abs(inst.w).sum()) / 2)


def brute_force_ground(inst: IsingInstance, max_n: int = MAX_ENUMERATION_N) -> GroundStateResult:
    """Exact Ising ground state by enumerating all 2^N spin configurations.

    Configurations whose energy lies within :func:`degeneracy_tol` of the
    minimum are all reported; with exactly representable weights this is the
    exact argmin set.
    """
    if inst.n > max_n:
        raise EnumerationGuardError(
            f"N={inst.n} exceeds the exhaustive enumeration guard N<={max_n}")
    energies = kernels.spin_energies(np.ascontiguousarray(inst.w))
    lo = float(energies.min())
    tol = degeneracy_tol(inst)
    members = np.flatnonzero(energies <= lo + tol)
    configs = [spins_from_index(int(b), inst.n) for b in members]
    # re-score with the reference evaluator so reported energies are consistent
    scores = [ising_energy(inst, s) for s in configs]
    best = min(scores)
    argmin = tuple(sorted(tuple(int(v) for v in s) for s in configs))
    return GroundStateResult(best, argmin)


def random_instance(rng: np.random.Generator, n: int, low: float = -1.0, high: float = 1.0,
                    density: float = 1.0) -> IsingInstance:
    """Dense random couplings, uniform on [low, high] for each retained pair."""
    w = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    vals = rng.uniform(low, high, size=len(iu[0]))
    if density < 1.0:
        vals *= rng.random(len(vals)) < density
    w[iu] = vals
    return IsingInstance(w + w.T)

