"""Orthogonal product-state sets and their orthogonality colorings.

Vertices (states) are 0-based; subsystems and colors are 1-based, matching the
file formats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguousOrthogonalityError,
    DimensionError,
    NotOrthogonalError,
    RealizationError,
    UsageError,
)

ZERO_TOL = 1e-8
GAP_TOL = 1e-4
NORM_TOL = 1e-10


class ProductStateSet:
    """N r-partite product states; ``parts[j]`` is the (N, d_j) array of subsystem-j vectors."""

    def __init__(self, parts: Sequence[np.ndarray], zero_tol: float = ZERO_TOL, gap_tol: float = GAP_TOL):
        if len(parts) < 2:
            raise UsageError("a product state set needs at least two parties")
        arrays = [np.array(p, dtype=complex) for p in parts]
        n = arrays[0].shape[0]
        for j, a in enumerate(arrays, start=1):
            if a.ndim != 2 or a.shape[0] != n:
                raise UsageError(f"subsystem {j}: expected an ({n}, d) array, got shape {a.shape}")
            if a.shape[1] < 2:
                raise DimensionError(f"subsystem {j} has dimension {a.shape[1]} < 2")
            a.setflags(write=False)
        if zero_tol < 0 or gap_tol < 0:
            raise UsageError("tolerances must be nonnegative")
        self.parts = tuple(arrays)
        self.zero_tol = float(zero_tol)
        self.gap_tol = float(gap_tol)
        self._overlaps = None

    @property
    def n(self) -> int:
        return self.parts[0].shape[0]

    def __len__(self):
        return self.n

    @property
    def parties(self) -> int:
        return len(self.parts)

    @property
    def dims(self) -> list[int]:
        return [p.shape[1] for p in self.parts]

    def vector(self, state: int, subsystem: int) -> np.ndarray:
        return self.parts[subsystem - 1][state]

    def overlaps(self) -> np.ndarray:
        """Array (r, N, N) of moduli |<psi_u^j|psi_v^j>|."""
        if self._overlaps is None:
            ov = np.stack([np.abs(p.conj() @ p.T) for p in self.parts])
            ov.setflags(write=False)
            self._overlaps = ov
        return self._overlaps

    def with_tolerances(self, zero_tol: float | None = None, gap_tol: float | None = None) -> "ProductStateSet":
        return ProductStateSet(self.parts,
                               self.zero_tol if zero_tol is None else zero_tol,
                               self.gap_tol if gap_tol is None else gap_tol)

    # -- file format -------------------------------------------------------

    def to_json(self) -> dict:
        states = []
        for i in range(self.n):
            parts = []
            for p in self.parts:
                v = p[i]
                parts.append([float(x) for pair in zip(v.real, v.imag) for x in pair])
            states.append({"parts": parts})
        return {"parties": self.parties, "dims": self.dims, "zero_tol": self.zero_tol,
                "gap_tol": self.gap_tol, "states": states}

    @classmethod
    def from_json(cls, data: Mapping) -> "ProductStateSet":
        try:
            r = int(data["parties"])
            dims = [int(d) for d in data["dims"]]
            states = data["states"]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed state-set file: {exc}") from exc
        if len(dims) != r:
            raise UsageError(f"'dims' has {len(dims)} entries but 'parties' is {r}")
        parts = [np.zeros((len(states), d), dtype=complex) for d in dims]
        for i, s in enumerate(states):
            if len(s["parts"]) != r:
                raise UsageError(f"state {i} has {len(s['parts'])} parts, expected {r}")
            for j, flat in enumerate(s["parts"]):
                if len(flat) != 2 * dims[j]:
                    raise UsageError(f"state {i} subsystem {j + 1}: expected {2 * dims[j]} numbers, got {len(flat)}")
                a = np.asarray(flat, dtype=float)
                parts[j][i] = a[0::2] + 1j * a[1::2]
        return cls(parts, float(data.get("zero_tol", ZERO_TOL)), float(data.get("gap_tol", GAP_TOL)))

    @classmethod
    def load(cls, path) -> "ProductStateSet":
        with open(path) as f:
            return cls.from_json(json.load(f))


@dataclass(frozen=True)
class EdgeColoring:
    """Orthogonality structure of K_N: each pair maps to its witness subsystems."""

    n: int
    r: int
    witness: Mapping[tuple[int, int], frozenset[int]]
    _masks: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        w = {}
        for (u, v), colors in self.witness.items():
            if u == v:
                raise UsageError(f"self-loop ({u}, {v}) in coloring")
            key = (min(u, v), max(u, v))
            cs = frozenset(int(c) for c in colors)
            if not cs:
                raise UsageError(f"pair {key} has no color")
            if any(c < 1 or c > self.r for c in cs):
                raise UsageError(f"pair {key} has colors {sorted(cs)} outside 1..{self.r}")
            w[key] = cs
        missing = [(u, v) for v in range(self.n) for u in range(v) if (u, v) not in w]
        if missing:
            raise UsageError(f"coloring is not total: pair {missing[0]} uncolored")
        object.__setattr__(self, "witness", w)
        masks = [[0] * self.n for _ in range(self.r + 1)]
        for (u, v), cs in w.items():
            c = min(cs)
            masks[c][u] |= 1 << v
            masks[c][v] |= 1 << u
        object.__setattr__(self, "_masks", tuple(tuple(m) for m in masks))

    def canonical(self, u: int, v: int) -> int:
        return min(self.witness[(min(u, v), max(u, v))])

    def colors_of(self, u: int, v: int) -> frozenset[int]:
        return self.witness[(min(u, v), max(u, v))]

    def adjacency(self, color: int) -> tuple[int, ...]:
        """Bitmask neighbourhoods of the canonical color-``color`` graph."""
        return self._masks[color]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.witness)

    @classmethod
    def from_canonical(cls, n: int, r: int, colors: Mapping[tuple[int, int], int]) -> "EdgeColoring":
        return cls(n, r, {e: frozenset([c]) for e, c in colors.items()})

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r,
                "edges": [{"u": u, "v": v, "colors": sorted(self.witness[(u, v)])} for u, v in self.edges]}

    @classmethod
    def from_json(cls, data: Mapping) -> "EdgeColoring":
        try:
            return cls(int(data["n"]), int(data["r"]),
                       {(int(e["u"]), int(e["v"])): frozenset(e["colors"]) for e in data["edges"]})
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed coloring file: {exc}") from exc

    @classmethod
    def load(cls, path) -> "EdgeColoring":
        with open(path) as f:
            return cls.from_json(json.load(f))


@dataclass(frozen=True)
class Finding:
    kind: str  # "norm" | "missing-witness" | "gap"
    where: tuple
    value: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "where": list(self.where), "value": self.value}

    def __str__(self):
        return f"{self.kind} at {self.where}: {self.value:.3e}"


def validate(s: ProductStateSet) -> list[Finding]:
    """All invariant violations of ``s``; an empty list means the set is usable."""
    findings = []
    for j, p in enumerate(s.parts, start=1):
        norms = np.linalg.norm(p, axis=1)
        for i in np.flatnonzero(np.abs(norms - 1) > NORM_TOL):
            findings.append(Finding("norm", (int(i), j), float(norms[i])))
    ov = s.overlaps()
    for v in range(s.n):
        for u in range(v):
            col = ov[:, u, v]
            if not (col <= s.zero_tol).any():
                findings.append(Finding("missing-witness", (u, v), float(col.min())))
            for j in np.flatnonzero((col > s.zero_tol) & (col < s.gap_tol)):
                findings.append(Finding("gap", (u, v, int(j) + 1), float(col[j])))
    return findings


def extract_coloring(s: ProductStateSet) -> EdgeColoring:
    ov = s.overlaps()
    witness = {}
    for v in range(s.n):
        for u in range(v):
            col = ov[:, u, v]
            for j in np.flatnonzero((col > s.zero_tol) & (col < s.gap_tol)):
                raise AmbiguousOrthogonalityError((u, v), int(j) + 1, float(col[j]))
            w = frozenset(int(j) + 1 for j in np.flatnonzero(col <= s.zero_tol))
            if not w:
                raise NotOrthogonalError((u, v))
            witness[(u, v)] = w
    return EdgeColoring(s.n, s.parties, witness)


def random_coloring(n: int, r: int, seed: int) -> EdgeColoring:
    if n < 2 or r < 2:
        raise UsageError("random_coloring needs n >= 2 and r >= 2")
    rng = np.random.default_rng(seed)
    edges = [(u, v) for v in range(n) for u in range(v)]
    draws = rng.integers(1, r + 1, size=len(edges))
    return EdgeColoring.from_canonical(n, r, {e: int(c) for e, c in zip(edges, draws)})


def _random_unit(rng: np.random.Generator, basis: np.ndarray) -> np.ndarray:
    z = rng.normal(size=basis.shape[1]) + 1j * rng.normal(size=basis.shape[1])
    x = basis @ z
    return x / np.linalg.norm(x)


def realize(c: EdgeColoring, dims: Sequence[int] | None = None, seed: int = 0,
            zero_tol: float = ZERO_TOL, gap_tol: float = GAP_TOL, budget: int = 1000) -> ProductStateSet:
    """Build a product-state set whose orthogonality coloring is exactly ``c``.

    Subsystem by subsystem, each vertex gets a random unit vector in the
    orthogonal complement of its already placed neighbours in that color,
    resampled until every required non-orthogonality clears ``gap_tol``.
    """
    n, r = c.n, c.r
    dims = [n] * r if dims is None else list(dims)
    if len(dims) != r:
        raise DimensionError(f"got {len(dims)} dimensions for {r} subsystems")
    if any(d < n for d in dims):
        raise DimensionError(f"every subsystem dimension must be >= N = {n}, got {dims}")
    rng = np.random.default_rng(seed)
    parts = []
    for j, d in enumerate(dims, start=1):
        vecs = np.zeros((n, d), dtype=complex)
        for v in range(n):
            ortho = [u for u in range(v) if j in c.colors_of(u, v)]
            other = [u for u in range(v) if j not in c.colors_of(u, v)]
            basis = scipy.linalg.null_space(vecs[ortho].conj()) if ortho else np.eye(d, dtype=complex)
            if basis.shape[1] == 0:
                raise RealizationError(f"subsystem {j}: no room left for vertex {v}")
            for _ in range(budget):
                x = _random_unit(rng, basis)
                if not other or np.abs(vecs[other].conj() @ x).min() >= gap_tol:
                    break
            else:
                raise RealizationError(f"subsystem {j}, vertex {v}: resample budget {budget} exhausted")
            vecs[v] = x
        parts.append(vecs)
    return ProductStateSet(parts, zero_tol, gap_tol)


def subset(s: ProductStateSet, indices: Iterable[int]) -> ProductStateSet:
    idx = list(indices)
    return ProductStateSet([p[idx] for p in s.parts], s.zero_tol, s.gap_tol)
