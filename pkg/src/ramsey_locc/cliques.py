"""Exact monochromatic clique search on edge colorings.

Graphs are bitmask adjacency lists (``adj[v]`` has bit u set when uv is an
edge). Searches are restricted to a vertex mask so the protocol synthesizer
can work on surviving candidates only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .states import EdgeColoring


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def _color_bound(adj: Sequence[int], mask: int) -> int:
    """Number of classes in a greedy coloring of ``mask``; bounds its clique number."""
    classes = 0
    rest = mask
    while rest:
        classes += 1
        avail = rest
        while avail:
            low = avail & -avail
            v = low.bit_length() - 1
            rest &= ~low
            avail &= ~low & ~adj[v]
    return classes


def max_clique_size(adj: Sequence[int], mask: int) -> int:
    """Clique number of the subgraph induced by ``mask`` (branch and bound)."""
    best = 0

    def expand(size: int, cand: int):
        nonlocal best
        if not cand:
            best = max(best, size)
            return
        if size + cand.bit_count() <= best or size + _color_bound(adj, cand) <= best:
            return
        while cand:
            if size + cand.bit_count() <= best:
                return
            v = cand.bit_length() - 1
            cand &= ~(1 << v)
            expand(size + 1, cand & adj[v])
        best = max(best, size)

    expand(0, mask)
    return best


def find_clique(adj: Sequence[int], size: int, mask: int) -> list[int] | None:
    """Lexicographically smallest ``size``-clique inside ``mask``, or None."""
    if size <= 0:
        return []

    def dfs(chosen: list[int], cand: int) -> list[int] | None:
        need = size - len(chosen)
        if need == 0:
            return list(chosen)
        if cand.bit_count() < need:
            return None
        if need > 1 and _color_bound(adj, cand) < need:
            return None
        for v in _bits(cand):
            cand &= ~(1 << v)
            if cand.bit_count() + 1 < need:
                return None
            chosen.append(v)
            hit = dfs(chosen, cand & adj[v])
            chosen.pop()
            if hit is not None:
                return hit
        return None

    return dfs([], mask)


def _full_mask(c: EdgeColoring, vertices: Iterable[int] | None) -> int:
    return (1 << c.n) - 1 if vertices is None else _mask(vertices)


def mono_max_clique(c: EdgeColoring, color: int, vertices: Iterable[int] | None = None) -> tuple[int, list[int]]:
    """Maximum clique of the canonical color-``color`` graph, with its lexicographically smallest witness."""
    if not 1 <= color <= c.r:
        raise ValueError(f"color {color} outside 1..{c.r}")
    mask = _full_mask(c, vertices)
    if not mask:
        return 0, []
    adj = c.adjacency(color)
    size = max_clique_size(adj, mask)
    return size, find_clique(adj, size, mask)


def find_mono_clique(c: EdgeColoring, color: int, m: int,
                     vertices: Iterable[int] | None = None) -> list[int] | None:
    if not 1 <= color <= c.r:
        raise ValueError(f"color {color} outside 1..{c.r}")
    return find_clique(c.adjacency(color), m, _full_mask(c, vertices))


@dataclass(frozen=True)
class ColorClique:
    color: int
    size: int
    witness: tuple[int, ...]


@dataclass(frozen=True)
class CliqueSummary:
    per_color: tuple[ColorClique, ...]

    @property
    def overall(self) -> ColorClique:
        """Largest clique over all colors; ties go to the lowest color."""
        return max(self.per_color, key=lambda cc: (cc.size, -cc.color))

    @property
    def M(self) -> int:
        return self.overall.size

    def size_of(self, color: int) -> int:
        return self.per_color[color - 1].size

    def to_dict(self) -> dict:
        return {
            "per_color": [{"color": cc.color, "size": cc.size, "witness": list(cc.witness)} for cc in self.per_color],
            "M": self.M,
            "arg_color": self.overall.color,
        }


def orthogonality_summary(c: EdgeColoring, vertices: Iterable[int] | None = None) -> CliqueSummary:
    vs = None if vertices is None else list(vertices)
    per = []
    for j in range(1, c.r + 1):
        size, witness = mono_max_clique(c, j, vs)
        per.append(ColorClique(j, size, tuple(witness)))
    return CliqueSummary(tuple(per))
