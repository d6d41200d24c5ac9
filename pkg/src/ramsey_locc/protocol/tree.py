"""Adaptive local-measurement decision trees and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Union

import numpy as np

from ..errors import InvalidTreeError
from ..states import ProductStateSet

REST = "REST"
Outcome = Union[int, str]


@dataclass(frozen=True)
class MeasurementSpec:
    """Projectors onto the subsystem vectors of ``projectors`` plus the completion REST."""

    copy: int
    subsystem: int
    projectors: tuple[int, ...]

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return self.projectors + (REST,)

    def check(self, s: ProductStateSet) -> None:
        if self.copy < 1:
            raise InvalidTreeError(f"copy index {self.copy} < 1")
        if not 1 <= self.subsystem <= s.parties:
            raise InvalidTreeError(f"subsystem {self.subsystem} outside 1..{s.parties}")
        if len(set(self.projectors)) != len(self.projectors) or not self.projectors:
            raise InvalidTreeError(f"projector list {list(self.projectors)} is empty or repeats a state")
        if any(not 0 <= p < s.n for p in self.projectors):
            raise InvalidTreeError(f"projector list {list(self.projectors)} names a state outside 0..{s.n - 1}")
        ov = s.overlaps()[self.subsystem - 1]
        idx = list(self.projectors)
        sub = ov[np.ix_(idx, idx)] - np.eye(len(idx))
        if np.abs(sub).max(initial=0.0) > s.zero_tol:
            raise InvalidTreeError(
                f"projectors {idx} are not mutually orthogonal in subsystem {self.subsystem}")


@dataclass(frozen=True)
class Leaf:
    survivors: tuple[int, ...]


@dataclass(frozen=True)
class Node:
    measurement: MeasurementSpec
    children: Mapping[Outcome, "Node | Leaf"] = field(hash=False)


Tree = Union[Node, Leaf]


@dataclass(frozen=True)
class ProtocolTree:
    """A one-copy (or multi-copy) decision tree over the candidate pool ``candidates``.

    ``target`` is the guaranteed exclusion count, or None for an identifying tree.
    """

    root: Tree
    candidates: tuple[int, ...]
    target: int | None
    source: str = "theorem"

    @property
    def copies_used(self) -> int:
        return len({m.copy for m, _ in self.measurements()}) if isinstance(self.root, Node) else 0

    def measurements(self) -> Iterator[tuple[MeasurementSpec, Node]]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Node):
                yield node.measurement, node
                stack.extend(node.children.values())

    def paths(self) -> Iterator[tuple[list[tuple[MeasurementSpec, Outcome]], Leaf]]:
        def walk(node, prefix):
            if isinstance(node, Leaf):
                yield prefix, node
                return
            for o, child in node.children.items():
                yield from walk(child, prefix + [(node.measurement, o)])

        yield from walk(self.root, [])

    def leaves(self) -> list[Leaf]:
        return [leaf for _, leaf in self.paths()]

    def depth(self) -> int:
        return max((len(p) for p, _ in self.paths()), default=0)

    def check_structure(self, s: ProductStateSet) -> None:
        """Raise InvalidTreeError on any structural violation; no simulation involved."""
        pool = set(self.candidates)
        if not pool or any(not 0 <= c < s.n for c in pool):
            raise InvalidTreeError("candidate pool is empty or names unknown states")

        def walk(node, seen, last_copy):
            if isinstance(node, Leaf):
                if not set(node.survivors) <= pool:
                    raise InvalidTreeError(f"leaf survivors {list(node.survivors)} leave the candidate pool")
                return
            m = node.measurement
            m.check(s)
            key = (m.copy, m.subsystem)
            if key in seen:
                raise InvalidTreeError(f"subsystem {m.subsystem} of copy {m.copy} measured twice on one path")
            if m.copy < last_copy:
                raise InvalidTreeError(f"copy index decreases from {last_copy} to {m.copy}")
            for o in node.children:
                if o not in m.outcomes:
                    raise InvalidTreeError(f"child keyed by {o!r} is not an outcome of {list(m.outcomes)}")
            for child in node.children.values():
                walk(child, seen | {key}, m.copy)

        walk(self.root, frozenset(), 1)

    def with_copy(self, copy: int) -> "ProtocolTree":
        """Relabel a one-copy tree onto copy index ``copy``."""

        def relabel(node):
            if isinstance(node, Leaf):
                return node
            return Node(replace(node.measurement, copy=copy),
                        {o: relabel(c) for o, c in node.children.items()})

        return replace(self, root=relabel(self.root))

    # -- file format -------------------------------------------------------

    def to_json(self) -> dict:
        def enc(node):
            if isinstance(node, Leaf):
                return {"survivors": list(node.survivors)}
            m = node.measurement
            return {"copy": m.copy, "subsystem": m.subsystem, "projectors": list(m.projectors),
                    "children": {str(o): enc(c) for o, c in node.children.items()}}

        return {"candidates": list(self.candidates), "target": self.target, "source": self.source,
                "copies_used": self.copies_used, "root": enc(self.root)}

    @classmethod
    def from_json(cls, data: Mapping) -> "ProtocolTree":
        def dec(obj):
            if "survivors" in obj:
                return Leaf(tuple(int(x) for x in obj["survivors"]))
            m = MeasurementSpec(int(obj["copy"]), int(obj["subsystem"]), tuple(int(p) for p in obj["projectors"]))
            children = {}
            for key, child in obj["children"].items():
                children[REST if key == REST else int(key)] = dec(child)
            return Node(m, children)

        try:
            return cls(dec(data["root"]), tuple(int(c) for c in data["candidates"]),
                       data.get("target"), data.get("source", "theorem"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTreeError(f"malformed protocol-tree file: {exc}") from exc
