"""Single-copy exclusion protocols built from the Ramsey case analysis.

Given a pool of at least R_r(m) candidates whose max monochromatic clique is c:

* c >= k: measure a k-clique; on a clique outcome x, one more state is lost
  either for free (some survivor is orthogonal to x there) or through a pair
  measurement on another subsystem.
* m <= c < k: measure the max clique (color j). On every outcome the
  survivors hold no (c+1)-clique in color j, so the certified inequality
  forces a (need+1)-clique in another color, which is measured next. When the
  outcome x excluded nothing extra, a need-clique avoiding x is guaranteed
  instead, and x is then separated from the observed state by a third
  subsystem.

Survivors are always recomputed from the Born rule (a candidate is dropped
when its outcome probability is at most zero_tol^2), never from bookkeeping.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..cliques import find_mono_clique, orthogonality_summary
from ..errors import InternalConsistencyError, NotCertifiedError, UsageError
from ..ramsey import CertificationVerdict
from ..states import EdgeColoring, ProductStateSet, extract_coloring
from .tree import REST, Leaf, MeasurementSpec, Node, ProtocolTree


class _Builder:
    def __init__(self, s: ProductStateSet, coloring: EdgeColoring | None, pool: Sequence[int], copy: int):
        self.s = s
        self.c = coloring if coloring is not None else extract_coloring(s)
        self.pool = tuple(sorted(pool))
        self.copy = copy
        self.prob = s.overlaps() ** 2
        self.tol2 = s.zero_tol ** 2
        self.colors = range(1, s.parties + 1)

    def branch(self, subsystem: int, projectors: Sequence[int], alive: frozenset) -> dict:
        p = self.prob[subsystem - 1]
        idx = list(projectors)
        alive_list = sorted(alive)
        out = {}
        for q in idx:
            surv = frozenset(z for z in alive_list if p[q, z] > self.tol2)
            if surv:
                out[q] = surv
        vecs = self.s.parts[subsystem - 1]
        basis = vecs[idx]
        targets = vecs[alive_list]
        # residual norm rather than 1 - sum, which loses the zero to rounding
        resid = targets - (targets @ basis.conj().T) @ basis
        rest = np.sum(np.abs(resid) ** 2, axis=1)
        surv = frozenset(z for z, pr in zip(alive_list, rest) if pr > self.tol2)
        if surv:
            out[REST] = surv
        return out

    def measure(self, subsystem: int, projectors: Sequence[int], alive: frozenset, then) -> Node:
        """Node measuring ``projectors`` on ``subsystem``; ``then(outcome, survivors)`` builds each child."""
        spec = MeasurementSpec(self.copy, subsystem, tuple(sorted(projectors)))
        children = {o: then(o, surv) for o, surv in self.branch(subsystem, spec.projectors, alive).items()}
        return Node(spec, children)

    def leaf(self, survivors: Iterable[int]) -> Leaf:
        return Leaf(tuple(sorted(survivors)))

    def one_more(self, alive: frozenset, anchor: int, used: frozenset) -> Node:
        """Exclude one more candidate by pairing ``anchor`` with a survivor on an unused subsystem."""
        for z in sorted(alive - {anchor}):
            free = self.c.colors_of(anchor, z) - used
            if free:
                q = min(free)
                return self.measure(q, (anchor, z), alive, lambda o, surv: self.leaf(surv))
        raise InternalConsistencyError(
            f"no survivor separable from state {anchor} outside subsystems {sorted(used)}")

    def clique_among(self, size: int, alive: Iterable[int], avoid: int) -> tuple[int, list[int]] | None:
        alive = sorted(alive)
        for q in self.colors:
            if q == avoid:
                continue
            found = find_mono_clique(self.c, q, size, alive)
            if found is not None:
                return q, found
        return None


def _need(n_pool: int, k: int, survivors: frozenset) -> int:
    return k - (n_pool - len(survivors))


def synthesize_exclusion(s: ProductStateSet, k: int, cert: CertificationVerdict,
                         candidates: Sequence[int] | None = None, copy: int = 1,
                         coloring: EdgeColoring | None = None) -> ProtocolTree:
    """One-copy LOCC tree excluding at least ``k`` of ``candidates`` (default: all states)."""
    pool = tuple(range(s.n)) if candidates is None else tuple(sorted(set(candidates)))
    n = len(pool)
    if not cert.certified:
        raise NotCertifiedError(f"exclusion (r={cert.r}, m={cert.m}, k={cert.k}) is {cert.status.value}, not Certified")
    if cert.k != k:
        raise NotCertifiedError(f"certificate is for k={cert.k}, requested k={k}")
    if cert.r != s.parties:
        raise NotCertifiedError(f"certificate is for r={cert.r} parties, state set has {s.parties}")
    if n < cert.certified_threshold:
        raise NotCertifiedError(f"pool of {n} states is below the certified threshold {cert.certified_threshold}")
    b = _Builder(s, coloring, pool, copy)
    full = frozenset(pool)
    summary = orthogonality_summary(b.c, pool)
    if summary.M < cert.m:
        raise InternalConsistencyError(
            f"max monochromatic clique {summary.M} < {cert.m} on {n} >= R_{cert.r}({cert.m}) states")

    big = [cc for cc in summary.per_color if cc.size >= k]
    if big:
        j = big[0].color
        clique = find_mono_clique(b.c, j, k, pool)

        def after_clique(o, surv):
            if _need(n, k, surv) <= 0:
                return b.leaf(surv)
            if o == REST:
                raise InternalConsistencyError("REST outcome of a k-clique left fewer than k excluded")
            return b.one_more(surv, o, frozenset([j]))

        root = b.measure(j, clique, full, after_clique)
    else:
        top = summary.overall
        j, clique = top.color, list(top.witness)

        def second(o, surv):
            need = _need(n, k, surv)
            if need <= 0:
                return b.leaf(surv)
            hit = b.clique_among(need + 1, surv, avoid=j)
            if hit is not None:
                q, d = hit
                return b.measure(q, d, surv, lambda o2, surv2: b.leaf(surv2))
            if o == REST:
                raise InternalConsistencyError(
                    f"no {need + 1}-clique outside color {j} among {len(surv)} survivors of REST")
            hit = b.clique_among(need, surv - {o}, avoid=j)
            if hit is None:
                raise InternalConsistencyError(
                    f"no {need}-clique outside color {j} among survivors of outcome {o}")
            q, d = hit

            def third(o2, surv2):
                if _need(n, k, surv2) <= 0:
                    return b.leaf(surv2)
                if o2 == REST:
                    raise InternalConsistencyError("REST outcome of the second measurement fell short")
                return b.one_more(surv2, o2, frozenset([j, q]))

            return b.measure(q, d, surv, third)

        root = b.measure(j, clique, full, second)

    tree = ProtocolTree(root, pool, k, "theorem")
    _check_leaves(tree, k)
    return tree


def greedy_exclusion(s: ProductStateSet, candidates: Sequence[int] | None = None, copy: int = 1,
                     coloring: EdgeColoring | None = None) -> ProtocolTree:
    """Exclusion by the largest monochromatic clique alone.

    With c = max clique size: excludes at least c when the pool is larger than
    c, identifies outright when the whole pool is one clique, and separates a
    pair of states with a single projector.
    """
    pool = tuple(range(s.n)) if candidates is None else tuple(sorted(set(candidates)))
    n = len(pool)
    if n < 2:
        raise UsageError("greedy exclusion needs at least two candidates")
    b = _Builder(s, coloring, pool, copy)
    full = frozenset(pool)
    if n == 2:
        u, v = pool
        q = b.c.canonical(u, v)
        root = b.measure(q, (u,), full, lambda o, surv: b.leaf(surv))
        tree = ProtocolTree(root, pool, 1, "pairwise")
        _check_leaves(tree, 1)
        return tree
    top = orthogonality_summary(b.c, pool).overall
    j, clique, c = top.color, list(top.witness), top.size
    if c == n:
        root = b.measure(j, clique, full, lambda o, surv: b.leaf(surv))
        tree = ProtocolTree(root, pool, n - 1, "greedy")
        _check_leaves(tree, n - 1)
        return tree

    def after_clique(o, surv):
        if _need(n, c, surv) <= 0:
            return b.leaf(surv)
        return b.one_more(surv, o, frozenset([j]))

    root = b.measure(j, clique, full, after_clique)
    tree = ProtocolTree(root, pool, c, "greedy")
    _check_leaves(tree, c)
    return tree


def _check_leaves(tree: ProtocolTree, k: int) -> None:
    n = len(tree.candidates)
    for path, leaf in tree.paths():
        if n - len(leaf.survivors) < k:
            raise InternalConsistencyError(
                f"synthesized leaf keeps {len(leaf.survivors)} of {n} candidates, short of excluding {k}")
