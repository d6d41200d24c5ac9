"""Born-rule simulation and exhaustive verification of protocol trees and strategies.

Probabilities are recomputed here from the state vectors, not taken from the
synthesizer's cached overlaps, so the verifier is an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMeasurementError
from .protocol.plan import Strategy
from .protocol.tree import Leaf, MeasurementSpec, ProtocolTree
from .states import ProductStateSet

SUM_TOL = 1e-9


@dataclass(frozen=True)
class OutcomeDistribution:
    outcomes: tuple
    probabilities: tuple[float, ...]

    def __getitem__(self, outcome) -> float:
        return self.probabilities[self.outcomes.index(outcome)]

    def to_dict(self) -> dict:
        return {str(o): p for o, p in zip(self.outcomes, self.probabilities)}


def outcome_distribution(s: ProductStateSet, truth: int, meas: MeasurementSpec) -> OutcomeDistribution:
    """Born probabilities of each outcome of ``meas`` when the state is ``truth``."""
    if not 1 <= meas.subsystem <= s.parties:
        raise InvalidMeasurementError(f"subsystem {meas.subsystem} outside 1..{s.parties}")
    if not meas.projectors or any(not 0 <= p < s.n for p in meas.projectors):
        raise InvalidMeasurementError(f"projector list {list(meas.projectors)} is empty or out of range")
    vecs = np.array([s.vector(p, meas.subsystem) for p in meas.projectors])
    gram = vecs.conj() @ vecs.T
    if np.abs(gram - np.eye(len(vecs))).max() > s.zero_tol:
        raise InvalidMeasurementError(
            f"projectors {list(meas.projectors)} are not orthonormal in subsystem {meas.subsystem}")
    amps = vecs.conj() @ s.vector(truth, meas.subsystem)
    probs = np.abs(amps) ** 2
    v = s.vector(truth, meas.subsystem)
    # the REST weight is taken from the residual so that an exact zero survives rounding
    rest = float(np.linalg.norm(v - amps @ vecs) ** 2)
    return OutcomeDistribution(meas.outcomes, tuple(float(p) for p in probs) + (rest,))


def _step(m: MeasurementSpec, o) -> dict:
    return {"copy": m.copy, "subsystem": m.subsystem, "projectors": list(m.projectors), "outcome": o}


@dataclass
class VerificationReport:
    mode: str  # "exclusion" | "identification"
    target: int | None
    per_candidate: list[dict]
    counterexample: dict | None = None
    max_copies: int | None = None
    declared_copies: int | None = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def to_dict(self) -> dict:
        return {"mode": self.mode, "target": self.target, "pass": self.passed,
                "counterexample": self.counterexample, "max_copies": self.max_copies,
                "declared_copies": self.declared_copies, "per_candidate": self.per_candidate}


class _Walker:
    """Enumerates positive-probability paths of one tree for one truth."""

    def __init__(self, s: ProductStateSet):
        self.s = s
        self.tol2 = s.zero_tol ** 2
        self._dist: dict = {}

    def dist(self, truth: int, m: MeasurementSpec) -> OutcomeDistribution:
        key = (truth, m.subsystem, m.projectors)
        if key not in self._dist:
            self._dist[key] = outcome_distribution(self.s, truth, m)
        return self._dist[key]

    def paths(self, tree: ProtocolTree, truth: int, alive: frozenset):
        """Yield (path, leaf or None, survivors) for every positive-probability branch.

        ``survivors`` are the members of ``alive`` whose probability was positive
        at every step; ``leaf`` is None when the tree has no child for a
        reachable outcome.
        """

        def walk(node, path, alive):
            if isinstance(node, Leaf):
                yield path, node, alive
                return
            m = node.measurement
            d = self.dist(truth, m)
            for o, p in zip(d.outcomes, d.probabilities):
                if p <= self.tol2:
                    continue
                nxt = frozenset(z for z in alive if self.dist(z, m)[o] > self.tol2)
                step = path + [_step(m, o)]
                if o not in node.children:
                    yield step, None, nxt
                else:
                    yield from walk(node.children[o], step, nxt)

        yield from walk(tree.root, [], alive)


def verify_exclusion(tree: ProtocolTree, s: ProductStateSet, k: int) -> VerificationReport:
    """Exhaustively check that every reachable leaf excludes at least ``k`` candidates."""
    tree.check_structure(s)
    pool = frozenset(tree.candidates)
    walker = _Walker(s)
    per, counter = [], None
    for truth in tree.candidates:
        worst = None
        for path, leaf, actual in walker.paths(tree, truth, pool):
            declared = frozenset(leaf.survivors) if leaf is not None else None
            reason = None
            if leaf is None:
                reason = "no child for a reachable outcome"
            elif truth not in actual:
                reason = "truth excluded"
            elif not actual <= declared:
                reason = f"leaf omits possible candidates {sorted(actual - declared)}"
            elif len(pool) - len(declared) < k:
                reason = f"leaf excludes {len(pool) - len(declared)} < {k}"
            excluded = len(pool) - len(declared if declared is not None else actual)
            rec = {"truth": truth, "path": path, "survivors": sorted(declared if declared is not None else actual),
                   "excluded": excluded}
            if reason and counter is None:
                counter = dict(rec, reason=reason)
            if worst is None or excluded < worst["excluded"]:
                worst = rec
        per.append(worst)
    return VerificationReport("exclusion", k, per, counter)


def verify_identification(strategy: Strategy, s: ProductStateSet) -> VerificationReport:
    """Check that every reachable execution ends with exactly the true candidate, within the declared copies."""
    walker = _Walker(s)
    limit = strategy.worst_case_copies
    memo: dict = {}

    def run(known: frozenset, truth: int, copy: int):
        """Return (max copies used from here, counterexample or None, worst path)."""
        if len(known) == 1:
            if known != {truth}:
                return 0, {"reason": f"identified {sorted(known)} instead of {truth}", "path": []}, []
            return 0, None, []
        if copy > limit:
            return 0, {"reason": f"still {len(known)} candidates after {limit} copies", "path": []}, []
        key = (known, truth)
        if key in memo:
            return memo[key]
        tree = strategy.stage_tree(known, copy)
        tree.check_structure(s)
        most, bad, worst = 0, None, []
        for path, leaf, actual in walker.paths(tree, truth, frozenset(tree.candidates)):
            reason = None
            if leaf is None:
                reason = "no child for a reachable outcome"
            elif truth not in actual or not actual <= frozenset(leaf.survivors):
                reason = "leaf survivors disagree with the Born rule"
            elif len(known & frozenset(leaf.survivors)) >= len(known):
                reason = "a copy made no progress"
            if reason:
                bad = bad or {"reason": reason, "path": path}
                continue
            used, sub_bad, tail = run(known & frozenset(leaf.survivors), truth, copy + 1)
            if sub_bad is not None and bad is None:
                bad = dict(sub_bad, path=path + sub_bad["path"])
            if 1 + used > most:
                most, worst = 1 + used, path + tail
        best = (most, bad, worst)
        memo[key] = best
        return best

    per, counter, top = [], None, 0
    everyone = frozenset(range(s.n))
    for truth in range(s.n):
        used, bad, path = run(everyone, truth, 1)
        top = max(top, used)
        per.append({"truth": truth, "copies": used, "path": path})
        if bad is not None and counter is None:
            counter = dict(bad, truth=truth)
    if counter is None and top > limit:
        counter = {"reason": f"used {top} copies, more than the declared {limit}", "truth": None, "path": []}
    return VerificationReport("identification", None, per, counter, top, limit)


@dataclass
class TraceRecord:
    truth: int
    seed: int
    steps: list[dict] = field(default_factory=list)
    final: list[int] = field(default_factory=list)

    @property
    def identified(self) -> bool:
        return self.final == [self.truth]

    def to_dict(self) -> dict:
        return {"truth": self.truth, "seed": self.seed, "steps": self.steps, "final": self.final,
                "identified": self.identified}


def run_trace(strategy: Strategy, s: ProductStateSet, truth: int, seed: int) -> TraceRecord:
    """Sample one execution of ``strategy`` with outcomes drawn from the Born rule."""
    if not 0 <= truth < s.n:
        raise InvalidMeasurementError(f"truth index {truth} outside 0..{s.n - 1}")
    rng = np.random.default_rng(seed)
    rec = TraceRecord(truth, seed)
    walker = _Walker(s)
    known = frozenset(range(s.n))
    copy = 1
    while len(known) > 1 and copy <= strategy.worst_case_copies:
        node = strategy.stage_tree(known, copy).root
        while not isinstance(node, Leaf):
            m = node.measurement
            d = walker.dist(truth, m)
            p = np.array([x if x > walker.tol2 else 0.0 for x in d.probabilities])
            o = d.outcomes[int(rng.choice(len(p), p=p / p.sum()))]
            rec.steps.append(dict(_step(m, o), probability=d[o]))
            if o not in node.children:
                break
            node = node.children[o]
        if not isinstance(node, Leaf):
            break
        known = known & frozenset(node.survivors)
        rec.steps[-1]["survivors"] = sorted(known)
        copy += 1
    rec.final = sorted(known)
    return rec
