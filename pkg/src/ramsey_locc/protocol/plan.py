"""Multi-copy distinguishing strategies: one exclusion stage per copy until one candidate is left."""

from __future__ import annotations

from typing import Iterable, Mapping

from ..errors import InvalidTreeError, NotOrthogonalError, UsageError
from ..ramsey import Ledger, default_ledger
from ..states import EdgeColoring, ProductStateSet, extract_coloring, validate
from .schedule import CopySchedule, ExclusionStage, best_stage, copies_table, copy_schedule, exclusion_schedule
from .synthesis import greedy_exclusion, synthesize_exclusion
from .tree import ProtocolTree


class Strategy:
    """Adaptive strategy over copies 1, 2, ...

    With current knowledge K (candidates not yet ruled out), the next copy runs
    an exclusion stage on a pool P containing K. P is K topped up with the
    lowest-index already excluded states when a larger pool has a smaller copy
    count; this lets the strategy follow the scheduler's minimum over pool sizes.
    """

    def __init__(self, s: ProductStateSet, stages: Iterable[ExclusionStage],
                 coloring: EdgeColoring | None = None):
        self.s = s
        self.coloring = coloring if coloring is not None else extract_coloring(s)
        self.stages = tuple(stages)
        self.g = copies_table(s.n, self.stages)
        self._trees: dict = {}

    @property
    def worst_case_copies(self) -> int:
        return self.g[self.s.n]

    def pool_for(self, known: frozenset) -> tuple[int, ...]:
        n_k = len(known)
        size = min(range(n_k, self.s.n + 1), key=lambda x: (self.g[x], x))
        pad = [i for i in range(self.s.n) if i not in known][: size - n_k]
        return tuple(sorted(known | set(pad)))

    def stage_tree(self, known: Iterable[int], copy: int) -> ProtocolTree:
        """The one-copy tree applied on copy ``copy`` when ``known`` is the surviving set."""
        known = frozenset(known)
        if len(known) < 2:
            raise UsageError("no stage needed once a single candidate is left")
        key = (known, copy)
        if key not in self._trees:
            pool = self.pool_for(known)
            st = best_stage(len(pool), self.stages)
            if st.source == "theorem":
                tree = synthesize_exclusion(self.s, st.exclusion, st.verdict, pool, copy, self.coloring)
            else:
                tree = greedy_exclusion(self.s, pool, copy, self.coloring)
            self._trees[key] = tree
        return self._trees[key]


def _checked(s: ProductStateSet) -> None:
    if s.n < 2:
        raise UsageError("plan_distinguish needs at least two states")
    bad = [f for f in validate(s) if f.kind != "gap"]
    if bad:
        f = bad[0]
        if f.kind == "missing-witness":
            raise NotOrthogonalError(f.where)
        raise UsageError(f"state set invalid: {f}")


def plan_distinguish(s: ProductStateSet, ledger: Ledger | None = None) -> tuple[CopySchedule, Strategy]:
    _checked(s)
    ledger = ledger or default_ledger()
    schedule = copy_schedule(s.n, s.parties, ledger)
    coloring = extract_coloring(s)
    return schedule, Strategy(s, exclusion_schedule(s.parties, ledger), coloring)


def plan_to_json(schedule: CopySchedule, ledger: Ledger | None = None) -> dict:
    ledger = ledger or default_ledger()
    out = schedule.to_dict()
    out["ledger_version"] = ledger.version
    return out


def strategy_from_plan(s: ProductStateSet, plan: Mapping, ledger: Ledger | None = None) -> Strategy:
    """Rebuild the strategy a plan file describes; theorem stages are re-certified against the ledger."""
    ledger = ledger or default_ledger()
    try:
        n, r = int(plan["n"]), int(plan["r"])
        raw = plan["exclusion_stages"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTreeError(f"malformed plan file: {exc}") from exc
    if n != s.n or r != s.parties:
        raise UsageError(f"plan is for N={n}, r={r} but the state set has N={s.n}, r={s.parties}")
    _checked(s)
    stages = []
    for st in raw:
        if st["source"] == "theorem":
            v = ledger.check_exclusion_conditions(r, int(st["m"]), int(st["exclusion"]))
            if not v.certified or v.certified_threshold != int(st["threshold"]):
                raise InvalidTreeError(f"plan stage {st} is not certified by the ledger in use")
            stages.append(ExclusionStage(v.certified_threshold, v.k, "theorem", v.m, v))
        else:
            stages.append(ExclusionStage(int(st["threshold"]), int(st["exclusion"]), st["source"]))
    return Strategy(s, stages)
