"""Copy-count bounds: certified exclusion stages, the scheduler recurrence, and the epsilon schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from ..errors import UncertifiableError, UsageError
from ..ramsey import CertificationVerdict, Ledger, RamseyQuery, default_ledger


@dataclass(frozen=True)
class ExclusionStage:
    """From any ``threshold`` or more candidates one copy excludes at least ``exclusion``."""

    threshold: int
    exclusion: int
    source: str  # "theorem" | "greedy" | "pairwise"
    m: int | None = None
    verdict: CertificationVerdict | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "exclusion": self.exclusion, "source": self.source, "m": self.m}


@dataclass(frozen=True)
class ScheduleConfig:
    max_m: int = 10
    max_extra: int = 12  # largest k - m tried per base size


def exclusion_schedule(r: int, ledger: Ledger | None = None,
                       config: ScheduleConfig = ScheduleConfig()) -> list[ExclusionStage]:
    """Every certified (threshold, exclusion) pair, plus the greedy and pairwise stages."""
    if r < 2:
        raise UsageError("exclusion_schedule needs r >= 2")
    ledger = ledger or default_ledger()
    return list(_schedule(r, ledger, config))


@lru_cache(maxsize=64)
def _schedule(r: int, ledger: Ledger, config: ScheduleConfig) -> tuple[ExclusionStage, ...]:
    stages = [ExclusionStage(2, 1, "pairwise"), ExclusionStage(3, 2, "greedy")]
    for m in range(2, config.max_m + 1):
        for k in range(m, m + config.max_extra + 1):
            v = ledger.check_exclusion_conditions(r, m, k)
            if v.certified:
                stages.append(ExclusionStage(v.certified_threshold, k, "theorem", m, v))
    stages.sort(key=lambda st: (st.threshold, st.exclusion, st.m or 0))
    return tuple(stages)


def best_stage(n: int, stages) -> ExclusionStage | None:
    """Largest certified exclusion usable on ``n`` candidates; theorem stages win ties."""
    usable = [st for st in stages if st.threshold <= n]
    if not usable:
        return None
    rank = {"theorem": 2, "greedy": 1, "pairwise": 0}
    return max(usable, key=lambda st: (st.exclusion, rank[st.source], -(st.m or 0)))


def copies_table(n_max: int, stages) -> list[int]:
    """g[0..n_max] with g(1) = 0 and g(n) = 1 + min g(n') over n - e(n) <= n' < n.

    The minimum (rather than g(n - e(n)) alone) reflects that a planner may
    refill the candidate pool with already excluded states, so any pool size
    between the survivor count and the previous pool is reachable.
    """
    g = [0] * (n_max + 1)
    for n in range(2, n_max + 1):
        e = best_stage(n, stages).exclusion
        g[n] = 1 + min(g[max(1, n - e):n])
    return g


def guarantee_copies(n: int, r: int, ledger: Ledger | None = None) -> int:
    if n < 1:
        raise UsageError("guarantee_copies needs N >= 1")
    return copies_table(n, exclusion_schedule(r, ledger))[n]


@dataclass(frozen=True)
class CopyStage:
    pool_size: int
    exclusion: int
    source: str
    threshold: int

    def to_dict(self) -> dict:
        return {"pool_size": self.pool_size, "exclusion": self.exclusion, "source": self.source,
                "threshold": self.threshold}


@dataclass(frozen=True)
class CopySchedule:
    n: int
    r: int
    stages: tuple[CopyStage, ...]
    worst_case_copies: int
    exclusion_stages: tuple[ExclusionStage, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r, "worst_case_copies": self.worst_case_copies,
                "stages": [st.to_dict() for st in self.stages],
                "exclusion_stages": [st.to_dict() for st in self.exclusion_stages]}


def copy_schedule(n: int, r: int, ledger: Ledger | None = None) -> CopySchedule:
    """Worst-case stage chain from ``n`` candidates down to one."""
    stages = exclusion_schedule(r, ledger)
    g = copies_table(n, stages)
    chain = []
    cur = n
    while cur > 1:
        st = best_stage(cur, stages)
        chain.append(CopyStage(cur, st.exclusion, st.source, st.threshold))
        lo = max(1, cur - st.exclusion)
        cur = min(range(lo, cur), key=lambda x: (g[x], -x))
    return CopySchedule(n, r, tuple(chain), g[n], tuple(stages))


@dataclass(frozen=True)
class BoundReport:
    """Upper bounds on the copy count for N orthogonal r-partite product states.

    walgate is N - 1 (one exclusion per copy), shu is ceil(N/4) for r = 2 and
    ceil(N/4) + 1 otherwise, f2_sixth is ceil(N/6) + 2 (r = 2 only) and
    scheduler is what the implemented stages guarantee.
    """

    n: int
    r: int
    walgate: int
    shu: int
    shu_general: int
    f2_sixth: int | None
    scheduler: int

    @property
    def best(self) -> int:
        vals = [self.walgate, self.shu, self.shu_general, self.scheduler]
        if self.f2_sixth is not None:
            vals.append(self.f2_sixth)
        return min(vals)

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r, "walgate": self.walgate, "shu": self.shu,
                "shu_general": self.shu_general, "f2_sixth": self.f2_sixth,
                "scheduler": self.scheduler, "best": self.best}


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def bound_report(n: int, r: int, ledger: Ledger | None = None) -> BoundReport:
    """Upper bounds on the copy count f_r(N) from every available source."""
    if n < 2 or r < 2:
        raise UsageError("bound_report needs N >= 2 and r >= 2")
    shu_general = _ceil_div(n, 4) + 1
    return BoundReport(
        n=n, r=r,
        walgate=n - 1,
        shu=_ceil_div(n, 4) if r == 2 else shu_general,
        shu_general=shu_general,
        f2_sixth=_ceil_div(n, 6) + 2 if r == 2 else None,
        scheduler=guarantee_copies(n, r, ledger),
    )


SCAN_CAP = 10 ** 7


@dataclass(frozen=True)
class EpsilonSchedule:
    epsilon: Fraction
    r: int
    m: int
    threshold_proxy: int
    q0: int
    r0: int
    M_eps: int
    N0: int
    scan_max: int  # last N scanned; the bound holds past it by the linear estimate
    exclusion_certified: bool

    def bound(self, n: int) -> int:
        """Copies sufficient for n >= (q0+1)(m+1) candidates."""
        return n // (self.m + 1) - self.q0 + _ceil_div((self.q0 + 1) * (self.m + 1), 4) + 1

    def to_dict(self) -> dict:
        return {"epsilon": str(self.epsilon), "r": self.r, "m": self.m, "threshold_proxy": self.threshold_proxy,
                "q0": self.q0, "r0": self.r0, "M_eps": self.M_eps, "N0": self.N0, "scan_max": self.scan_max,
                "exclusion_certified": self.exclusion_certified}


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"epsilon {x!r} is not a number") from exc


def epsilon_schedule(epsilon, r: int, scan_max: int = 10 ** 4, ledger: Ledger | None = None) -> EpsilonSchedule:
    """Base size m, pool constants and the first N from which the copy bound stays below ceil(eps N)."""
    eps = _as_fraction(epsilon)
    if eps <= 0 or r < 2:
        raise UsageError("epsilon_schedule needs epsilon > 0 and r >= 2")
    ledger = ledger or default_ledger()
    m = max(4, math.floor(1 / eps))
    assert Fraction(1, m + 1) < eps
    b = ledger.derive_bounds(RamseyQuery((m,) * r))
    if b.upper is None:
        raise UncertifiableError(f"no finite certified upper bound for R_{r}({m}) = {RamseyQuery((m,) * r)}")
    proxy = b.upper
    q0, r0 = divmod(proxy, m + 1)
    m_eps = _ceil_div((q0 + 1) * (m + 1), 4) + 1 - q0
    start = (q0 + 1) * (m + 1)
    certified = ledger.check_exclusion_conditions(r, m, m + 1).certified
    sched = EpsilonSchedule(eps, r, m, proxy, q0, r0, m_eps, start, scan_max, certified)
    # beyond N = C / (eps - 1/(m+1)) the bound holds for every N, since N div (m+1) <= N/(m+1)
    c = sched.bound(0)
    settled = max(start, math.ceil(c / (eps - Fraction(1, m + 1))))
    end = max(scan_max, settled)
    if end - start > SCAN_CAP:
        raise UncertifiableError(f"N0 lies beyond N = {start + SCAN_CAP}; epsilon {eps} is too small to scan")
    n0 = end
    for n in range(end, start - 1, -1):
        if sched.bound(n) > math.ceil(eps * n):
            break
        n0 = n
    return EpsilonSchedule(eps, r, m, proxy, q0, r0, m_eps, n0, end, certified)
