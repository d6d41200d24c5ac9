"""Ramsey-number ledger, bound derivation and exclusion-condition certification.

All arithmetic is on Python integers, so derived bounds are exact consequences
of the rules below; no floating point enters a certificate.

Rule tags used in provenance:

``table:<source>``         value read from the shipped ledger
``identity``               R(..,1,..) = 1, 2-targets dropped, R(n) = n
``trivial``                R >= largest target
``monotone``               R is non-decreasing in each target
``erdos-szekeres``         R(k,l) <= R(k-1,l) + R(k,l-1)
``multicolor-recursion``   R(i_1..i_r) <= 2 - r + sum_j R(.., i_j - 1, ..)
``erdos-lower``            R(m,m) > 2^(m/2)
``conlon-ferber-lower``    R(m,m,m) > 3^(m/2)
``product-lower``          R_{a+b}(m) > (R_a(m) - 1)(R_b(m) - 1)
``sarkozy-upper``          R(m,3,..,3; r+1) <= r! m^(r+1)
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidQueryError, ResourceError

LEDGER_ENV = "RAMSEY_LOCC_LEDGER"


@dataclass(frozen=True)
class RamseyQuery:
    """Clique sizes i_1..i_r, stored in non-increasing order."""

    targets: tuple[int, ...]

    def __post_init__(self):
        if not self.targets:
            raise InvalidQueryError("a Ramsey query needs at least one target")
        if any(int(t) != t or t < 1 for t in self.targets):
            raise InvalidQueryError(f"targets must be positive integers, got {list(self.targets)}")
        object.__setattr__(self, "targets", tuple(sorted((int(t) for t in self.targets), reverse=True)))

    @property
    def colors(self) -> int:
        return len(self.targets)

    @property
    def is_diagonal(self) -> bool:
        return len(set(self.targets)) == 1

    def __str__(self):
        return "R(" + ",".join(map(str, self.targets)) + ")"


def normalize_query(targets: Iterable[int]) -> tuple[RamseyQuery, int | None]:
    """Canonicalize ``targets`` and resolve the trivial identities.

    Returns the reduced query and, when the identities settle it, its exact
    value. A target of 1 forces R = 1; targets equal to 2 are dropped; a single
    remaining target n gives R = n.
    """
    q = RamseyQuery(tuple(targets))
    if 1 in q.targets:
        return q, 1
    reduced = tuple(t for t in q.targets if t != 2)
    if not reduced:
        return q, 2
    rq = RamseyQuery(reduced)
    if rq.colors == 1:
        return rq, rq.targets[0]
    return rq, None


@dataclass(frozen=True)
class BoundInterval:
    lower: int
    upper: int | None
    lower_provenance: tuple[str, ...]
    upper_provenance: tuple[str, ...]

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")
        if not self.lower_provenance or not self.upper_provenance:
            raise ValueError("both sides of a bound need provenance")

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    @property
    def provenance(self) -> list[str]:
        return [f"lower:{p}" for p in self.lower_provenance] + [f"upper:{p}" for p in self.upper_provenance]

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "lower_provenance": list(self.lower_provenance),
            "upper_provenance": list(self.upper_provenance),
        }

    def __str__(self):
        if self.exact:
            return f"exact {self.lower}"
        hi = "inf" if self.upper is None else str(self.upper)
        return f"[{self.lower}, {hi}]"


@dataclass(frozen=True)
class LedgerEntry:
    targets: tuple[int, ...]
    lower: int | None
    upper: int | None
    exact: bool
    source: str

    def to_dict(self) -> dict:
        return {"targets": list(self.targets), "lower": self.lower, "upper": self.upper,
                "exact": self.exact, "source": self.source}


@dataclass(frozen=True)
class DeriveConfig:
    """Recursion cap for the derivation closure; queries outside it only get direct rules."""

    max_target: int = 30
    max_colors: int = 8


class Status(str, enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ConditionLine:
    t: int
    lhs_query: RamseyQuery
    rhs_query: RamseyQuery
    lhs_lower: int
    lhs_upper: int | None
    rhs_lower: int
    rhs_upper: int | None
    passed: bool | None  # None: undecided from the ledger

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "lhs": f"{self.lhs_query} - {self.offset}",
            "rhs": str(self.rhs_query),
            "lhs_bound": self.lhs_lower,
            "rhs_bound": self.rhs_upper,
            "passed": self.passed,
        }

    @property
    def offset(self) -> int:
        return self.lhs_query.targets[0] + self.t

    def __str__(self):
        rhs = "inf" if self.rhs_upper is None else str(self.rhs_upper)
        rel = ">=" if self.passed else ("<" if self.passed is False else "?")
        return f"t={self.t}: {self.lhs_lower} {rel} {rhs}   ({self.lhs_query}-{self.offset} vs {self.rhs_query})"


@dataclass(frozen=True)
class CertificationVerdict:
    r: int
    m: int
    k: int
    status: Status
    witness: tuple[ConditionLine, ...]
    certified_threshold: int | None

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    def to_dict(self) -> dict:
        return {
            "r": self.r, "m": self.m, "k": self.k,
            "status": self.status.value,
            "certified_threshold": self.certified_threshold,
            "witness": [line.to_dict() for line in self.witness],
        }


def _trivial_lower(q: RamseyQuery) -> int:
    return max(q.targets)


class Ledger:
    """Immutable table of known Ramsey bounds plus the derivation closure over it."""

    def __init__(self, entries: Iterable[LedgerEntry], version: str = "custom",
                 config: DeriveConfig | None = None):
        self.version = version
        self.config = config or DeriveConfig()
        table: dict[tuple[int, ...], LedgerEntry] = {}
        for e in entries:
            key = RamseyQuery(e.targets).targets
            if key in table:
                raise InvalidQueryError(f"duplicate ledger entry for R{key}")
            table[key] = LedgerEntry(key, e.lower, e.upper, e.exact, e.source)
        self._table = table
        self._lower_cache: dict[tuple[int, ...], tuple[int, str]] = {}
        self._upper_cache: dict[tuple[int, ...], tuple[int | None, str]] = {}

    # -- loading -----------------------------------------------------------

    @classmethod
    def from_json(cls, data: dict, config: DeriveConfig | None = None) -> "Ledger":
        entries = [
            LedgerEntry(tuple(e["targets"]), e.get("lower"), e.get("upper"), bool(e.get("exact", False)),
                        e.get("source", "unknown"))
            for e in data["entries"]
        ]
        return cls(entries, version=str(data.get("version", "custom")), config=config)

    @classmethod
    def from_file(cls, path: str | os.PathLike, config: DeriveConfig | None = None) -> "Ledger":
        with open(path) as f:
            return cls.from_json(json.load(f), config)

    @classmethod
    def default(cls) -> "Ledger":
        path = os.environ.get(LEDGER_ENV)
        if path:
            return _load_path(path)
        return _load_shipped()

    @property
    def entries(self) -> list[LedgerEntry]:
        return list(self._table.values())

    def without(self, keys: Iterable[Sequence[int]]) -> "Ledger":
        """A copy with the given entries removed (used to probe monotonicity)."""
        drop = {RamseyQuery(tuple(k)).targets for k in keys}
        return Ledger([e for e in self._table.values() if e.targets not in drop],
                      version=self.version + "-reduced", config=self.config)

    # -- table lookup ------------------------------------------------------

    def lookup(self, q: RamseyQuery | Sequence[int]) -> BoundInterval:
        if not isinstance(q, RamseyQuery):
            q = RamseyQuery(tuple(q))
        rq, value = normalize_query(q.targets)
        if value is not None:
            return BoundInterval(value, value, ("identity",), ("identity",))
        e = self._table.get(rq.targets)
        if e is None:
            return BoundInterval(_trivial_lower(rq), None, ("trivial",), ("no table entry",))
        tag = f"table:{e.source}"
        lower = e.lower if e.lower is not None else _trivial_lower(rq)
        lower_tag = tag if e.lower is not None else "trivial"
        upper = e.upper
        if e.exact:
            upper = lower
        upper_tag = tag if upper is not None else "no table entry"
        return BoundInterval(lower, upper, (lower_tag,), (upper_tag,))

    # -- derivation closure -----------------------------------------------

    def _in_cap(self, q: RamseyQuery) -> bool:
        return max(q.targets) <= self.config.max_target and q.colors <= self.config.max_colors

    def _lower(self, targets: tuple[int, ...]) -> tuple[int, str]:
        rq, value = normalize_query(targets)
        if value is not None:
            return value, "identity"
        key = rq.targets
        hit = self._lower_cache.get(key)
        if hit is not None:
            return hit
        base = self.lookup(rq)
        best, tag = base.lower, base.lower_provenance[0]

        def offer(v: int, t: str):
            nonlocal best, tag
            if v > best:
                best, tag = v, t

        r = rq.colors
        if rq.is_diagonal:
            m = rq.targets[0]
            if r == 2:
                offer(math.isqrt(2 ** m) + 1, "erdos-lower")
            if r == 3:
                offer(math.isqrt(3 ** m) + 1, "conlon-ferber-lower")
        if self._in_cap(rq):
            if rq.is_diagonal:
                m = rq.targets[0]
                for a in range(1, r // 2 + 1):
                    la = m if a == 1 else self._lower((m,) * a)[0]
                    lb = self._lower((m,) * (r - a))[0]
                    offer((la - 1) * (lb - 1) + 1, "product-lower")
            for i in range(r):
                if i and rq.targets[i] == rq.targets[i - 1]:
                    continue
                dec = list(rq.targets)
                dec[i] -= 1
                offer(self._lower(tuple(dec))[0], "monotone")
        self._lower_cache[key] = (best, tag)
        return best, tag

    def _upper(self, targets: tuple[int, ...]) -> tuple[int | None, str]:
        rq, value = normalize_query(targets)
        if value is not None:
            return value, "identity"
        key = rq.targets
        hit = self._upper_cache.get(key)
        if hit is not None:
            return hit
        base = self.lookup(rq)
        best, tag = base.upper, base.upper_provenance[0]

        def offer(v: int | None, t: str):
            nonlocal best, tag
            if v is not None and (best is None or v < best):
                best, tag = v, t

        r = rq.colors
        m = rq.targets[0]
        if all(t == 3 for t in rq.targets[1:]):
            offer(math.factorial(r - 1) * m ** r, "sarkozy-upper")
        if self._in_cap(rq):
            total = 2 - r
            for i in range(r):
                dec = list(rq.targets)
                dec[i] -= 1
                u = self._upper(tuple(dec))[0]
                if u is None:
                    total = None
                    break
                total += u
            offer(total, "erdos-szekeres" if r == 2 else "multicolor-recursion")
        self._upper_cache[key] = (best, tag)
        return best, tag

    def derive_bounds(self, q: RamseyQuery | Sequence[int]) -> BoundInterval:
        """Tightest interval reachable from the table by the derivation rules."""
        if not isinstance(q, RamseyQuery):
            q = RamseyQuery(tuple(q))
        lo, lo_tag = self._lower(q.targets)
        hi, hi_tag = self._upper(q.targets)
        if hi is None:
            hi_tag = "unbounded"
        if hi is not None and lo > hi:
            raise InvalidQueryError(f"ledger inconsistency at {q}: derived lower {lo} exceeds upper {hi}")
        return BoundInterval(lo, hi, (lo_tag,), (hi_tag,))

    # -- exclusion conditions ----------------------------------------------

    def check_exclusion_conditions(self, r: int, m: int, k: int) -> CertificationVerdict:
        """Three-valued check of R_r(m) - (m+t) >= R(m+1+t, k-m+1-t, ..., k-m+1-t; r), 0 <= t <= k-m."""
        if r < 2 or m < 2 or k < m:
            raise InvalidQueryError(f"need r >= 2, m >= 2 and k >= m, got r={r}, m={m}, k={k}")
        base = RamseyQuery((m,) * r)
        bb = self.derive_bounds(base)
        lines = []
        all_pass = True
        refuted = False
        for t in range(k - m + 1):
            rhs = RamseyQuery((m + 1 + t,) + (k - m + 1 - t,) * (r - 1))
            rb = self.derive_bounds(rhs)
            lhs_lo = bb.lower - (m + t)
            lhs_hi = None if bb.upper is None else bb.upper - (m + t)
            if rb.upper is not None and lhs_lo >= rb.upper:
                passed = True
            elif lhs_hi is not None and lhs_hi < rb.lower:
                passed = False
            else:
                passed = None
            all_pass &= passed is True
            refuted |= passed is False
            lines.append(ConditionLine(t, base, rhs, lhs_lo, lhs_hi, rb.lower, rb.upper, passed))
        if refuted:
            status, threshold = Status.REFUTED, None
        elif all_pass and bb.upper is not None:
            status, threshold = Status.CERTIFIED, bb.upper
        else:
            status, threshold = Status.UNKNOWN, None
        return CertificationVerdict(r, m, k, status, tuple(lines), threshold)


@lru_cache(maxsize=1)
def _load_shipped() -> Ledger:
    text = resources.files("ramsey_locc").joinpath("data/ledger.json").read_text()
    return Ledger.from_json(json.loads(text))


@lru_cache(maxsize=8)
def _load_path(path: str) -> Ledger:
    return Ledger.from_file(path)


def default_ledger() -> Ledger:
    return Ledger.default()


def lookup(q) -> BoundInterval:
    return default_ledger().lookup(q)


def derive_bounds(q) -> BoundInterval:
    return default_ledger().derive_bounds(q)


def check_exclusion_conditions(r: int, m: int, k: int) -> CertificationVerdict:
    return default_ledger().check_exclusion_conditions(r, m, k)


# -- brute force oracle ------------------------------------------------------

BRUTE_GUARD = 2 ** 30
_CHUNK = 1 << 18


def _has_clique(adj: list[int], mask: int, size: int) -> bool:
    if size <= 0:
        return True
    if size == 1:
        return mask != 0
    if mask.bit_count() < size:
        return False
    while mask:
        v = mask.bit_length() - 1
        mask &= ~(1 << v)
        if _has_clique(adj, mask & adj[v], size - 1):
            return True
        if mask.bit_count() < size:
            return False
    return False


def _good_coloring_exists(targets: tuple[int, ...], n: int) -> bool:
    """Depth-first search for an r-coloring of K_n with no forbidden monochromatic clique."""
    if n == 0:
        return True
    if min(targets) == 1:
        return False
    r = len(targets)
    adj = [[0] * n for _ in range(r)]
    edges = [(u, v) for v in range(1, n) for u in range(v)]

    def dfs(idx: int) -> bool:
        if idx == len(edges):
            return True
        u, v = edges[idx]
        for c in range(r):
            a = adj[c]
            if _has_clique(a, a[u] & a[v], targets[c] - 2):
                continue
            a[u] |= 1 << v
            a[v] |= 1 << u
            ok = dfs(idx + 1)
            a[u] &= ~(1 << v)
            a[v] &= ~(1 << u)
            if ok:
                return True
        return False

    return dfs(0)


def _exhaustive_good_exists(targets: tuple[int, ...], n: int) -> bool:
    """Enumerate every r-coloring of K_n (no pruning) and test each one."""
    r = len(targets)
    edges = [(u, v) for v in range(1, n) for u in range(v)]
    index = {e: i for i, e in enumerate(edges)}
    n_edges = len(edges)
    checks = []
    for c, size in enumerate(targets):
        subsets = list(itertools.combinations(range(n), size)) if size <= n else []
        cols = [[index[(a, b)] for a, b in itertools.combinations(s, 2)] for s in subsets]
        checks.append((c, subsets, cols))
    # a target of 1 is met by any single vertex
    if any(size <= 1 and n >= 1 for size in targets):
        return False
    total = r ** n_edges
    place = r ** np.arange(n_edges, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        colors = (codes[:, None] // place[None, :]) % r
        forbidden = np.zeros(len(codes), dtype=bool)
        for c, subsets, cols in checks:
            if not subsets:
                continue
            is_c = colors == c
            for col in cols:
                forbidden |= is_c[:, col].all(axis=1)
        if not forbidden.all():
            return True
    return False


def brute_force_ramsey(targets: Sequence[int], max_n: int, prune: bool = False) -> int | None:
    """Smallest N <= max_n whose every edge coloring holds a forbidden monochromatic clique.

    Returns None when every N up to ``max_n`` still admits a good coloring.
    Without ``prune`` each K_N is enumerated in full, guarded so that the
    total coloring count at ``max_n`` stays below 2^30.
    """
    RamseyQuery(tuple(targets))  # validates
    if max_n < 1:
        raise InvalidQueryError("max_n must be positive")
    targets = tuple(targets)
    r = len(targets)
    if not prune:
        budget = r ** (max_n * (max_n - 1) // 2)
        if budget > BRUTE_GUARD:
            raise ResourceError(
                f"{r}^{max_n * (max_n - 1) // 2} colorings of K_{max_n} exceed the 2^30 guard; enable pruning"
            )
    search = _good_coloring_exists if prune else _exhaustive_good_exists
    for n in range(1, max_n + 1):
        if not search(targets, n):
            return n
    return None
