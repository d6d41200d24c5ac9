import json
import math
from fractions import Fraction

import pytest

from ramsey_locc.errors import UncertifiableError, UsageError
from ramsey_locc.protocol.schedule import (ExclusionStage, best_stage, bound_report, copies_table, copy_schedule,
                                           epsilon_schedule, exclusion_schedule, guarantee_copies)
from ramsey_locc.ramsey import LEDGER_ENV, default_ledger


def pairs(r):
    return {(st.threshold, st.exclusion) for st in exclusion_schedule(r)}


def test_bipartite_schedule_entries():
    p = pairs(2)
    assert {(2, 1), (3, 2), (6, 3), (18, 6)} <= p
    sources = {(st.threshold, st.exclusion): st.source for st in exclusion_schedule(2)}
    assert sources[(3, 2)] == "greedy" and sources[(2, 1)] == "pairwise"


def test_tripartite_schedule_entries():
    assert (17, 3) in pairs(3)


def test_schedule_sorted_by_threshold():
    th = [st.threshold for st in exclusion_schedule(2)]
    assert th == sorted(th)


def literal_g(n_max, stages):
    """The plain recurrence g(N) = 1 + g(N - e(N))."""
    g = [0] * (n_max + 1)
    for n in range(2, n_max + 1):
        e = best_stage(n, stages).exclusion
        g[n] = 1 + g[max(1, n - e)]
    return g


def test_recurrence_examples():
    assert guarantee_copies(1, 2) == 0
    assert guarantee_copies(2, 2) == 1
    assert guarantee_copies(3, 2) == 1
    assert guarantee_copies(5, 2) == 2
    assert guarantee_copies(6, 2) == 2
    assert guarantee_copies(17, 2) == 6
    assert guarantee_copies(18, 2) == 5
    assert guarantee_copies(24, 2) == 6


def test_padded_recurrence_never_worse_than_plain():
    stages = exclusion_schedule(2)
    g, plain = copies_table(300, stages), literal_g(300, stages)
    assert all(a <= b for a, b in zip(g, plain))
    for n in (3, 5, 6, 17, 18, 24):
        assert g[n] == plain[n]
    # the plain recurrence is not monotone (g(17) = 6 > g(18) = 5), which costs a copy at 48
    assert plain[48] == 11 and g[48] == 10


def test_never_worse_than_pairwise():
    g = copies_table(300, exclusion_schedule(2))
    assert all(g[n] <= n - 1 for n in range(2, 301))


def test_fewer_stages_never_help():
    full = exclusion_schedule(2)
    fewer = [st for st in full if st.source != "theorem" or st.threshold <= 6]
    a, b = copies_table(200, full), copies_table(200, fewer)
    assert all(x <= y for x, y in zip(a, b))


def test_copy_schedule_chain():
    sch = copy_schedule(18, 2)
    sizes = [st.pool_size for st in sch.stages]
    assert sizes == sorted(sizes, reverse=True) and len(set(sizes)) == len(sizes)
    assert len(sch.stages) == sch.worst_case_copies == 5
    assert all(st.exclusion >= 1 for st in sch.stages)
    last = sch.stages[-1]
    assert last.pool_size - last.exclusion <= 1


def test_bound_report_examples():
    b = bound_report(36, 2)
    assert (b.walgate, b.shu, b.f2_sixth) == (35, 9, 8)
    assert b.best <= 8
    b = bound_report(2, 2)
    assert b.walgate == 1 and b.best == 1
    b = bound_report(10, 3)
    assert b.shu == 4 and b.f2_sixth is None


@pytest.mark.parametrize("n, r", [(n, r) for n in (2, 3, 7, 25, 100) for r in (2, 3)])
def test_bound_report_invariants(n, r):
    d = bound_report(n, r).to_dict()
    vals = [v for k, v in d.items() if k not in ("n", "r", "best") and v is not None]
    assert all(v >= 1 for v in vals)
    assert d["best"] == min(vals)


def test_epsilon_one_fifth():
    e = epsilon_schedule(0.2, 2)
    assert (e.m, e.threshold_proxy, e.q0, e.M_eps) == (5, 48, 8, 7)
    assert e.threshold_proxy == e.q0 * (e.m + 1) + e.r0 and 0 <= e.r0 <= e.m
    assert all(n // 6 + 7 <= math.ceil(Fraction(n, 5)) for n in range(e.N0, 10 ** 4 + 1))
    assert n_fails_before(e)


def n_fails_before(e):
    return e.N0 == (e.q0 + 1) * (e.m + 1) or e.bound(e.N0 - 1) > math.ceil(e.epsilon * (e.N0 - 1))


def test_epsilon_one_half():
    e = epsilon_schedule("1/2", 2)
    assert (e.m, e.threshold_proxy, e.q0) == (4, 18, 3)
    assert all(e.bound(n) <= math.ceil(n / 2) for n in range(e.N0, 10 ** 4 + 1))


def test_epsilon_large():
    e = epsilon_schedule(2.0, 2)
    assert e.m == 4 and Fraction(1, e.m + 1) < e.epsilon


def test_epsilon_exact_decimal():
    # exact 1/10, so m is 10 rather than a float-rounded 9; N0 lies past the default scan
    e = epsilon_schedule(0.1, 2)
    assert e.m == 10 and e.N0 > 10 ** 4
    assert all(e.bound(n) <= math.ceil(e.epsilon * n) for n in range(e.N0, e.scan_max + 1))
    assert e.bound(e.N0 - 1) > math.ceil(e.epsilon * (e.N0 - 1))


def test_epsilon_errors(tmp_path, monkeypatch):
    with pytest.raises(UsageError):
        epsilon_schedule(0, 2)
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({"version": "empty", "entries": []}))
    monkeypatch.setenv(LEDGER_ENV, str(path))
    assert default_ledger().version == "empty"
    # with no table the recursion still bottoms out at R(n,2) = n, so r=2 stays finite
    e = epsilon_schedule(0.2, 2)
    assert e.threshold_proxy >= 48
    with pytest.raises(UncertifiableError):
        epsilon_schedule(0.2, 9)


def test_stage_dict():
    assert ExclusionStage(6, 3, "theorem", 3).to_dict() == {"threshold": 6, "exclusion": 3,
                                                            "source": "theorem", "m": 3}
