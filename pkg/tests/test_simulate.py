from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_locc.errors import InvalidMeasurementError, InvalidTreeError
from ramsey_locc.protocol.plan import plan_distinguish
from ramsey_locc.protocol.synthesis import synthesize_exclusion
from ramsey_locc.protocol.tree import REST, Leaf, MeasurementSpec, Node, ProtocolTree
from ramsey_locc.ramsey import check_exclusion_conditions
from ramsey_locc.simulate import outcome_distribution, run_trace, verify_exclusion, verify_identification
from ramsey_locc.states import ProductStateSet, random_coloring, realize


# -- naive oracle: full projector matrices, no shared code with the simulator ----------

def naive_probs(s, truth, m):
    j = m.subsystem - 1
    d = s.dims[j]
    v = s.parts[j][truth]
    projs = [np.outer(s.parts[j][p], s.parts[j][p].conj()) for p in m.projectors]
    projs.append(np.eye(d) - sum(projs))
    # ||P v||^2 rather than <v|P|v>, so a zero of the REST projector stays below zero_tol^2
    return [float(np.linalg.norm(P @ v) ** 2) for P in projs]


def naive_leaf_report(tree, s):
    """(truth, outcome sequence) -> actual survivors, by brute recomputation per path."""
    tol2 = s.zero_tol ** 2
    out = {}
    for truth in tree.candidates:
        def walk(node, seq, alive):
            if isinstance(node, Leaf):
                out[(truth, tuple(seq))] = alive
                return
            m = node.measurement
            pt = naive_probs(s, truth, m)
            for i, o in enumerate(m.outcomes):
                if pt[i] <= tol2:
                    continue
                nxt = frozenset(z for z in alive if naive_probs(s, z, m)[i] > tol2)
                walk(node.children[o], seq + [o], nxt)
        walk(tree.root, [], frozenset(tree.candidates))
    return out


def six_tree(seed):
    s = realize(random_coloring(6, 2, seed), seed=seed)
    return s, synthesize_exclusion(s, 3, check_exclusion_conditions(2, 3, 3))


# -- outcome distributions ----------------------------------------------------------------

def test_basis_state_distribution():
    e = np.eye(2, dtype=complex)
    s = ProductStateSet([e, e])
    d = outcome_distribution(s, 0, MeasurementSpec(1, 1, (0, 1)))
    assert d.probabilities == (1.0, 0.0, 0.0)


def test_plus_state_distribution():
    plus = np.array([1, 1]) / np.sqrt(2)
    s = ProductStateSet([np.array([[1, 0], plus]), np.eye(2)])
    d = outcome_distribution(s, 1, MeasurementSpec(1, 1, (0,)))
    assert d[0] == pytest.approx(0.5) and d[REST] == pytest.approx(0.5)


def test_nonorthogonal_projectors_rejected():
    plus = np.array([1, 1]) / np.sqrt(2)
    s = ProductStateSet([np.array([[1, 0], plus]), np.eye(2)])
    with pytest.raises(InvalidMeasurementError):
        outcome_distribution(s, 0, MeasurementSpec(1, 1, (0, 1)))


def test_root_distribution_matches_gram_oracle():
    s, tree = six_tree(3)
    m = tree.root.measurement
    for truth in range(6):
        assert np.allclose(outcome_distribution(s, truth, m).probabilities, naive_probs(s, truth, m), atol=1e-12)


@given(st.integers(3, 10), st.integers(2, 3), st.integers(0, 10 ** 5), st.data())
@settings(max_examples=30, deadline=None)
def test_distributions_sum_to_one(n, r, seed, data):
    s = realize(random_coloring(n, r, seed), seed=seed)
    j = data.draw(st.integers(1, r))
    truth = data.draw(st.integers(0, n - 1))
    # any single state is a valid one-projector measurement
    p = data.draw(st.integers(0, n - 1))
    d = outcome_distribution(s, truth, MeasurementSpec(1, j, (p,)))
    assert abs(sum(d.probabilities) - 1) <= 1e-9
    assert all(0 <= x <= 1 + 1e-12 for x in d.probabilities)


# -- exclusion verification -----------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_verify_agrees_with_naive_oracle(seed):
    s, tree = six_tree(seed)
    rep = verify_exclusion(tree, s, 3)
    assert rep.passed
    naive = naive_leaf_report(tree, s)
    for (truth, seq), alive in naive.items():
        assert truth in alive
        assert len(tree.candidates) - len(alive) >= 3
    for rec in rep.per_candidate:
        worst_naive = min(6 - len(a) for (t, _), a in naive.items() if t == rec["truth"])
        assert rec["excluded"] <= worst_naive


def sabotage(node):
    if isinstance(node, Leaf):
        return node
    children = {}
    for o, c in node.children.items():
        children[o] = sabotage(c)
    first = next(iter(children))
    if isinstance(children[first], Leaf):
        children[first] = Leaf(tuple(range(6)))
    return Node(node.measurement, children)


def test_padded_leaf_fails_with_counterexample():
    s, tree = six_tree(1)
    bad = replace(tree, root=sabotage(tree.root))
    rep = verify_exclusion(bad, s, 3)
    assert not rep.passed
    assert rep.counterexample["path"] and "reason" in rep.counterexample


def test_missing_branch_fails():
    s, tree = six_tree(2)
    root = tree.root
    children = dict(root.children)
    children.pop(next(iter(children)))
    rep = verify_exclusion(replace(tree, root=Node(root.measurement, children)), s, 3)
    assert not rep.passed


def test_leaf_dropping_a_possible_candidate_fails():
    s, tree = six_tree(4)
    root = tree.root

    def shrink(node):
        if isinstance(node, Leaf):
            return Leaf(node.survivors[1:])
        return Node(node.measurement, {o: shrink(c) for o, c in node.children.items()})

    assert not verify_exclusion(replace(tree, root=shrink(root)), s, 3).passed


def test_repeated_subsystem_is_invalid():
    s, _ = six_tree(0)
    inner = Node(MeasurementSpec(1, 1, (1,)), {1: Leaf((1,)), REST: Leaf((2, 3, 4, 5))})
    root = Node(MeasurementSpec(1, 1, (0,)), {0: Leaf((0,)), REST: inner})
    with pytest.raises(InvalidTreeError):
        verify_exclusion(ProtocolTree(root, tuple(range(6)), 1), s, 1)


@given(st.integers(0, 10 ** 4), st.floats(0, 6.28))
@settings(max_examples=15, deadline=None)
def test_exclusion_counts_invariant_under_phase_and_unitary(seed, phase):
    s, tree = six_tree(seed)
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    t = ProductStateSet([s.parts[0] @ u.T, s.parts[1] * np.exp(1j * phase)])
    a, b = verify_exclusion(tree, s, 3), verify_exclusion(tree, t, 3)
    assert a.passed and b.passed
    assert [r["excluded"] for r in a.per_candidate] == [r["excluded"] for r in b.per_candidate]


# -- identification ---------------------------------------------------------------------

@pytest.mark.parametrize("n, bound", [(2, 1), (6, 2), (18, 5)])
def test_identification(n, bound):
    s = realize(random_coloring(n, 2, 7), seed=7)
    sched, strategy = plan_distinguish(s)
    rep = verify_identification(strategy, s)
    assert rep.passed
    assert rep.max_copies <= sched.worst_case_copies == bound


def test_identification_detects_bad_strategy():
    s = realize(random_coloring(6, 2, 1), seed=1)
    _, strategy = plan_distinguish(s)
    strategy.g = [0] * len(strategy.g)  # declares zero copies
    assert not verify_identification(strategy, s).passed


def test_trace_identifies_and_is_reproducible():
    s = realize(random_coloring(12, 2, 5), seed=5)
    _, strategy = plan_distinguish(s)
    for truth in range(12):
        a = run_trace(strategy, s, truth, seed=9)
        assert a.identified and a.final == [truth]
        assert a.to_dict() == run_trace(strategy, s, truth, seed=9).to_dict()


def test_deterministic_path_ignores_seed():
    e = np.eye(3, dtype=complex)
    s = ProductStateSet([e, e])
    _, strategy = plan_distinguish(s)
    traces = {str(run_trace(strategy, s, 2, seed).to_dict()["steps"]) for seed in range(5)}
    assert len(traces) == 1


def test_true_state_never_excluded():
    for seed in range(5):
        s = realize(random_coloring(9, 3, seed), seed=seed)
        _, strategy = plan_distinguish(s)
        rep = verify_exclusion(strategy.stage_tree(range(9), 1), s, 1)
        assert rep.passed
        assert all(rec["truth"] in rec["survivors"] for rec in rep.per_candidate)
