import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_locc.errors import (AmbiguousOrthogonalityError, DimensionError, NotOrthogonalError,
                                UsageError)
from ramsey_locc.states import (EdgeColoring, ProductStateSet, extract_coloring, random_coloring, realize,
                                subset, validate)


def basis(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def two_qubit_set():
    # |00>, |01>, |1+>
    plus = np.array([1, 1]) / np.sqrt(2)
    a = np.array([basis(2, 0), basis(2, 0), basis(2, 1)])
    b = np.array([basis(2, 0), basis(2, 1), plus])
    return ProductStateSet([a, b])


def test_extract_coloring_small():
    c = extract_coloring(two_qubit_set())
    assert c.colors_of(0, 1) == {2}
    assert c.colors_of(0, 2) == {1}
    assert c.colors_of(1, 2) == {1}


def test_validate_clean_set():
    assert validate(two_qubit_set()) == []


def test_not_orthogonal_is_reported():
    a = np.array([basis(2, 0), basis(2, 0)])
    s = ProductStateSet([a, a])
    kinds = {f.kind for f in validate(s)}
    assert "missing-witness" in kinds
    with pytest.raises(NotOrthogonalError):
        extract_coloring(s)


def test_gap_violation_is_ambiguous():
    eps = 1e-6
    v = np.array([eps, np.sqrt(1 - eps ** 2)])
    a = np.array([basis(2, 0), v])
    b = np.array([basis(2, 0), basis(2, 1)])
    s = ProductStateSet([a, b])
    assert any(f.kind == "gap" for f in validate(s))
    with pytest.raises(AmbiguousOrthogonalityError):
        extract_coloring(s)


def test_unnormalized_vector_flagged():
    a = np.array([basis(2, 0), 2 * basis(2, 1)])
    b = np.array([basis(2, 0), basis(2, 0)])
    s = ProductStateSet([a, b])
    assert [(f.kind, f.where) for f in validate(s)] == [("norm", (1, 1))]


def test_json_round_trip_is_exact(make_set):
    s = make_set(7, 3, 2)
    back = ProductStateSet.from_json(json.loads(json.dumps(s.to_json())))
    for p, q in zip(s.parts, back.parts):
        assert np.array_equal(p, q)
    assert (back.zero_tol, back.gap_tol) == (s.zero_tol, s.gap_tol)


def test_malformed_file():
    with pytest.raises(UsageError):
        ProductStateSet.from_json({"parties": 2, "dims": [2], "states": []})


def test_coloring_must_be_total():
    with pytest.raises(UsageError):
        EdgeColoring(3, 2, {(0, 1): {1}, (0, 2): {2}})
    with pytest.raises(UsageError):
        EdgeColoring(2, 2, {(0, 1): {3}})


def test_coloring_json_round_trip():
    c = random_coloring(9, 3, 11)
    assert EdgeColoring.from_json(json.loads(json.dumps(c.to_json()))) == c


def test_random_coloring_is_seeded():
    assert random_coloring(8, 2, 5) == random_coloring(8, 2, 5)
    assert random_coloring(8, 2, 5) != random_coloring(8, 2, 6)


def test_realize_needs_dimension():
    with pytest.raises(DimensionError):
        realize(random_coloring(6, 2, 0), dims=[5, 6])


def test_realize_with_explicit_dimensions():
    c = EdgeColoring.from_canonical(3, 2, {(0, 1): 1, (0, 2): 2, (1, 2): 2})
    s = realize(c, dims=[3, 5], seed=1)
    assert s.dims == [3, 5]
    assert extract_coloring(s) == c


@given(st.integers(2, 12), st.integers(2, 3), st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_realize_reproduces_the_coloring(n, r, seed):
    c = random_coloring(n, r, seed)
    s = realize(c, seed=seed)
    assert validate(s) == []
    assert extract_coloring(s) == c


@given(st.integers(3, 8), st.integers(0, 1000), st.floats(0, 2 * np.pi))
@settings(max_examples=25, deadline=None)
def test_coloring_invariant_under_phase_and_unitary(n, seed, phase):
    s = realize(random_coloring(n, 2, seed), seed=seed)
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    u, _ = np.linalg.qr(z)
    parts = [s.parts[0] @ u.T, s.parts[1] * np.exp(1j * phase)]
    rotated = ProductStateSet(parts)
    assert extract_coloring(rotated) == extract_coloring(s)


def test_subset_keeps_restricted_coloring(make_set):
    s = make_set(8, 2, 3)
    c = extract_coloring(s)
    t = subset(s, [1, 4, 6])
    ct = extract_coloring(t)
    assert ct.colors_of(0, 1) == c.colors_of(1, 4)
    assert ct.colors_of(1, 2) == c.colors_of(4, 6)
