import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from antetomo.antedate import (
    corrected_expectations,
    correction_sign,
    transform_direction,
    unscramble,
)
from antetomo.counts import UNRESOLVED, CountsTable
from antetomo.qcore import correction, pauli, random_pure_state
from antetomo.simproto import BellAnalyzerModel, ExperimentConfig, SourceModel, exact_statistics, simulate_counts

FULL = ExperimentConfig(SourceModel.ideal(), BellAnalyzerModel(1.0, (0, 1, 2, 3)))


def eigvec(j, beta):
    w, v = np.linalg.eigh(pauli(j))
    return v[:, list(np.round(w)).index(beta)]


def branch_table_by_hand(psi):
    """P(lambda_i, j, beta) from the four equally weighted branches tau_i|psi>/2."""
    table = {}
    for i, j, beta in itertools.product(range(4), (1, 2, 3), (1, -1)):
        branch = 0.5 * (correction(i) @ psi)
        table[(i, j, beta)] = abs(np.vdot(eigvec(j, beta), branch)) ** 2
    return table


def test_correction_sign_examples():
    assert correction_sign(0, 1) == 1
    assert correction_sign(3, 1) == -1
    assert correction_sign(2, 2) == 1


def test_correction_sign_rejects_identity_basis():
    with pytest.raises(ValueError):
        correction_sign(1, 0)
    with pytest.raises(ValueError):
        correction_sign(4, 1)


@pytest.mark.parametrize("i,j", list(itertools.product(range(4), (1, 2, 3))))
def test_correction_sign_matches_conjugation(i, j):
    tau = correction(i)
    conj = tau @ pauli(j) @ tau.conj().T
    np.testing.assert_allclose(conj, correction_sign(i, j) * pauli(j), atol=1e-15)


def test_transform_direction_examples():
    n = np.array([0.6, 0.0, 0.8])
    np.testing.assert_allclose(transform_direction(n, 0), n)
    np.testing.assert_allclose(transform_direction([1, 0, 0], 3), [-1, 0, 0])
    s = 1 / np.sqrt(3)
    np.testing.assert_allclose(transform_direction([s, s, s], 1), [s, -s, -s])
    with pytest.raises(ValueError):
        transform_direction([1, 1, 0], 0)


unit = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-2)


@given(unit, st.integers(0, 3))
def test_transform_direction_consistent_with_sign(v, i):
    n = np.asarray(v) / np.linalg.norm(v)
    b = transform_direction(n, i)
    assert np.linalg.norm(b) == pytest.approx(1.0, abs=1e-12)
    for j in (1, 2, 3):
        assert b[j - 1] == correction_sign(i, j) * n[j - 1]
    # the rotated observable is tau (n.s) tau^+
    tau = correction(i)
    ns = sum(n[k] * pauli(k + 1) for k in range(3))
    bs = sum(b[k] * pauli(k + 1) for k in range(3))
    np.testing.assert_allclose(tau @ ns @ tau.conj().T, bs, atol=1e-12)


@given(unit.filter(lambda v: min(abs(x) for x in v) > 1e-2))
def test_fixed_direction_is_informationally_complete(v):
    n = np.asarray(v) / np.linalg.norm(v)
    ns = sum(n[k] * pauli(k + 1) for k in range(3))
    ops = [correction(i) @ ns @ correction(i).conj().T for i in range(4)]
    # coordinates in the traceless Pauli basis
    coords = np.array([[np.trace(op @ pauli(k)).real / 2 for k in (1, 2, 3)] for op in ops])
    assert np.linalg.matrix_rank(coords, tol=1e-9) == 3


def test_unscramble_examples():
    table = CountsTable({
        ("D", 1, 0): (7, 3),
        ("D", 1, 3): (7, 3),
        ("D", 3, 3): (7, 3),
        ("D", 2, 3): (7, 3),
    })
    out = unscramble(table)
    assert out.corrected
    assert out.get("D", 1, 0) == (7, 3)
    assert out.get("D", 1, 3) == (3, 7)
    assert out.get("D", 2, 3) == (3, 7)
    assert out.get("D", 3, 3) == (7, 3)


def test_unscramble_rejects_unresolved():
    with pytest.raises(ValueError):
        unscramble(CountsTable({("H", 1, UNRESOLVED): (1, 1)}))


def test_unscramble_is_an_involution_and_conserves_counts():
    cfg = ExperimentConfig(SourceModel.published(), BellAnalyzerModel(0.89, (0, 1, 2, 3)), trials_per_setting=300)
    table = simulate_counts(cfg)
    once = unscramble(table)
    for key, (a, b) in table.cells.items():
        assert sum(once.cells[key]) == a + b
    twice = unscramble(once)
    assert twice.cells == table.cells
    assert twice.corrected == table.corrected


def test_corrected_expectations_need_corrected_table():
    table = CountsTable({("H", j, 0): (1, 0) for j in (1, 2, 3)})
    with pytest.raises(ValueError):
        corrected_expectations(table, "H")


def test_missing_basis_reported_as_none():
    table = unscramble(CountsTable({("H", 3, 0): (5, 0)}))
    assert corrected_expectations(table, "H") == (None, None, 1.0)


@pytest.mark.parametrize("label,expected", [("H", (0, 0, 1)), ("R", (0, 1, 0))])
def test_noiseless_simulated_eigenstates(label, expected):
    cfg = ExperimentConfig(SourceModel.ideal(), BellAnalyzerModel(1.0), (label,), 60_000, seed=2)
    table = simulate_counts(cfg).select(bells=(0, 3))
    r = corrected_expectations(unscramble(table), label)
    # 10k events per basis: 5 sigma of a balanced binomial is 0.025
    np.testing.assert_allclose(r, expected, atol=0.025)


def test_exact_statistics_match_hand_branches(rng):
    for _ in range(10):
        psi = random_pure_state(rng)
        stats = exact_statistics(FULL, psi)
        hand = branch_table_by_hand(psi)
        for (i, j, beta), p in hand.items():
            assert stats.p(i, j, beta) == pytest.approx(p, abs=1e-12)


def test_unscrambled_exact_statistics_recover_state(rng):
    for _ in range(20):
        psi = random_pure_state(rng)
        table = exact_statistics(FULL, psi).as_counts()
        r = corrected_expectations(unscramble(table), "custom")
        oracle = [np.vdot(psi, pauli(j) @ psi).real for j in (1, 2, 3)]
        np.testing.assert_allclose(r, oracle, atol=1e-9)
