import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antetomo import fixtures
from antetomo.counts import BASES
from antetomo.qcore import CANONICAL_LABELS, canonical_state, correction, fidelity_pure, pauli, projector
from antetomo.proctomo import (
    apply_channel,
    bootstrap_process_std,
    chi_action,
    chi_from_s,
    choi_from_unitary,
    forward_probabilities,
    group_counts,
    ideal_chi,
    mle_process,
    output_trace,
    process_fidelity,
    s_from_chi,
)
from antetomo.simproto import BellAnalyzerModel, ExperimentConfig, SourceModel, simulate_counts

S_IDENTITY = np.outer([1, 0, 0, 1], [1, 0, 0, 1]).astype(complex)
INPUTS = CANONICAL_LABELS


def channel_by_hand(s, rho):
    """rho_out[k, l] = sum_{h, g} S[(h,k), (g,l)] rho^T[g, h]."""
    out = np.zeros((2, 2), dtype=complex)
    for k in range(2):
        for l in range(2):
            for h in range(2):
                for g in range(2):
                    out[k, l] += s[2 * h + k, 2 * g + l] * rho[h, g]
    return out


def counts_from(s, scale=1e6):
    return np.round(forward_probabilities(s, INPUTS) * scale)


def random_choi(seed):
    g = np.random.default_rng(seed)
    a = g.normal(size=(4, 4)) + 1j * g.normal(size=(4, 4))
    return a @ a.conj().T


def test_identity_choi_gives_chi_00():
    chi = chi_from_s(S_IDENTITY)
    np.testing.assert_allclose(chi, fixtures.CHI_PLUS_IDEAL, atol=1e-12)
    np.testing.assert_allclose(choi_from_unitary(np.eye(2)), S_IDENTITY)


def test_sigma3_choi_gives_chi_33():
    s = choi_from_unitary(pauli(3))
    np.testing.assert_allclose(chi_from_s(s), fixtures.CHI_MINUS_IDEAL, atol=1e-12)


@pytest.mark.parametrize("i", range(4))
def test_correction_unitaries_are_rank_one(i):
    chi = ideal_chi(correction(i))
    assert np.trace(chi).real == pytest.approx(1.0, abs=1e-12)
    assert abs(chi[i, i]) == pytest.approx(1.0, abs=1e-12)
    assert process_fidelity(chi, chi) == pytest.approx(1.0, abs=1e-12)


def test_round_trip(rng):
    for _ in range(5):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        np.testing.assert_allclose(s_from_chi(chi_from_s(a)), a, atol=1e-12)
        np.testing.assert_allclose(chi_from_s(s_from_chi(a)), a, atol=1e-12)


def test_chi_from_s_is_linear(rng):
    a, b = random_choi(1), random_choi(2)
    np.testing.assert_allclose(chi_from_s(2 * a - 3j * b), 2 * chi_from_s(a) - 3j * chi_from_s(b), atol=1e-12)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.sampled_from(CANONICAL_LABELS))
def test_choi_and_chi_actions_agree(seed, label):
    s = random_choi(seed)
    rho = projector(canonical_state(label))
    by_hand = channel_by_hand(s, rho)
    np.testing.assert_allclose(apply_channel(s, rho), by_hand, atol=1e-10)
    np.testing.assert_allclose(chi_action(chi_from_s(s), rho), by_hand, atol=1e-10)


def test_channel_examples():
    d = projector(canonical_state("D"))
    np.testing.assert_allclose(apply_channel(S_IDENTITY, d), d, atol=1e-15)
    out = apply_channel(choi_from_unitary(pauli(3)), d)
    np.testing.assert_allclose(out, projector(canonical_state("A")), atol=1e-15)
    np.testing.assert_allclose(output_trace(S_IDENTITY), np.eye(2))


def test_printed_process_acts_on_diagonal_input():
    s = s_from_chi(fixtures.CHI_PLUS_MLE)
    d = projector(canonical_state("D"))
    out = apply_channel(s, d)
    np.testing.assert_allclose(out, chi_action(fixtures.CHI_PLUS_MLE, d), atol=1e-12)
    # the two routes agree exactly; the value itself sits a little under 0.88
    assert fidelity_pure(out, canonical_state("D")) == pytest.approx(0.88, abs=0.04)


def test_printed_process_fidelities():
    assert process_fidelity(fixtures.CHI_PLUS_MLE, fixtures.CHI_PLUS_IDEAL) == pytest.approx(0.84, abs=0.005)
    assert process_fidelity(fixtures.CHI_MINUS_MLE, fixtures.CHI_MINUS_IDEAL) == pytest.approx(0.83, abs=0.005)


def test_printed_chi_are_hermitian_with_unit_trace():
    for chi in (fixtures.CHI_PLUS_MLE, fixtures.CHI_MINUS_MLE):
        np.testing.assert_allclose(chi, chi.conj().T, atol=1e-12)
        assert np.trace(chi).real == pytest.approx(1.0, abs=2e-2)
        np.testing.assert_allclose(output_trace(s_from_chi(chi)), np.eye(2), atol=2e-2)


def test_process_fidelity_rejects_mixed_ideal():
    with pytest.raises(ValueError):
        process_fidelity(fixtures.CHI_PLUS_MLE, np.eye(4) / 4)
    with pytest.raises(ValueError):
        process_fidelity(fixtures.CHI_PLUS_MLE, fixtures.CHI_PLUS_MLE)


def test_mle_recovers_identity():
    res = mle_process(INPUTS, counts_from(S_IDENTITY))
    np.testing.assert_allclose(res.s, S_IDENTITY, atol=1e-4)
    assert res.converged
    assert process_fidelity(res.chi, fixtures.CHI_PLUS_IDEAL) == pytest.approx(1.0, abs=1e-4)


def test_mle_recovers_printed_process():
    s = s_from_chi(fixtures.CHI_PLUS_MLE)
    res = mle_process(INPUTS, counts_from(s))
    np.testing.assert_allclose(res.chi, fixtures.CHI_PLUS_MLE, atol=0.01)


@pytest.mark.parametrize("i", range(4))
def test_mle_unitary_recovery_is_rank_one(i):
    res = mle_process(INPUTS, counts_from(choi_from_unitary(correction(i))))
    w = np.linalg.eigvalsh(res.chi)
    assert w[-1] == pytest.approx(1.0, abs=1e-3)
    assert np.abs(w[:-1]).max() < 1e-3


def test_mle_history_monotone_and_trace_preserving(rng):
    for seed in range(5):
        s = random_choi(seed)
        s = s / np.trace(s).real * 2
        counts = np.array([[rng.multinomial(2000, p) for p in row] for row in forward_probabilities(s, INPUTS)])
        res = mle_process(INPUTS, counts)
        assert np.diff(res.history).min() >= -1e-14
        assert res.min_eigenvalue >= -1e-10
        np.testing.assert_allclose(output_trace(res.s), np.eye(2), atol=2e-2)


def test_mle_needs_four_independent_inputs():
    with pytest.raises(ValueError):
        mle_process(["H", "V", "D"], np.ones((3, 3, 2)))
    with pytest.raises(ValueError):
        mle_process(["H", "V", "D", "A"], np.ones((4, 3, 2)))
    with pytest.raises(ValueError):
        mle_process(INPUTS, np.ones((5, 3, 2)))


def test_mle_on_simulated_noisy_teleportation():
    cfg = ExperimentConfig(SourceModel.published(), BellAnalyzerModel(0.89), trials_per_setting=100_000, seed=11)
    table = simulate_counts(cfg)
    res = mle_process(INPUTS, group_counts(table, INPUTS, 0))
    assert 0.78 <= process_fidelity(res.chi, fixtures.CHI_PLUS_IDEAL) <= 0.90


def test_group_counts_layout():
    cfg = ExperimentConfig(SourceModel.ideal(), BellAnalyzerModel(1.0), trials_per_setting=60, seed=1)
    table = simulate_counts(cfg)
    arr = group_counts(table, INPUTS, 3)
    assert arr.shape == (6, 3, 2)
    for m, label in enumerate(INPUTS):
        for j in BASES:
            assert tuple(arr[m, j - 1]) == table.get(label, j, 3)


def test_bootstrap_deterministic_and_scaling():
    s = s_from_chi(fixtures.CHI_PLUS_MLE)
    small = counts_from(s, 100)
    large = counts_from(s, 10_000)
    ideal = fixtures.CHI_PLUS_IDEAL
    a = bootstrap_process_std(INPUTS, small, ideal, 40, seed=2)
    assert a == bootstrap_process_std(INPUTS, small, ideal, 40, seed=2)
    assert a != bootstrap_process_std(INPUTS, small, ideal, 40, seed=3)
    b = bootstrap_process_std(INPUTS, large, ideal, 40, seed=2)
    assert 10 / 1.5 <= a / b <= 10 * 1.5


def test_bootstrap_at_table_scale():
    # ~100 events per setting gives the printed error size
    s = s_from_chi(fixtures.CHI_PLUS_MLE)
    std = bootstrap_process_std(INPUTS, counts_from(s, 100), fixtures.CHI_PLUS_IDEAL, 40, seed=4)
    assert 0.01 <= std <= 0.04
