"""Process tomography of a single-qubit channel.

The channel is held as a Choi-type operator S on H (input) (x) K (output),

    rho_out = Tr_H[ S (rho_in^T (x) 1_K) ],

normalised so that the identity channel has S = sum_ij |ii><jj| (trace 2)
and Tr_K S = 1_H for trace-preserving maps. The process matrix chi in the
{1, s1, s2, s3} operator basis follows from a fixed basis change.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .counts import BASES
from .fixtures import U1, U2
from .qcore import canonical_state, pauli, projector
from .simproto import STAGE_PROCESS_BOOTSTRAP, derive_rng, pauli_projector

PROB_FLOOR = 1e-12
STEP_TOL = 1e-10
MAX_ITER = 10_000
LL_ROUNDOFF = 1e-14
# resample fits only feed a spread estimate; boundary fits converge slowly
BOOTSTRAP_TOL = 1e-7

_BASIS_CHANGE = U1 @ U2
_OUT_PROJECTORS = np.array([pauli_projector(j, beta) for j in BASES for beta in (1, -1)])


def chi_from_s(s):
    """chi = U2^+ U1^+ S U1 U2."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (4, 4):
        raise ValueError(f"Choi operator must be 4x4, got {s.shape}")
    return _BASIS_CHANGE.conj().T @ s @ _BASIS_CHANGE


def s_from_chi(chi):
    """Inverse of ``chi_from_s``; U1 U2 is sqrt(1/2) times a unitary."""
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (4, 4):
        raise ValueError(f"chi matrix must be 4x4, got {chi.shape}")
    return 4.0 * _BASIS_CHANGE @ chi @ _BASIS_CHANGE.conj().T


def choi_from_unitary(u):
    """S = |v><v| with v = sum_i |i>_H (x) U|i>_K."""
    u = np.asarray(u, dtype=complex)
    v = u.T.reshape(-1)
    return np.outer(v, v.conj())


def apply_channel(s, rho_in):
    s = np.asarray(s, dtype=complex)
    rho_in = np.asarray(rho_in, dtype=complex)
    if s.shape != (4, 4) or rho_in.shape != (2, 2):
        raise ValueError("apply_channel needs a 4x4 Choi operator and a 2x2 state")
    m = (s @ np.kron(rho_in.T, np.eye(2))).reshape(2, 2, 2, 2)
    return np.einsum("hkhl->kl", m)


def chi_action(chi, rho_in):
    """sum_mn chi_mn s_m rho s_n."""
    chi = np.asarray(chi, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for m in range(4):
        for n in range(4):
            out += chi[m, n] * pauli(m) @ rho_in @ pauli(n)
    return out


def output_trace(s):
    """Tr_K S, which equals 1_H for a trace-preserving channel."""
    return np.einsum("hkgk->hg", np.asarray(s, dtype=complex).reshape(2, 2, 2, 2))


def process_fidelity(chi, ideal):
    """Tr(chi_ideal chi) for a rank-one, unit-trace ideal process matrix."""
    ideal = np.asarray(ideal, dtype=complex)
    if np.max(np.abs(ideal - ideal.conj().T)) > 1e-10:
        raise ValueError("ideal process matrix must be Hermitian")
    w = np.linalg.eigvalsh(ideal)
    if abs(w[-1] - 1.0) > 1e-10 or np.max(np.abs(w[:-1])) > 1e-10:
        raise ValueError("ideal process matrix must be a rank-one projector")
    return float(np.trace(ideal @ np.asarray(chi, dtype=complex)).real)


def ideal_chi(unitary):
    return chi_from_s(choi_from_unitary(unitary))


@dataclass
class ProcessResult:
    s: np.ndarray
    chi: np.ndarray
    iterations: int
    log_likelihood: float
    converged: bool
    history: list = field(default_factory=list, repr=False)

    @property
    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.s).min())


def _input_matrix(state):
    if isinstance(state, str):
        state = canonical_state(state)
    a = np.asarray(state, dtype=complex)
    return projector(a) if a.ndim == 1 else a


def _as_counts_array(counts, m):
    if isinstance(counts, np.ndarray) or (isinstance(counts, (list, tuple)) and counts and
                                          not isinstance(counts[0], dict)):
        arr = np.asarray(counts, dtype=float)
    else:
        arr = np.array([[c[j] for j in BASES] for c in counts], dtype=float)
    if arr.shape == (m, 6):
        arr = arr.reshape(m, 3, 2)
    if arr.shape != (m, 3, 2):
        raise ValueError(f"expected counts of shape ({m}, 3, 2), got {arr.shape}")
    if np.any(arr < 0):
        raise ValueError("negative counts")
    if np.any(arr.sum(axis=2) == 0):
        raise ValueError("every input state needs events in every basis")
    return arr


def measurement_operators(inputs):
    """A[m, k] = rho_m^T (x) Pi_k for all inputs and the six Pauli projectors."""
    rhos = [_input_matrix(s) for s in inputs]
    vecs = np.array([r.reshape(-1) for r in rhos])
    if np.linalg.matrix_rank(vecs, tol=1e-9) < 4:
        raise ValueError("input states must span the 2x2 operator space (4 independent states)")
    return np.array([[np.kron(r.T, p) for p in _OUT_PROJECTORS] for r in rhos])


def forward_probabilities(s, inputs):
    """Outcome probabilities of shape (m, 3, 2) predicted by S, normalised per basis."""
    ops = measurement_operators(inputs)
    p = np.einsum("mkab,ba->mk", ops, np.asarray(s, dtype=complex)).real
    p = np.clip(p, 0.0, None).reshape(len(inputs), 3, 2)
    return p / p.sum(axis=2, keepdims=True)


def _inv_sqrt_psd(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.maximum(w, 1e-300)
    return (v / np.sqrt(w)) @ v.conj().T


def _tp_normalize(x):
    """(L (x) 1) X (L (x) 1) with L = (Tr_K X)^(-1/2), so the result has Tr_K = 1_H."""
    lam = _inv_sqrt_psd(output_trace(x))
    out = np.einsum("ab,bkcl,cd->akdl", lam, x.reshape(2, 2, 2, 2), lam).reshape(4, 4)
    return 0.5 * (out + out.conj().T)


def mle_process(inputs, counts, max_iter=MAX_ITER, tol=STEP_TOL):
    """Maximum-likelihood trace-preserving Choi operator.

    ``inputs`` are the prepared single-qubit states (labels, kets or density
    matrices); ``counts[m]`` holds (n_plus, n_minus) for bases 1..3 of input
    m, as a mapping ``{j: (n_plus, n_minus)}`` or an array row.

    Each iteration applies S -> L K S K L with K = sum (f/p) rho^T (x) Pi and
    L restoring Tr_K S = 1_H. A step that lowers the likelihood is replaced
    by the diluted form with (1 + eps K) in place of K.
    """
    ops = measurement_operators(inputs)
    m = len(inputs)
    n = _as_counts_array(counts, m).reshape(m * 6)
    ops = ops.reshape(m * 6, 4, 4)
    flat = ops.reshape(m * 6, 16)
    # probabilities are Tr(A S) = sum_ab A_ab S_ba
    flat_t = ops.transpose(0, 2, 1).reshape(m * 6, 16)
    # weight so that each (input, basis) group carries unit frequency on average
    freqs = n / n.sum() * (3 * m)

    def probs(s):
        return np.maximum((flat_t @ s.reshape(16)).real, PROB_FLOOR)

    def mean_ll(s):
        return float(np.dot(freqs, np.log(probs(s)))) / (3 * m)

    s = 0.5 * np.eye(4, dtype=complex)
    ll = mean_ll(s)
    history = [ll]
    converged = False
    it = 0
    eye = np.eye(4)
    while it < max_iter:
        it += 1
        k = ((freqs / probs(s)) @ flat).reshape(4, 4)
        new = _tp_normalize(k @ s @ k)
        new_ll = mean_ll(new)
        eps = 0.5
        while new_ll < ll - LL_ROUNDOFF and eps > 1e-8:
            g = eye + eps * k
            new = _tp_normalize(g @ s @ g)
            new_ll = mean_ll(new)
            eps *= 0.5
        if new_ll < ll - LL_ROUNDOFF:
            it -= 1
            converged = True
            break
        step = float(np.abs(np.linalg.eigvalsh(new - s)).sum())
        s = new
        ll = new_ll
        history.append(ll)
        if step < tol:
            converged = True
            break
    return ProcessResult(s, chi_from_s(s), it, ll * n.sum(), converged, history=history)


def poisson_resample(counts, rng):
    n = np.asarray(counts, dtype=float)
    while True:
        draw = rng.poisson(n)
        if np.all(draw.sum(axis=-1) > 0):
            return draw


def bootstrap_process_std(inputs, counts, ideal, n_resamples=100, seed=0, key=()):
    """Standard deviation of the process fidelity over Poisson-resampled counts.

    Resample r draws from ``derive_rng(seed, STAGE_PROCESS_BOOTSTRAP, *key, r)``.
    """
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    arr = _as_counts_array(counts, len(inputs))
    fids = np.empty(n_resamples)
    for r in range(n_resamples):
        rng = derive_rng(seed, STAGE_PROCESS_BOOTSTRAP, *key, r)
        res = mle_process(inputs, poisson_resample(arr, rng), tol=BOOTSTRAP_TOL)
        fids[r] = process_fidelity(res.chi, ideal)
    return float(np.std(fids, ddof=1))


def group_counts(table, labels, bell):
    """Counts array (m, 3, 2) for one Bell outcome from a CountsTable, in ``labels`` order."""
    return np.array([[table.get(label, j, bell) for j in BASES] for label in labels], dtype=float)
