"""Single-qubit maximum-likelihood tomography from Pauli-basis counts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .counts import BASES
from .qcore import fidelity_pure, pauli
from .simproto import STAGE_STATE_BOOTSTRAP, derive_rng, pauli_projector

PROB_FLOOR = 1e-12
STEP_TOL = 1e-10
MAX_ITER = 10_000
# absolute slack on the per-event log-likelihood when comparing steps
LL_ROUNDOFF = 1e-14

# rows ordered (1,+), (1,-), (2,+), (2,-), (3,+), (3,-)
PROJECTORS = np.array([pauli_projector(j, beta) for j in BASES for beta in (1, -1)])


class MissingBasisError(ValueError):
    """A Pauli basis has no recorded events."""


@dataclass
class TomographyResult:
    rho_est: np.ndarray
    iterations: int
    log_likelihood: float
    converged: bool
    fidelity: float | None = None
    fidelity_std: float | None = None
    history: list = field(default_factory=list, repr=False)


def counts_vector(counts):
    """Flatten ``{j: (n_plus, n_minus)}`` (or a 3x2 array) into the projector order."""
    if isinstance(counts, dict):
        missing = [j for j in BASES if j not in counts]
        if missing:
            raise MissingBasisError(f"no data for basis {missing}")
        arr = np.array([counts[j] for j in BASES], dtype=float)
    else:
        arr = np.asarray(counts, dtype=float)
        if arr.shape == (6,):
            arr = arr.reshape(3, 2)
    if arr.shape != (3, 2):
        raise ValueError(f"expected counts for 3 bases x 2 outcomes, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ValueError("negative counts")
    per_basis = arr.sum(axis=1)
    if np.all(per_basis == 0):
        raise ValueError("all counts are zero")
    if np.any(per_basis == 0):
        raise MissingBasisError(f"no data for basis {[j for j, n in zip(BASES, per_basis) if n == 0]}")
    return arr.reshape(6)


def linear_inversion(expectations):
    """rho = (1 + sum_j <s_j> s_j) / 2; not forced to be positive."""
    r = np.asarray(expectations, dtype=float).reshape(-1)
    if r.size != 3:
        raise ValueError("need three Pauli expectation values")
    if np.any(np.abs(r) > 1.0 + 1e-12):
        raise ValueError("expectation values must lie in [-1, 1]")
    return 0.5 * (pauli(0) + sum(r[k] * pauli(k + 1) for k in range(3)))


def _probs(rho):
    p = np.einsum("kij,ji->k", PROJECTORS, rho).real
    return np.maximum(p, PROB_FLOOR)


def log_likelihood(rho, counts):
    n = counts_vector(counts)
    return float(np.dot(n, np.log(_probs(rho))))


def r_operator(rho, freqs):
    return np.tensordot(freqs / _probs(rho), PROJECTORS, axes=1)


def fixed_point_residual(rho, counts):
    """Max-entry deviation of R(rho) rho R(rho) from rho, with R scaled to unit data weight."""
    n = counts_vector(counts)
    r = r_operator(rho, n / n.sum())
    return float(np.max(np.abs(r @ rho @ r - rho)))


def _mean_ll(rho, freqs):
    return float(np.dot(freqs, np.log(_probs(rho))))


def _normalized(m):
    m = 0.5 * (m + m.conj().T)
    return m / np.trace(m).real


def _step_norm(a, b):
    return float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def mle_reconstruct(counts, target=None, max_iter=MAX_ITER, tol=STEP_TOL):
    """Maximum-likelihood single-qubit state from six Pauli-projector counts.

    Iterates rho -> R rho R / Tr(R rho R) from the maximally mixed state with
    R = sum_k (f_k / p_k) Pi_k. When a plain step would lower the likelihood a
    diluted step (1 + eps R) rho (1 + eps R) is used instead, halving eps
    until the likelihood does not decrease. Stops when the trace-norm change
    falls below ``tol`` or after ``max_iter`` iterations.

    ``history`` holds the mean log-likelihood per event after every accepted
    step; it is non-decreasing up to ``LL_ROUNDOFF``.
    """
    n = counts_vector(counts)
    total = n.sum()
    freqs = n / total
    rho = 0.5 * np.eye(2, dtype=complex)
    ll = _mean_ll(rho, freqs)
    history = [ll]
    converged = False
    it = 0
    eye = np.eye(2)
    while it < max_iter:
        it += 1
        r = r_operator(rho, freqs)
        new = _normalized(r @ rho @ r)
        new_ll = _mean_ll(new, freqs)
        eps = 0.5
        while new_ll < ll - LL_ROUNDOFF and eps > 1e-8:
            g = eye + eps * r
            new = _normalized(g @ rho @ g)
            new_ll = _mean_ll(new, freqs)
            eps *= 0.5
        if new_ll < ll - LL_ROUNDOFF:
            # no ascent direction left at working precision
            it -= 1
            converged = True
            break
        step = _step_norm(new, rho)
        rho = new
        ll = new_ll
        history.append(ll)
        if step < tol:
            converged = True
            break

    result = TomographyResult(rho, it, ll * total, converged, history=history)
    if target is not None:
        result.fidelity = fidelity_pure(rho, target)
    return result


def poisson_resample(counts, rng):
    """Draw every cell from a Poisson law whose mean is the observed count."""
    n = counts_vector(counts).reshape(3, 2)
    while True:
        draw = rng.poisson(n)
        if np.all(draw.sum(axis=1) > 0):
            return draw


def bootstrap_fidelity_std(counts, target, n_resamples=100, seed=0, key=()):
    """Sample standard deviation of the fidelity over Poisson-resampled data.

    Resample r uses the generator ``derive_rng(seed, STAGE_STATE_BOOTSTRAP, *key, r)``.
    """
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    fids = np.empty(n_resamples)
    for r in range(n_resamples):
        rng = derive_rng(seed, STAGE_STATE_BOOTSTRAP, *key, r)
        res = mle_reconstruct(poisson_resample(counts, rng))
        fids[r] = fidelity_pure(res.rho_est, target)
    return float(np.std(fids, ddof=1))
