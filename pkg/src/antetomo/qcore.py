"""Small-matrix quantum primitives for one and two qubits.

Conventions
-----------
* Computational basis ``|0> = H``, ``|1> = V``; two-qubit ordering is
  ``|00>, |01>, |10>, |11>`` with the first factor as the most significant.
* Fidelity against a pure target is ``<phi|rho|phi>`` (no square root).
* Matrices are plain ``numpy`` complex arrays. The ``density_matrix`` and
  ``pure_state`` constructors validate and raise ``ValueError`` instead of
  silently repairing their input.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12

_SQRT_HALF = 1.0 / np.sqrt(2.0)

_PAULIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# tau_i = {1, s1, i*s2, s3}
_CORRECTIONS = (
    _PAULIS[0],
    _PAULIS[1],
    1j * _PAULIS[2],
    _PAULIS[3],
)

CANONICAL_LABELS = ("H", "V", "D", "A", "R", "L")

_CANONICAL = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": _SQRT_HALF * np.array([1, 1], dtype=complex),
    "A": _SQRT_HALF * np.array([1, -1], dtype=complex),
    "R": _SQRT_HALF * np.array([1, 1j], dtype=complex),
    "L": _SQRT_HALF * np.array([1, -1j], dtype=complex),
}

# Bell outcome index i <-> state, ordered so that branch i carries tau_i.
BELL_LABELS = ("phi+", "psi+", "psi-", "phi-")

_BELL = (
    _SQRT_HALF * np.array([1, 0, 0, 1], dtype=complex),
    _SQRT_HALF * np.array([0, 1, 1, 0], dtype=complex),
    _SQRT_HALF * np.array([0, 1, -1, 0], dtype=complex),
    _SQRT_HALF * np.array([1, 0, 0, -1], dtype=complex),
)


def _check_index(m, upper=3, what="index"):
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise TypeError(f"{what} must be an integer, got {m!r}")
    if not 0 <= m <= upper:
        raise ValueError(f"{what} must be in 0..{upper}, got {m}")
    return int(m)


def pauli(m):
    """Return sigma_m, with sigma_0 the identity."""
    return _PAULIS[_check_index(m, what="Pauli index")].copy()


def correction(i):
    """Return the branch unitary tau_i from {1, s1, i*s2, s3}."""
    return _CORRECTIONS[_check_index(i, what="correction index")].copy()


def bell_state(i):
    """Return the Bell state associated with outcome lambda_i (phi+, psi+, psi-, phi-)."""
    return _BELL[_check_index(i, what="Bell outcome")].copy()


def canonical_state(label):
    """Return one of the six polarisation states H, V, D, A, R, L."""
    try:
        return _CANONICAL[label].copy()
    except KeyError:
        raise ValueError(f"unknown state label {label!r}; expected one of {CANONICAL_LABELS}") from None


def projector(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def pure_state(amplitudes):
    """Validate a length-2 or length-4 unit vector and return it as a complex array."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if psi.size not in (2, 4):
        raise ValueError(f"pure state must have dimension 2 or 4, got {psi.size}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalised: |psi|^2 = {norm2!r}")
    return psi


def density_matrix(entries, *, tol=HERMITIAN_TOL):
    """Validate a density matrix and return it as a complex array.

    Raises ``ValueError`` if the matrix is not square of size 2 or 4, not
    Hermitian, not unit trace, or has an eigenvalue below ``-tol``.
    """
    rho = np.array(entries, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
        raise ValueError(f"density matrix must be 2x2 or 4x4, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho).min()
    if lam_min < -PSD_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def project_psd(matrix):
    """Nearest unit-trace PSD matrix obtained by clipping negative eigenvalues.

    Only meant for repairing rounded published matrices before they are used
    as simulation inputs.
    """
    h = np.asarray(matrix, dtype=complex)
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return out / np.trace(out).real


def fidelity_pure(rho, target):
    """Fidelity ``<phi|rho|phi>`` of a density matrix with a pure target state."""
    rho = np.asarray(rho, dtype=complex)
    phi = np.asarray(target, dtype=complex).reshape(-1)
    if rho.shape != (phi.size, phi.size):
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs target of length {phi.size}")
    return float(np.vdot(phi, rho @ phi).real)


def apply_correction(psi, i):
    """Return tau_i |psi>, normalised."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 2:
        raise ValueError("correction acts on a single qubit")
    out = correction(i) @ psi
    return out / np.linalg.norm(out)


def expectation(rho, m):
    """Tr(rho sigma_m) for a single-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expectation needs a 2x2 matrix, got {rho.shape}")
    return float(np.trace(rho @ pauli(m)).real)


def bloch_vector(rho):
    return np.array([expectation(rho, m) for m in (1, 2, 3)])


def tensor(a, b):
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho, keep):
    """Trace out one qubit of a two-qubit operator.

    ``keep`` is the index (0 = first factor, 1 = second) of the qubit that
    survives.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace needs a 4x4 operator, got {rho.shape}")
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    r = rho.reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    return np.einsum("jajb->ab", r)


def trace_distance(a, b):
    """Half the trace norm of ``a - b`` for Hermitian operands."""
    d = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    d = 0.5 * (d + d.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(d)).sum())


def trace_norm(a):
    return float(np.linalg.svd(np.asarray(a), compute_uv=False).sum())


def matrix_to_json(matrix):
    """Serialise a matrix as nested ``[re, im]`` pairs, row-major."""
    m = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError("matrix JSON must be nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def random_density_matrix(rng, dim=2, rank=None):
    """Hilbert-Schmidt (Ginibre) random density matrix."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng, dim=2):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
