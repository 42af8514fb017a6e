"""Published experimental matrices, stored exactly as printed.

The printed numbers are rounded, so some of them fail strict density-matrix
checks (the two-photon source state has a ~1e-6 negative eigenvalue, one
combined-data matrix has a sign slip in its lower off-diagonal entry). The
raw arrays are kept verbatim; the accessor functions document any repair.
"""

from __future__ import annotations

import numpy as np

from .qcore import CANONICAL_LABELS, bell_state, project_psd

SOURCE_RHO_PRINTED = np.array([
    [0.486, 0.026 + 0.007j, -0.031 - 0.009j, 0.446 + 0.112j],
    [0.026 - 0.007j, 0.018, -0.001 + 0.015j, 0.035 + 0.014j],
    [-0.031 + 0.009j, -0.001 - 0.015j, 0.021, -0.020 - 0.017j],
    [0.446 - 0.112j, 0.035 - 0.014j, -0.020 + 0.017j, 0.475],
])
SOURCE_FIDELITY = (0.927, 0.001)

# state -> (rho_phi+, F, dF, rho_phi-, F(s3 rho s3), dF)
TABLE_PER_OUTCOME = {
    "H": (
        [[0.94, -0.02 + 0.06j], [-0.02 - 0.06j, 0.06]], 0.94, 0.03,
        [[0.96, 0.11 - 0.02j], [0.11 + 0.02j, 0.04]], 0.96, 0.03,
    ),
    "V": (
        [[0.06, -0.13 - 0.09j], [-0.13 + 0.09j, 0.94]], 0.94, 0.02,
        [[0.08, -0.11 - 0.00j], [-0.11 + 0.00j, 0.92]], 0.92, 0.02,
    ),
    "D": (
        [[0.40, 0.38 + 0.01j], [0.38 - 0.01j, 0.60]], 0.88, 0.03,
        [[0.40, -0.39 - 0.11j], [-0.39 + 0.11j, 0.60]], 0.89, 0.03,
    ),
    "A": (
        [[0.53, -0.37 - 0.02j], [-0.37 + 0.02j, 0.47]], 0.87, 0.03,
        [[0.52, 0.38 + 0.12j], [0.38 - 0.12j, 0.48]], 0.88, 0.03,
    ),
    "R": (
        [[0.46, -0.01 - 0.40j], [-0.01 + 0.40j, 0.54]], 0.90, 0.03,
        [[0.50, -0.14 + 0.33j], [-0.14 - 0.33j, 0.50]], 0.83, 0.02,
    ),
    "L": (
        [[0.40, -0.12 + 0.38j], [-0.12 - 0.38j, 0.60]], 0.88, 0.04,
        [[0.45, 0.10 - 0.37j], [0.10 + 0.37j, 0.55]], 0.87, 0.03,
    ),
}

# state -> (rho_combined, F, dF)
TABLE_COMBINED = {
    "H": ([[0.95, -0.06 + 0.04j], [-0.06 - 0.04j, 0.05]], 0.95, 0.02),
    "V": ([[0.07, -0.01 - 0.05j], [-0.01 + 0.05j, 0.93]], 0.93, 0.02),
    # lower off-diagonal printed as -0.39-0.06i; see combined_state()
    "D": ([[0.40, 0.39 + 0.06j], [-0.39 - 0.06j, 0.60]], 0.89, 0.02),
    "A": ([[0.52, -0.37 - 0.07j], [-0.37 + 0.07j, 0.48]], 0.87, 0.02),
    "R": ([[0.48, 0.06 - 0.37j], [0.06 + 0.37j, 0.52]], 0.87, 0.02),
    "L": ([[0.43, -0.11 + 0.38j], [-0.11 - 0.38j, 0.57]], 0.88, 0.02),
}
AVERAGE_STATE_FIDELITY = (0.90, 0.01)

U1 = np.array([
    [1, 0, 0, 0],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
], dtype=complex)

U2 = 0.5 * np.array([
    [1, 0, 0, 1],
    [0, 1, -1j, 0],
    [0, 1, 1j, 0],
    [1, 0, 0, -1],
], dtype=complex)

CHI_PLUS_IDEAL = np.diag([1, 0, 0, 0]).astype(complex)
CHI_MINUS_IDEAL = np.diag([0, 0, 0, 1]).astype(complex)

CHI_PLUS_MLE = np.array([
    [0.84, -0.01 + 0.06j, 0.00 + 0.06j, -0.01 - 0.03j],
    [-0.01 - 0.06j, 0.03, 0.02 + 0.01j, -0.01 + 0.00j],
    [0.00 - 0.06j, 0.02 - 0.01j, 0.04, -0.02 + 0.01j],
    [-0.01 + 0.03j, -0.01 - 0.00j, -0.02 - 0.01j, 0.09],
])

CHI_MINUS_MLE = np.array([
    [0.10, -0.00 + 0.01j, 0.01 + 0.07j, 0.00 + 0.12j],
    [-0.00 - 0.01j, 0.01, 0.00 - 0.00j, 0.03 + 0.01j],
    [0.01 - 0.07j, 0.00 + 0.00j, 0.05, 0.02 + 0.00j],
    [0.00 - 0.12j, 0.03 - 0.01j, 0.02 - 0.00j, 0.83],
])

PROCESS_FIDELITY = {"phi+": (0.84, 0.02), "phi-": (0.83, 0.02)}
VISIBILITY = (0.89, 0.01)


def source_state(repair=True):
    """Two-photon source matrix; with ``repair`` the tiny negative eigenvalue is clipped."""
    rho = SOURCE_RHO_PRINTED.astype(complex)
    return project_psd(rho) if repair else rho.copy()


def per_outcome_state(label, group):
    """Printed single-qubit matrix for ``group`` in {"phi+", "phi-"}."""
    row = TABLE_PER_OUTCOME[label]
    if group == "phi+":
        return np.array(row[0], dtype=complex)
    if group == "phi-":
        return np.array(row[3], dtype=complex)
    raise ValueError(f"group must be 'phi+' or 'phi-', got {group!r}")


def per_outcome_fidelity(label, group):
    row = TABLE_PER_OUTCOME[label]
    return (row[1], row[2]) if group == "phi+" else (row[4], row[5])


def hermitize_upper(matrix):
    """Rebuild the lower triangle as the conjugate of the upper one."""
    m = np.array(matrix, dtype=complex)
    upper = np.triu(m, 1)
    return upper + upper.conj().T + np.diag(np.diag(m).real)


def combined_state(label, raw=False):
    """Printed combined-data matrix, Hermitised from its upper triangle unless ``raw``."""
    m = np.array(TABLE_COMBINED[label][0], dtype=complex)
    return m if raw else hermitize_upper(m)


def combined_fidelity(label):
    return TABLE_COMBINED[label][1:]


def fixture_catalogue():
    """Every published matrix with a short description, in a fixed order."""
    out = [{
        "name": "source_rho",
        "description": "reconstructed two-photon source state, target phi+",
        "target": "phi+",
        "matrix": SOURCE_RHO_PRINTED,
        "fidelity": SOURCE_FIDELITY[0],
        "fidelity_std": SOURCE_FIDELITY[1],
    }]
    for label in CANONICAL_LABELS:
        for group in ("phi+", "phi-"):
            f, df = per_outcome_fidelity(label, group)
            out.append({
                "name": f"state_{label}_{group}",
                "description": f"single-qubit state for prepared {label}, Bell outcome {group}",
                "state": label,
                "bell_group": group,
                "matrix": per_outcome_state(label, group),
                "fidelity": f,
                "fidelity_std": df,
            })
    for label in CANONICAL_LABELS:
        f, df = combined_fidelity(label)
        out.append({
            "name": f"state_{label}_combined",
            "description": f"single-qubit state for prepared {label}, unscrambled combined data",
            "state": label,
            "bell_group": "combined",
            "matrix": combined_state(label, raw=True),
            "fidelity": f,
            "fidelity_std": df,
        })
    for name, m in (("U1", U1), ("U2", U2),
                    ("chi_plus_ideal", CHI_PLUS_IDEAL), ("chi_plus_mle", CHI_PLUS_MLE),
                    ("chi_minus_ideal", CHI_MINUS_IDEAL), ("chi_minus_mle", CHI_MINUS_MLE)):
        out.append({"name": name, "description": "process-tomography matrix", "matrix": m})
    return out


def ideal_source():
    phi = bell_state(0)
    return np.outer(phi, phi.conj())
