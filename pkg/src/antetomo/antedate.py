"""Post-processing of early Pauli records once Bell outcomes are known.

A branch with Bell outcome i conjugates the intended observable by tau_i.
For Pauli observables this only flips eigenvalue signs, so records are
repaired by swapping the + and - counts of the affected cells.
"""

from __future__ import annotations

import numpy as np

from .counts import BASES, UNRESOLVED, CountsTable
from .qcore import _check_index


def correction_sign(i, j):
    """Sign picked up by a sigma_j result in Bell branch i: +1 iff i == j or i == 0."""
    i = _check_index(i, what="Bell outcome")
    j = _check_index(j, what="Pauli basis")
    if j == 0:
        raise ValueError("the identity is not a tomographic basis")
    return 1 if i in (0, j) else -1


def transform_direction(n, i):
    """Measurement direction actually applied to the prepared state in branch i."""
    n = np.asarray(n, dtype=float).reshape(-1)
    if n.size != 3:
        raise ValueError("direction must be a 3-vector")
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("direction must have unit norm")
    signs = np.array([correction_sign(i, j) for j in BASES], dtype=float)
    return signs * n


def unscramble(counts):
    """Swap (n_plus, n_minus) in every cell whose correction sign is -1.

    The result is flagged ``corrected``; applying it to a corrected table
    undoes the correction.
    """
    cells = {}
    for (state, j, bell), (n_plus, n_minus) in counts.cells.items():
        if bell == UNRESOLVED:
            raise ValueError("unresolved events cannot be unscrambled; drop them first")
        if correction_sign(bell, j) == 1:
            cells[(state, j, bell)] = (n_plus, n_minus)
        else:
            cells[(state, j, bell)] = (n_minus, n_plus)
    return CountsTable(cells, corrected=not counts.corrected)


def corrected_expectations(corrected, state):
    """(<s1>, <s2>, <s3>) of the prepared state from pooled corrected counts.

    A basis without any events yields ``None`` for that component.
    """
    if not corrected.corrected:
        raise ValueError("expectations need an unscrambled table")
    pooled = corrected.basis_counts(state)
    out = []
    for j in BASES:
        n_plus, n_minus = pooled[j]
        tot = n_plus + n_minus
        out.append(None if tot == 0 else (n_plus - n_minus) / tot)
    return tuple(out)
