"""Simulation and maximum-likelihood reconstruction for antedated qubit tomography.

Pauli measurements are taken on one photon of an entangled pair before the
state they characterise is prepared; a later Bell measurement teleports the
prepared state back through a time channel, and the early records are
corrected once the Bell outcomes are known.
"""

__version__ = "0.1.0"

from .antedate import corrected_expectations, correction_sign, transform_direction, unscramble
from .counts import CountsTable
from .proctomo import (
    apply_channel,
    bootstrap_process_std,
    chi_from_s,
    mle_process,
    process_fidelity,
    s_from_chi,
)
from .qcore import (
    apply_correction,
    expectation,
    fidelity_pure,
    partial_trace,
    pauli,
    tensor,
)
from .simproto import (
    BellAnalyzerModel,
    ExperimentConfig,
    SourceModel,
    aggregate,
    analyzer_povm,
    exact_statistics,
    sample_ensemble,
    simulate_counts,
)
from .statetomo import bootstrap_fidelity_std, linear_inversion, mle_reconstruct
