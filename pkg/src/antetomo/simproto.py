"""Simulation of the early-measurement teleportation experiment.

Qubits are ordered (A, B, 3): A and B come from the entangled source, 3
carries the prepared state. Photon B is measured in a Pauli basis; A and 3
go to the Bell analyzer.

Loss in the delay line, finite collection efficiency and heralding only
change how many trials survive post-selection, never the conditional
statistics, so every simulated trial is a heralded coincidence.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fixtures
from .counts import BASES, UNRESOLVED, CountsTable
from .qcore import (
    CANONICAL_LABELS,
    canonical_state,
    density_matrix,
    matrix_from_json,
    matrix_to_json,
    pauli,
    projector,
    pure_state,
)

# Stage tags mixed into the master seed; see derive_rng().
STAGE_SAMPLING = 0
STAGE_STATE_BOOTSTRAP = 1
STAGE_PROCESS_BOOTSTRAP = 2

_PAIRS = ((0, 3), (1, 2))


def derive_rng(seed, stage, *keys):
    """Generator for one stage/partition, derived from the 64-bit master seed.

    The entropy is ``[seed, stage, *keys]`` fed to ``numpy.random.SeedSequence``,
    so partitions are independent and reproducible in any execution order.
    """
    return np.random.default_rng([int(seed), int(stage), *map(int, keys)])


def pauli_projector(j, beta):
    """Projector onto the beta = +/-1 eigenspace of sigma_j."""
    return 0.5 * (np.eye(2) + beta * pauli(j))


@dataclass(frozen=True)
class SourceModel:
    rho_ab: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        rho = density_matrix(self.rho_ab)
        if rho.shape != (4, 4):
            raise ValueError("source must be a two-qubit density matrix")
        object.__setattr__(self, "rho_ab", rho)

    @classmethod
    def ideal(cls):
        return cls(fixtures.ideal_source(), name="ideal")

    @classmethod
    def published(cls):
        return cls(fixtures.source_state(repair=True), name="paper_rho_mle")

    @classmethod
    def from_spec(cls, spec):
        if spec == "ideal":
            return cls.ideal()
        if spec == "paper_rho_mle":
            return cls.published()
        if isinstance(spec, dict):
            spec = spec["matrix"]
        if isinstance(spec, list):
            return cls(matrix_from_json(spec))
        raise ValueError(f"unrecognised source {spec!r}")

    def to_spec(self):
        if self.name in ("ideal", "paper_rho_mle"):
            return self.name
        return {"matrix": matrix_to_json(self.rho_ab)}


def analyzer_povm(visibility, resolvable=(0, 3)):
    """POVM of a Bell analyzer with reduced two-photon interference.

    Returns a dict mapping each resolvable outcome (and ``"U"`` when some
    outcomes are not resolvable) to a 4x4 operator on (A, 3). Coherences
    between the two components of each Bell pair are scaled by ``visibility``.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    resolvable = tuple(sorted(resolvable))
    pairs = [p for p in _PAIRS if set(p) <= set(resolvable)]
    if sorted(i for p in pairs for i in p) != list(resolvable) or not pairs:
        raise ValueError(f"resolvable outcomes must be a union of {_PAIRS}, got {resolvable}")

    ops = {}
    covered = np.zeros((4, 4), dtype=complex)
    for plus, minus in pairs:
        # basis components joined by the pair: |00>,|11> for phi, |01>,|10> for psi
        a, b = (0, 3) if plus == 0 else (1, 2)
        diag = np.zeros((4, 4), dtype=complex)
        diag[a, a] = diag[b, b] = 0.5
        coh = np.zeros((4, 4), dtype=complex)
        coh[a, b] = coh[b, a] = 0.5 * visibility
        ops[plus] = diag + coh
        ops[minus] = diag - coh
        covered[a, a] = covered[b, b] = 1.0
    if len(pairs) < len(_PAIRS):
        ops[UNRESOLVED] = np.eye(4, dtype=complex) - covered
    return ops


@dataclass(frozen=True)
class BellAnalyzerModel:
    visibility: float = 1.0
    resolvable: tuple = (0, 3)

    def __post_init__(self):
        object.__setattr__(self, "resolvable", tuple(sorted(self.resolvable)))
        analyzer_povm(self.visibility, self.resolvable)

    @property
    def bins(self):
        return self.resolvable + ((UNRESOLVED,) if len(self.resolvable) < 4 else ())

    def povm(self):
        return analyzer_povm(self.visibility, self.resolvable)


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceModel = field(default_factory=SourceModel.ideal)
    analyzer: BellAnalyzerModel = field(default_factory=BellAnalyzerModel)
    prepared_states: tuple = CANONICAL_LABELS
    trials_per_setting: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prepared_states", tuple(self.prepared_states))
        for label in self.prepared_states:
            canonical_state(label)
        if len(set(self.prepared_states)) != len(self.prepared_states):
            raise ValueError("prepared states must be distinct")
        if int(self.trials_per_setting) < 1:
            raise ValueError("trials_per_setting must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data):
        known = {"source", "visibility", "resolvable", "prepared_states", "trials_per_setting", "seed"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        analyzer = BellAnalyzerModel(
            visibility=float(data.get("visibility", 1.0)),
            resolvable=tuple(data.get("resolvable", (0, 3))),
        )
        return cls(
            source=SourceModel.from_spec(data.get("source", "ideal")),
            analyzer=analyzer,
            prepared_states=tuple(data.get("prepared_states", CANONICAL_LABELS)),
            trials_per_setting=int(data.get("trials_per_setting", 1000)),
            seed=int(data.get("seed", 0)),
        )

    def to_dict(self):
        return {
            "source": self.source.to_spec(),
            "visibility": self.analyzer.visibility,
            "resolvable": list(self.analyzer.resolvable),
            "prepared_states": list(self.prepared_states),
            "trials_per_setting": self.trials_per_setting,
            "seed": self.seed,
        }

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class TrialRecord:
    state: str
    basis: int
    result: int
    bell: object

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be in {BASES}")
        if self.result not in (-1, 1):
            raise ValueError("result must be +1 or -1")


@dataclass(frozen=True)
class ExactStatistics:
    """Outcome probabilities ``probs[bin, j-1, k]`` with k=0 for beta=+1, k=1 for beta=-1.

    For every basis j the entries sum to one.
    """

    state: str
    bins: tuple
    probs: np.ndarray

    def p(self, bell, basis, beta):
        return float(self.probs[self.bins.index(bell), basis - 1, 0 if beta == 1 else 1])

    def bell_probability(self, bell, basis=1):
        return float(self.probs[self.bins.index(bell), basis - 1].sum())

    def conditional(self, bell, basis, beta):
        return self.p(bell, basis, beta) / self.bell_probability(bell, basis)

    def as_counts(self, scale=1.0):
        """Probabilities (times ``scale``) laid out as a count table."""
        cells = {}
        for b_idx, bell in enumerate(self.bins):
            for j in BASES:
                cells[(self.state, j, bell)] = (
                    scale * float(self.probs[b_idx, j - 1, 0]),
                    scale * float(self.probs[b_idx, j - 1, 1]),
                )
        return CountsTable(cells)


def _state_vector(state):
    if isinstance(state, str):
        return state, canonical_state(state)
    return "custom", pure_state(state)


def branch_states(source, analyzer, state):
    """Unnormalised conditional state of photon B for every analyzer bin.

    Propagates ``rho_AB (x) |psi_3><psi_3|`` through the analyzer POVM on
    (A, 3) and traces out A and 3. The returned operators sum to Tr_A rho_AB.
    """
    _, psi = _state_vector(state)
    rho = np.kron(source.rho_ab, projector(psi)).reshape((2,) * 6)
    out = {}
    for bell, op in analyzer.povm().items():
        e = op.reshape(2, 2, 2, 2)
        # rho_B[b, y] = sum E[a,c,x,z] rho[x,b,z,a,y,c]
        out[bell] = np.einsum("acxz,xbzayc->by", e, rho)
    return out


def exact_statistics(config, state):
    """Exact outcome probabilities for one prepared state."""
    label, _ = _state_vector(state)
    branches = branch_states(config.source, config.analyzer, state)
    bins = config.analyzer.bins
    probs = np.empty((len(bins), 3, 2))
    for b_idx, bell in enumerate(bins):
        rho_b = branches[bell]
        for j in BASES:
            for k, beta in enumerate((1, -1)):
                probs[b_idx, j - 1, k] = np.trace(rho_b @ pauli_projector(j, beta)).real
    probs = np.clip(probs, 0.0, None)
    return ExactStatistics(label, bins, probs)


def _draw(config, k):
    """Raw draws for the k-th prepared state: basis, analyzer bin index, beta index."""
    stats = exact_statistics(config, config.prepared_states[k])
    rng = derive_rng(config.seed, STAGE_SAMPLING, k)
    n = int(config.trials_per_setting)
    basis = rng.integers(1, 4, size=n)
    u = rng.random(n)
    # per basis: cumulative distribution over flattened (bin, beta)
    flat = stats.probs.transpose(1, 0, 2).reshape(3, -1)
    cum = np.cumsum(flat / flat.sum(axis=1, keepdims=True), axis=1)
    cum[:, -1] = 1.0
    outcome = np.empty(n, dtype=np.int64)
    for j in BASES:
        sel = basis == j
        outcome[sel] = np.searchsorted(cum[j - 1], u[sel], side="right")
    outcome = np.minimum(outcome, flat.shape[1] - 1)
    return basis, outcome // 2, outcome % 2


def _counts_for(config, k):
    basis, bin_idx, beta_idx = _draw(config, k)
    bins = config.analyzer.bins
    nb = len(bins)
    flat = (basis - 1) * nb * 2 + bin_idx * 2 + beta_idx
    hist = np.bincount(flat, minlength=3 * nb * 2).reshape(3, nb, 2)
    label = config.prepared_states[k]
    return {
        (label, j, bell): (int(hist[j - 1, b, 0]), int(hist[j - 1, b, 1]))
        for j in BASES
        for b, bell in enumerate(bins)
    }


def sample_ensemble(config):
    """Monte Carlo trial records, state by state in ``prepared_states`` order."""
    records = []
    bins = config.analyzer.bins
    for k, label in enumerate(config.prepared_states):
        basis, bin_idx, beta_idx = _draw(config, k)
        records.extend(
            TrialRecord(label, int(j), 1 - 2 * int(bi), bins[int(b)])
            for j, b, bi in zip(basis, bin_idx, beta_idx)
        )
    return records


def simulate_counts(config, workers=None):
    """Aggregated counts, equal to ``aggregate(sample_ensemble(config))`` with every cell present.

    Each prepared state is an independent partition with its own derived
    generator, so running them on several workers gives identical output.
    """
    ks = range(len(config.prepared_states))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _counts_for(config, k), ks))
    else:
        parts = [_counts_for(config, k) for k in ks]
    cells = {}
    for part in parts:
        cells.update(part)
    return CountsTable(cells)


def aggregate(records, states=(), bins=()):
    """Count records per (state, basis, bell) cell.

    ``states`` x ``bins`` cells are pre-filled with zeros so that empty
    settings still appear in the output.
    """
    cells = {(s, j, b): [0, 0] for s in states for j in BASES for b in bins}
    for r in records:
        cell = cells.setdefault((r.state, r.basis, r.bell), [0, 0])
        cell[0 if r.result == 1 else 1] += 1
    return CountsTable({k: tuple(v) for k, v in cells.items()})


def marginal_b(config, state):
    """Photon-B state summed over every analyzer bin."""
    return sum(branch_states(config.source, config.analyzer, state).values())
