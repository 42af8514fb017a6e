"""Count tables keyed by (prepared state, Pauli basis, Bell outcome)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .qcore import CANONICAL_LABELS

UNRESOLVED = "U"
BASES = (1, 2, 3)
COUNTS_SCHEMA = "antetomo.counts/1"


def _state_key(label):
    try:
        return (0, CANONICAL_LABELS.index(label), "")
    except ValueError:
        return (1, 0, str(label))


def _bell_key(bell):
    return 4 if bell == UNRESOLVED else int(bell)


def _check_bell(bell):
    if bell == UNRESOLVED:
        return bell
    if isinstance(bell, bool) or not isinstance(bell, int) or not 0 <= bell <= 3:
        raise ValueError(f"Bell outcome must be 0..3 or {UNRESOLVED!r}, got {bell!r}")
    return bell


def _as_number(x):
    # integral values stay integers so that JSON output is stable
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


@dataclass(frozen=True)
class CountsTable:
    """Map ``(state, basis, bell) -> (n_plus, n_minus)``.

    Counts are normally integers; floats are allowed so that exact outcome
    probabilities can be pushed through the same post-processing.
    """

    cells: dict = field(default_factory=dict)
    corrected: bool = False

    def __post_init__(self):
        for (state, basis, bell), (n_plus, n_minus) in self.cells.items():
            if basis not in BASES:
                raise ValueError(f"basis must be one of {BASES}, got {basis!r}")
            _check_bell(bell)
            if n_plus < 0 or n_minus < 0:
                raise ValueError(f"negative count in cell {(state, basis, bell)}")

    def keys(self):
        return sorted(self.cells, key=lambda k: (_state_key(k[0]), k[1], _bell_key(k[2])))

    def get(self, state, basis, bell):
        return self.cells.get((state, basis, bell), (0, 0))

    def states(self):
        return sorted({k[0] for k in self.cells}, key=_state_key)

    def bells(self):
        return sorted({k[2] for k in self.cells}, key=_bell_key)

    def total(self):
        return sum(a + b for a, b in self.cells.values())

    def select(self, bells=None, states=None):
        """Sub-table restricted to the given Bell outcomes and/or states."""
        keep = {}
        for (s, j, b), v in self.cells.items():
            if bells is not None and b not in bells:
                continue
            if states is not None and s not in states:
                continue
            keep[(s, j, b)] = v
        return CountsTable(keep, corrected=self.corrected)

    def unresolved_fraction(self):
        tot = self.total()
        if tot == 0:
            return 0.0
        unres = sum(n_plus + n_minus for (_, _, bell), (n_plus, n_minus) in self.cells.items()
                    if bell == UNRESOLVED)
        return unres / tot

    def basis_counts(self, state, bells=None):
        """Pool (n_plus, n_minus) over Bell outcomes, per basis, for one state."""
        out = {}
        for j in BASES:
            n_plus = n_minus = 0
            for (s, jj, b), (a, c) in self.cells.items():
                if s != state or jj != j:
                    continue
                if bells is not None and b not in bells:
                    continue
                n_plus += a
                n_minus += c
            out[j] = (n_plus, n_minus)
        return out

    def to_rows(self):
        rows = []
        for state, basis, bell in self.keys():
            n_plus, n_minus = self.cells[(state, basis, bell)]
            rows.append({
                "state": state,
                "basis": basis,
                "bell": bell,
                "n_plus": _as_number(n_plus),
                "n_minus": _as_number(n_minus),
            })
        return rows

    def to_dict(self):
        return {"schema": COUNTS_SCHEMA, "corrected": self.corrected, "rows": self.to_rows()}

    @classmethod
    def from_rows(cls, rows, corrected=False):
        cells = {}
        for row in rows:
            bell = row["bell"]
            if bell != UNRESOLVED:
                bell = int(bell)
            key = (row["state"], int(row["basis"]), bell)
            if key in cells:
                raise ValueError(f"duplicate counts row {key}")
            cells[key] = (row["n_plus"], row["n_minus"])
        return cls(cells, corrected=corrected)

    @classmethod
    def from_dict(cls, data):
        # a bare list of rows is accepted as an uncorrected table
        if isinstance(data, list):
            return cls.from_rows(data)
        schema = data.get("schema", COUNTS_SCHEMA)
        if schema != COUNTS_SCHEMA:
            raise ValueError(f"unsupported counts schema {schema!r}")
        return cls.from_rows(data["rows"], corrected=bool(data.get("corrected", False)))

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
