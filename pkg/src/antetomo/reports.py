"""JSON reports and CSV plot series built from reconstructions."""

from __future__ import annotations

import csv
import io

import numpy as np

from . import fixtures
from .antedate import unscramble
from .counts import UNRESOLVED
from .proctomo import (
    bootstrap_process_std,
    group_counts,
    ideal_chi,
    mle_process,
    process_fidelity,
    s_from_chi,
)
from .qcore import (
    BELL_LABELS,
    CANONICAL_LABELS,
    canonical_state,
    correction,
    fidelity_pure,
    matrix_from_json,
    matrix_to_json,
    pauli,
)
from .statetomo import MissingBasisError, bootstrap_fidelity_std, mle_reconstruct

REPORT_SCHEMA = "antetomo.report/1"
STATE_GROUPS = ("phi+", "phi-", "combined")


def group_target(label, group):
    """Pure state the reconstruction of ``group`` is compared with.

    Uncorrected phi- data describe sigma_3|phi>, which is the same as
    comparing sigma_3 rho sigma_3 with |phi>.
    """
    psi = canonical_state(label)
    return pauli(3) @ psi if group == "phi-" else psi


def _group_table(counts, group):
    if group == "phi+":
        return counts.select(bells=(0,))
    if group == "phi-":
        return counts.select(bells=(3,))
    if group == "combined":
        resolved = tuple(b for b in counts.bells() if b != UNRESOLVED)
        return unscramble(counts.select(bells=resolved))
    raise ValueError(f"group must be one of {STATE_GROUPS}, got {group!r}")


def state_report(counts, group, seed=0, resamples=100, max_iter=None):
    """Per-state maximum-likelihood reconstructions for one Bell group."""
    table = _group_table(counts, group)
    entries = []
    kwargs = {} if max_iter is None else {"max_iter": max_iter}
    for label in table.states():
        target = group_target(label, group)
        basis_counts = table.basis_counts(label)
        try:
            res = mle_reconstruct(basis_counts, target=target, **kwargs)
        except MissingBasisError as exc:
            entries.append({"state": label, "bell_group": group, "error": str(exc)})
            continue
        std = None
        if resamples:
            key = (STATE_GROUPS.index(group), CANONICAL_LABELS.index(label))
            std = bootstrap_fidelity_std(basis_counts, target, resamples, seed=seed, key=key)
        entries.append({
            "state": label,
            "bell_group": group,
            "rho": matrix_to_json(res.rho_est),
            "fidelity": res.fidelity,
            "fidelity_std": std,
            "iterations": res.iterations,
            "converged": res.converged,
        })
    return {"schema": REPORT_SCHEMA, "kind": "state", "bell_group": group, "entries": entries}


def process_report(counts, seed=0, resamples=100, max_iter=None):
    """Process reconstructions for every resolved Bell outcome present in ``counts``."""
    labels = [s for s in counts.states()]
    entries = []
    kwargs = {} if max_iter is None else {"max_iter": max_iter}
    for bell in counts.bells():
        if bell == UNRESOLVED:
            continue
        data = group_counts(counts, labels, bell)
        ideal = ideal_chi(correction(bell))
        res = mle_process(labels, data, **kwargs)
        std = None
        if resamples:
            std = bootstrap_process_std(labels, data, ideal, resamples, seed=seed, key=(bell,))
        entries.append({
            "bell_group": BELL_LABELS[bell],
            "S": matrix_to_json(res.s),
            "chi": matrix_to_json(res.chi),
            "process_fidelity": process_fidelity(res.chi, ideal),
            "fidelity_std": std,
            "iterations": res.iterations,
            "converged": res.converged,
            "min_eigenvalue": res.min_eigenvalue,
        })
    return {"schema": REPORT_SCHEMA, "kind": "process", "entries": entries}


def fixture_state_report(group):
    """State report built from the published matrices of one table column."""
    entries = []
    for label in CANONICAL_LABELS:
        if group == "combined":
            rho = fixtures.combined_state(label)
            _, std = fixtures.combined_fidelity(label)
        else:
            rho = fixtures.per_outcome_state(label, group)
            _, std = fixtures.per_outcome_fidelity(label, group)
        entries.append({
            "state": label,
            "bell_group": group,
            "rho": matrix_to_json(rho),
            "fidelity": fidelity_pure(rho, group_target(label, group)),
            "fidelity_std": std,
            "iterations": 0,
            "converged": True,
        })
    return {"schema": REPORT_SCHEMA, "kind": "state", "bell_group": group,
            "source": "published", "entries": entries}


def fixture_process_report():
    entries = []
    for group, chi, ideal in (("phi+", fixtures.CHI_PLUS_MLE, fixtures.CHI_PLUS_IDEAL),
                              ("phi-", fixtures.CHI_MINUS_MLE, fixtures.CHI_MINUS_IDEAL)):
        s = s_from_chi(chi)
        entries.append({
            "bell_group": group,
            "S": matrix_to_json(s),
            "chi": matrix_to_json(chi),
            "process_fidelity": process_fidelity(chi, ideal),
            "fidelity_std": fixtures.PROCESS_FIDELITY[group][1],
            "iterations": 0,
            "converged": True,
            "min_eigenvalue": float(np.linalg.eigvalsh(s).min()),
        })
    return {"schema": REPORT_SCHEMA, "kind": "process", "source": "published", "entries": entries}


def fixture_catalogue_json():
    out = []
    for item in fixtures.fixture_catalogue():
        item = dict(item)
        item["matrix"] = matrix_to_json(item["matrix"])
        out.append(item)
    return {"schema": "antetomo.fixtures/1", "fixtures": out}


def _state_order(entry):
    label = entry.get("state", "")
    idx = CANONICAL_LABELS.index(label) if label in CANONICAL_LABELS else len(CANONICAL_LABELS)
    group = entry.get("bell_group", "")
    gidx = STATE_GROUPS.index(group) if group in STATE_GROUPS else len(STATE_GROUPS)
    return (gidx, idx, label)


def _process_order(entry):
    group = entry["bell_group"]
    return (BELL_LABELS.index(group) if group in BELL_LABELS else 4, group)


def summarize(reports):
    """Merge reports into a summary dict and a CSV of plot series.

    Rows are ordered by group, then state label, never by input order.
    """
    if not reports:
        raise ValueError("no reports given")
    schemas = {r.get("schema") for r in reports}
    if len(schemas) != 1 or REPORT_SCHEMA not in schemas:
        raise ValueError(f"mixed or unsupported report schemas: {sorted(map(str, schemas))}")

    states = sorted((e for r in reports if r["kind"] == "state" for e in r["entries"]
                     if "error" not in e), key=_state_order)
    processes = sorted((e for r in reports if r["kind"] == "process" for e in r["entries"]),
                       key=_process_order)
    fids = [e["fidelity"] for e in states]
    summary = {
        "schema": REPORT_SCHEMA,
        "kind": "summary",
        "states": [{k: e[k] for k in ("state", "bell_group", "fidelity", "fidelity_std")} for e in states],
        "processes": [{k: e[k] for k in ("bell_group", "process_fidelity", "fidelity_std")} for e in processes],
        "average_state_fidelity": float(np.mean(fids)) if fids else None,
        "average_process_fidelity": (float(np.mean([e["process_fidelity"] for e in processes]))
                                     if processes else None),
    }

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["panel", "item", "bell_group", "row", "col", "real", "imag"])
    for e in states:
        m = matrix_from_json(e["rho"])
        for i in range(2):
            for j in range(2):
                w.writerow(["state_matrix", e["state"], e["bell_group"], i, j,
                            repr(float(m[i, j].real)), repr(float(m[i, j].imag))])
    for e in processes:
        m = matrix_from_json(e["chi"])
        for i in range(4):
            for j in range(4):
                w.writerow(["process_matrix", "chi", e["bell_group"], i, j,
                            repr(float(m[i, j].real)), repr(float(m[i, j].imag))])
    for e in states:
        w.writerow(["state_fidelity", e["state"], e["bell_group"], "", "", repr(e["fidelity"]), ""])
    for e in processes:
        w.writerow(["process_fidelity", "chi", e["bell_group"], "", "", repr(e["process_fidelity"]), ""])
    return summary, buf.getvalue()


def summary_table(summary):
    lines = [f"{'state':<6}{'group':<10}{'fidelity':>10}{'std':>8}"]
    for e in summary["states"]:
        std = "" if e["fidelity_std"] is None else f"{e['fidelity_std']:.3f}"
        lines.append(f"{e['state']:<6}{e['bell_group']:<10}{e['fidelity']:>10.3f}{std:>8}")
    for e in summary["processes"]:
        std = "" if e["fidelity_std"] is None else f"{e['fidelity_std']:.3f}"
        lines.append(f"{'chi':<6}{e['bell_group']:<10}{e['process_fidelity']:>10.3f}{std:>8}")
    if summary["average_state_fidelity"] is not None:
        lines.append(f"average state fidelity: {summary['average_state_fidelity']:.3f}")
    if summary["average_process_fidelity"] is not None:
        lines.append(f"average process fidelity: {summary['average_process_fidelity']:.3f}")
    return "\n".join(lines) + "\n"
