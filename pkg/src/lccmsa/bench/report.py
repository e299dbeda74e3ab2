"""ECDF and average-runtime summaries of run records, and their CSV/JSON files."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from .runner import RunRecord, TargetSpec

RUNS_COLUMNS = ("problem", "dim", "instance_seed", "evals", "best_f", "f_opt", "termination")
ECDF_COLUMNS = ("problem_group", "dim", "log10_budget_per_dim", "fraction")
ART_COLUMNS = ("problem", "dim", "target_exponent", "art")
REL_ERROR_FLOOR = 1e-5


def budget_grid(low_exp: int = 0, high_exp: int = 6, per_decade: int = 20) -> np.ndarray:
    """Evaluations per dimension, log-spaced with ``per_decade`` steps."""
    return 10.0 ** np.linspace(low_exp, high_exp, (high_exp - low_exp) * per_decade + 1)


def hitting_evals(record: RunRecord, precision: float) -> float:
    """First evaluation count with ``best_f <= f_opt + precision``; inf if never."""
    target = record.f_opt + precision
    for evals, f in record.history:
        if f <= target:
            return float(evals)
    return math.inf


def compute_ecdf(records, targets: TargetSpec | None = None, budgets=None) -> list[tuple[float, float]]:
    """
    Fraction of (record, target) pairs solved within ``budget * dim``
    evaluations, for each budget (evaluations per dimension).
    """
    targets = targets or TargetSpec()
    budgets = budget_grid() if budgets is None else np.asarray(budgets, dtype=float)
    records = list(records)
    if not records:
        return [(float(b), 0.0) for b in budgets]
    hits = np.array([[hitting_evals(r, 10.0 ** k) / r.dim for k in targets.exponents] for r in records])
    total = hits.size
    return [(float(b), float(np.count_nonzero(hits <= b)) / total) for b in budgets]


def compute_art(records, target: float) -> float:
    """
    Average runtime for reaching ``f_opt + target``: evaluations spent by all
    runs (full runs for failures) divided by the number of successes.
    """
    spent = 0.0
    successes = 0
    for r in records:
        hit = hitting_evals(r, target)
        if math.isfinite(hit):
            successes += 1
            spent += hit
        else:
            spent += r.evals
    return spent / successes if successes else math.inf


def error_summary(f_best: float, f_opt: float) -> dict:
    abs_err = abs(f_best - f_opt)
    rel = abs_err / abs(f_opt) if abs(f_opt) > REL_ERROR_FLOOR else None
    return {"f_opt": f_opt, "f_best": f_best, "abs_error": abs_err, "rel_error": rel}


def _grouped(records, key):
    groups = defaultdict(list)
    for r in records:
        groups[key(r)].append(r)
    return groups


def _write_csv(path: Path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def emit_report(records, out_dir, targets: TargetSpec | None = None, budgets=None) -> dict:
    """Write runs.csv, ecdf.csv, art.csv and summary.json; returns the summary."""
    targets = targets or TargetSpec()
    budgets = budget_grid() if budgets is None else np.asarray(budgets, dtype=float)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out}: {exc.strerror}") from None
    records = list(records)

    _write_csv(out / "runs.csv", RUNS_COLUMNS, (
        (r.problem, r.dim, r.instance_seed, e, repr(float(f)), repr(float(r.f_opt)), r.termination)
        for r in records for e, f in r.history))

    ecdf_rows = []
    for (group, dim), recs in _grouped(records, lambda r: (r.group, r.dim)).items():
        for b, frac in compute_ecdf(recs, targets, budgets):
            ecdf_rows.append((group, dim, repr(float(np.log10(b))), repr(frac)))
    _write_csv(out / "ecdf.csv", ECDF_COLUMNS, ecdf_rows)

    art_rows = []
    for (problem, dim), recs in _grouped(records, lambda r: (r.problem, r.dim)).items():
        for k in targets.exponents:
            art_rows.append((problem, dim, repr(float(k)), repr(compute_art(recs, 10.0 ** k))))
    _write_csv(out / "art.csv", ART_COLUMNS, art_rows)

    summary = {"problems": []}
    for (problem, dim), recs in _grouped(records, lambda r: (r.problem, r.dim)).items():
        best = min(recs, key=lambda r: r.best_f - r.f_opt)
        entry = {"problem": problem, "dim": dim, "runs": len(recs),
                 "reference_only": any(r.reference_only for r in recs)}
        entry.update(error_summary(best.best_f, best.f_opt))
        entry["generations"] = best.generations or None
        entry["evals"] = best.evals
        entry["violations"] = sum(r.violations for r in recs)
        summary["problems"].append(entry)
    try:
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {out / 'summary.json'}: {exc.strerror}") from None
    return summary


def read_runs(path) -> list[RunRecord]:
    """Rebuild records from a runs.csv file (rows grouped by run, file order kept)."""
    path = Path(path)
    records: dict[tuple, RunRecord] = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RUNS_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(RUNS_COLUMNS)}")
        for row in reader:
            key = (row["problem"], int(row["dim"]), int(row["instance_seed"]))
            rec = records.get(key)
            if rec is None:
                rec = records[key] = RunRecord(row["problem"], key[1], key[2], [], float(row["f_opt"]),
                                               row["termination"])
            rec.history.append((int(row["evals"]), float(row["best_f"])))
    return list(records.values())
