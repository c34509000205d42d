"""Summary tables computed from ``runs.csv``.

All aggregates are order independent: rows are grouped and sorted before any
reduction, so a shuffled file gives the same summary.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from novabot.harness.experiment import RUNS_HEADER, fmt

GEN4_WINDOW = 4
BEST_HEADER = "method,s_thr,pop_index,best_gen4,best_overall"
CURVE_HEADER = "method,s_thr,pop_index,generation,batch_mean_rcc,batch_best_rcc,best_so_far_rcc"
STATS_HEADER = "method,s_thr,quantity,n,median,q1,q3,min,max"


class SummaryError(ValueError):
    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


@dataclass(frozen=True)
class RunRow:
    method: str
    s_thr: float | None
    pop_index: int
    generation: int
    eval_id: int
    genome: tuple
    rcc_mean: float
    behavior: tuple
    sparseness: float | None
    fitness: float

    @property
    def label(self) -> str:
        return self.method if self.s_thr is None else f"{self.method}_s{self.s_thr:g}"


def _opt_float(text):
    return None if text == "" else float(text)


def parse_runs(text: str) -> list[RunRow]:
    """Parse a runs file; row numbers in errors count the header as row 1."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SummaryError("empty file (missing header)", 1) from None
    if ",".join(header) != RUNS_HEADER:
        raise SummaryError("header does not match the runs schema", 1)
    out = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 16:
            raise SummaryError(f"expected 16 fields, found {len(row)}", rowno)
        try:
            method = row[0]
            if method not in ("ga", "hybrid"):
                raise ValueError(f"unknown method {method!r}")
            rec = RunRow(
                method=method, s_thr=_opt_float(row[1]), pop_index=int(row[2]),
                generation=int(row[3]), eval_id=int(row[4]),
                genome=tuple(float(v) for v in row[5:11]), rcc_mean=float(row[11]),
                behavior=(float(row[12]), float(row[13])), sparseness=_opt_float(row[14]),
                fitness=float(row[15]),
            )
        except ValueError as exc:
            raise SummaryError(str(exc), rowno) from None
        if not math.isfinite(rec.rcc_mean) or rec.generation < 0:
            raise SummaryError("rcc_mean must be finite and generation >= 0", rowno)
        out.append(rec)
    return out


def _method_sort_key(label_parts):
    method, s_thr = label_parts
    return (0 if method == "ga" else 1, -1.0 if s_thr is None else s_thr)


@dataclass
class Summary:
    best: list = field(default_factory=list)     # (method, s_thr, pop, best_gen4, best_overall)
    curves: list = field(default_factory=list)   # (method, s_thr, pop, gen, mean, best, so_far)
    stats: list = field(default_factory=list)    # (method, s_thr, quantity, n, med, q1, q3, lo, hi)

    @property
    def methods(self) -> list:
        seen = sorted({(b[0], b[1]) for b in self.best} | {(c[0], c[1]) for c in self.curves},
                      key=_method_sort_key)
        return seen


def quartiles(values):
    """Median and first/third quartiles with linear interpolation."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return float(med), float(q1), float(q3)


def summarize_rows(rows, window: int = GEN4_WINDOW) -> Summary:
    groups = {}
    for r in rows:
        groups.setdefault((r.method, r.s_thr, r.pop_index), []).append(r)
    s = Summary()
    for key in sorted(groups, key=lambda k: (_method_sort_key(k[:2]), k[2])):
        rs = sorted(groups[key], key=lambda r: (r.generation, r.eval_id))
        early = [r.rcc_mean for r in rs if r.generation <= window]
        best_gen4 = min(early) if early else math.nan
        s.best.append((*key, best_gen4, min(r.rcc_mean for r in rs)))
        so_far = math.inf
        for gen in sorted({r.generation for r in rs}):
            batch = [r.rcc_mean for r in rs if r.generation == gen]
            so_far = min(so_far, min(batch))
            s.curves.append((*key, gen, sum(batch) / len(batch), min(batch), so_far))
    by_method = {}
    for m, t, pop, g4, overall in s.best:
        by_method.setdefault((m, t), []).append((g4, overall))
    for mkey in sorted(by_method, key=_method_sort_key):
        vals = by_method[mkey]
        for qi, quantity in enumerate(("best_gen4", "best_overall")):
            xs = [v[qi] for v in vals if not math.isnan(v[qi])]
            if not xs:
                continue
            med, q1, q3 = quartiles(xs)
            s.stats.append((*mkey, quantity, len(xs), med, q1, q3, min(xs), max(xs)))
    return s


def summarize_text(text: str, window: int = GEN4_WINDOW) -> Summary:
    return summarize_rows(parse_runs(text), window)


def summarize(path, window: int = GEN4_WINDOW) -> Summary:
    with open(path, encoding="utf-8") as fh:
        return summarize_text(fh.read(), window)


def _lines(header, rows, int_cols):
    out = [header]
    for row in rows:
        cells = []
        for i, v in enumerate(row):
            if isinstance(v, str):
                cells.append(v)
            elif v is None:
                cells.append("")
            elif i in int_cols:
                cells.append(str(int(v)))
            else:
                cells.append(fmt(v))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def summary_files(s: Summary) -> dict:
    return {
        "summary_best.csv": _lines(BEST_HEADER, s.best, {2}),
        "summary_curves.csv": _lines(CURVE_HEADER, s.curves, {2, 3}),
        "summary_stats.csv": _lines(STATS_HEADER, s.stats, {3}),
    }


def write_summary(s: Summary, out_dir):
    for name, text in summary_files(s).items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _read_table(path, header):
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return []
    if ",".join(rows[0]) != header:
        raise SummaryError(f"{os.path.basename(path)}: unexpected header", 1)
    return [r for r in rows[1:] if r]


def read_summary(out_dir) -> Summary:
    """Inverse of :func:`write_summary` (missing files read as empty)."""
    s = Summary()
    for r in _read_table(os.path.join(out_dir, "summary_best.csv"), BEST_HEADER):
        s.best.append((r[0], _opt_float(r[1]), int(r[2]), _nan(r[3]), float(r[4])))
    for r in _read_table(os.path.join(out_dir, "summary_curves.csv"), CURVE_HEADER):
        s.curves.append((r[0], _opt_float(r[1]), int(r[2]), int(r[3]),
                         float(r[4]), float(r[5]), float(r[6])))
    for r in _read_table(os.path.join(out_dir, "summary_stats.csv"), STATS_HEADER):
        s.stats.append((r[0], _opt_float(r[1]), r[2], int(r[3]), *(float(v) for v in r[4:])))
    return s


def _nan(text):
    return math.nan if text == "" else float(text)


def method_label(method, s_thr) -> str:
    return method if s_thr is None else f"{method} s_thr={s_thr:g}"
