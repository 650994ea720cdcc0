"""CSV and plot-data persistence of sweep results."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .harness import KneePoint, SweepRow

__all__ = [
    "CSV_COLUMNS",
    "rows_to_csv",
    "emit_csv",
    "read_csv",
    "plot_series",
    "tradeoff_series",
    "emit_plot_data",
    "knee_table",
]

CSV_COLUMNS = tuple(f.name for f in dataclasses.fields(SweepRow))
_TEXT = {"sweep_param", "arch", "method", "status"}


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest round-trip form
    return str(value)


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    """Write rows to ``path``.

    The text is rendered before the file is opened, so a failed write
    raises without losing the caller's rows.
    """
    text = rows_to_csv(rows)
    Path(path).write_text(text)


def read_csv(path: str | Path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError("unexpected CSV header")
        rows = []
        for rec in reader:
            kw = {k: (v if k in _TEXT else float(v)) for k, v in rec.items()}
            rows.append(SweepRow(**kw))
    return rows


def plot_series(rows: Sequence[SweepRow]) -> dict:
    """Group rows into one x/y series per (architecture, method)."""
    series: dict[str, dict] = {}
    param = rows[0].sweep_param if rows else None
    for r in rows:
        s = series.setdefault(f"{r.arch}|{r.method}", {
            "arch": r.arch, "method": r.method, "x": [], "eta_tot_mean": [],
            "eta_tot_ci95": [], "p_total_dbw": []})
        s["x"].append(r.value)
        s["eta_tot_mean"].append(r.eta_tot_mean)
        s["eta_tot_ci95"].append(r.eta_tot_ci95)
        s["p_total_dbw"].append(r.p_total_dbw)
    return {"sweep_param": param, "series": list(series.values())}


def tradeoff_series(rows: Sequence[SweepRow], knees: Sequence[KneePoint] = ()) -> dict:
    """SE-versus-power curves of an ADC sweep, one panel per access class.

    Each curve is annotated with its bit counts; full-digital curves carry
    the square marker and hybrid ones the circle, SRF is drawn solid and DRF
    dashed.
    """
    knee = {(k.arch, k.method): k for k in knees}
    panels: dict[str, list] = {"FI": [], "FP": []}
    groups: dict[tuple[str, str], list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.arch, r.method), []).append(r)
    for (arch, method), pts in groups.items():
        pts = sorted(pts, key=lambda r: r.value)
        cls, bf, rf = arch.split("-")
        entry = {
            "arch": arch, "method": method,
            "marker": "square" if bf == "FD" else "circle",
            "line": "solid" if rf == "SRF" else "dashed",
            "n_bits": [int(r.value) for r in pts],
            "p_total_dbw": [r.p_total_dbw for r in pts],
            "eta_tot_mean": [r.eta_tot_mean for r in pts],
        }
        k = knee.get((arch, method))
        if k is not None:
            entry["knee"] = {"n_bits": k.n_bits, "se": k.se, "p_total_dbw": k.p_total_dbw,
                             "flagged": k.flagged}
        panels[cls].append(entry)
    return {"panels": panels}


def emit_plot_data(data: dict, path: str | Path) -> None:
    text = json.dumps(data, indent=2, allow_nan=True)
    Path(path).write_text(text + "\n")


def knee_table(knees: Sequence[KneePoint]) -> str:
    lines = ["class  architecture  method  n_bits  SE (bps/Hz)  P_T (dBW)  flag"]
    for k in knees:
        cls, rest = k.arch.split("-", 1)
        lines.append(f"{cls:<6} {rest:<13} {k.method:<7} {k.n_bits:>6}  {k.se:>11.2f}  "
                     f"{k.p_total_dbw:>9.2f}  {'flat' if k.flagged else ''}")
    return "\n".join(lines)
