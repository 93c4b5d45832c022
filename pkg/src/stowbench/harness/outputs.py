"""CSV emission: evaluation curves, aggregated finals, plot-ready series, comparisons.

All numbers are written with the shortest round-trip decimal representation
and '\\n' line endings, so a given record set always produces byte-identical
files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..algos.training import RunRecord
from ..errors import ConfigError
from .scenarios import scenario_label
from .stats import SIGNIFICANCE_LEVEL, aggregate, welch_t_test

KPIS = ("shifters", "optime")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _writer(handle):
    return csv.writer(handle, lineterminator="\n")


def _sorted_records(records) -> list[RunRecord]:
    return sorted(records, key=lambda r: (scenario_label(r.scenario), r.algo, r.variant, r.seed))


def run_id(record: RunRecord) -> str:
    return f"{scenario_label(record.scenario)}-{record.algo}-{record.variant}-s{record.seed}"


def write_curves_csv(records, path: Path) -> None:
    with open(path, "w", newline="") as handle:
        out = _writer(handle)
        out.writerow(["run_id", "scenario", "algo", "variant", "seed", "timestep",
                      "eval_mean_shifters", "eval_mean_optime"])
        for record in _sorted_records(records):
            label = scenario_label(record.scenario)
            rid = run_id(record)
            for point in record.curve:
                out.writerow([rid, label, record.algo, record.variant,
                              _fmt(record.seed), _fmt(point.timestep),
                              _fmt(point.mean_shifters), _fmt(point.mean_optime)])


def write_finals_csv(records, path: Path) -> None:
    rows = aggregate(records)
    with open(path, "w", newline="") as handle:
        out = _writer(handle)
        out.writerow(["scenario", "algo", "variant", "reps",
                      "mean_shifters", "std_shifters", "mean_optime", "std_optime"])
        for row in rows:
            out.writerow([row.scenario, row.algo, row.variant, _fmt(row.reps),
                          _fmt(row.mean_shifters), _fmt(row.std_shifters),
                          _fmt(row.mean_optime), _fmt(row.std_optime)])


def _curve_bands(cell_records) -> list[tuple[int, float, float, float, float]]:
    """Per-timestep (t, mean_s, std_s, mean_o, std_o) across repetitions."""
    grids = [[p.timestep for p in r.curve] for r in cell_records]
    if any(g != grids[0] for g in grids):
        raise ConfigError("repetitions disagree on evaluation timesteps")
    out = []
    for i, t in enumerate(grids[0]):
        shifters = np.asarray([r.curve[i].mean_shifters for r in cell_records])
        optimes = np.asarray([r.curve[i].mean_optime for r in cell_records])
        std_s = float(shifters.std(ddof=1)) if len(shifters) > 1 else 0.0
        std_o = float(optimes.std(ddof=1)) if len(optimes) > 1 else 0.0
        out.append((t, float(shifters.mean()), std_s, float(optimes.mean()), std_o))
    return out


def write_plotdata(records, plot_dir: Path) -> list[Path]:
    """Per (scenario, variant, KPI) long-format series: algo, timestep, mean, std."""
    plot_dir.mkdir(parents=True, exist_ok=True)
    cells: dict[tuple[str, str, str], list[RunRecord]] = {}
    for record in records:
        key = (scenario_label(record.scenario), record.variant, record.algo)
        cells.setdefault(key, []).append(record)

    files: dict[tuple[str, str, str], list[list]] = {}
    for (scenario, variant, algo) in sorted(cells):
        bands = _curve_bands(cells[(scenario, variant, algo)])
        for kpi_index, kpi in enumerate(KPIS):
            rows = files.setdefault((scenario, variant, kpi), [])
            for t, mean_s, std_s, mean_o, std_o in bands:
                mean, std = (mean_s, std_s) if kpi == "shifters" else (mean_o, std_o)
                rows.append([algo, _fmt(t), _fmt(mean), _fmt(std)])

    written = []
    for (scenario, variant, kpi), rows in sorted(files.items()):
        path = plot_dir / f"scenario{scenario}_{variant}_{kpi}.csv"
        with open(path, "w", newline="") as handle:
            out = _writer(handle)
            out.writerow(["algo", "timestep", "mean", "std"])
            out.writerows(rows)
        written.append(path)
    return written


def emit_outputs(records, out_dir: str | Path) -> dict[str, Path]:
    """Write curves.csv, finals.csv, and plotdata/*.csv under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves = out / "curves.csv"
    finals = out / "finals.csv"
    write_curves_csv(records, curves)
    write_finals_csv(records, finals)
    plots = write_plotdata(records, out / "plotdata")
    return {"curves": curves, "finals": finals, "plotdata": plots}


def compare_variants(records_a, records_b, out_file: str | Path,
                     label_a: str = "a", label_b: str = "b") -> list[dict]:
    """Per (scenario, algorithm, KPI) comparison of final KPIs with Welch tests.

    Emits one CSV row per cell with Table-style value(std) columns, the raw
    moments, the difference of means (a - b), and a significance marker at
    p < 0.05.
    """
    def finals_by_cell(records):
        cells: dict[tuple[str, str], dict[str, list[float]]] = {}
        for record in records:
            key = (scenario_label(record.scenario), record.algo)
            cell = cells.setdefault(key, {"shifters": [], "optime": []})
            cell["shifters"].append(record.final_shifters)
            cell["optime"].append(record.final_optime)
        return cells

    cells_a = finals_by_cell(records_a)
    cells_b = finals_by_cell(records_b)
    shared = sorted(set(cells_a) & set(cells_b))
    if not shared:
        raise ConfigError("the two record sets share no (scenario, algorithm) cells")

    rows = []
    for scenario, algo in shared:
        for kpi in KPIS:
            a = np.asarray(cells_a[(scenario, algo)][kpi], dtype=np.float64)
            b = np.asarray(cells_b[(scenario, algo)][kpi], dtype=np.float64)
            t, dof, p = welch_t_test(a, b)
            std_a = float(a.std(ddof=1)) if len(a) > 1 else 0.0
            std_b = float(b.std(ddof=1)) if len(b) > 1 else 0.0
            rows.append({
                "scenario": scenario,
                "algo": algo,
                "kpi": kpi,
                f"{label_a}_value": f"{_fmt(a.mean())} ({_fmt(std_a)})",
                f"{label_b}_value": f"{_fmt(b.mean())} ({_fmt(std_b)})",
                f"{label_a}_mean": _fmt(a.mean()),
                f"{label_a}_std": _fmt(std_a),
                f"{label_b}_mean": _fmt(b.mean()),
                f"{label_b}_std": _fmt(std_b),
                "diff": _fmt(a.mean() - b.mean()),
                "t_stat": _fmt(t),
                "dof": _fmt(dof),
                "p_value": _fmt(p),
                "significant": "*" if p < SIGNIFICANCE_LEVEL else "",
            })

    out_file = Path(out_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = list(rows[0].keys())
    with open(out_file, "w", newline="") as handle:
        out = csv.DictWriter(handle, fieldnames=fieldnames, lineterminator="\n")
        out.writeheader()
        out.writerows(rows)
    return rows
