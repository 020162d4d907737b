"""CSV and plot emission for sweep results.

``results.csv`` is the canonical artifact: one row per record in the fixed
schema below, written so that its bytes depend only on the input data,
flags and seed. ``summary.csv`` aggregates medians and quartiles per
strategy; plots are optional extras that nothing downstream depends on.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError
from .sweep import RobustnessSummary, SweepRecord

__all__ = ["RESULTS_HEADER", "emit_report", "write_robustness_summary",
           "read_records_csv"]

RESULTS_HEADER = ("run_id,draw_id,strategy,alpha,beta,lambda,omega,sharpe,"
                  "cagr,vol,mdd,turnover_ann,efficiency,hhi,n_eff,c5,"
                  "cost_drag_bp,final_value,converged,iterations,wall_ms,"
                  "error")

_SUMMARY_METRICS = ("sharpe", "cagr", "vol", "mdd", "turnover_ann",
                    "efficiency", "hhi", "n_eff", "c5", "final_value")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "True" if value else "False"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value != value or value in (float("inf"), float("-inf")):
            raise DataError("non-finite metric value in sweep record")
        if value == 0.0:  # canonicalize -0.0
            value = 0.0
        return repr(value)
    if isinstance(value, np.integer):
        value = int(value)
    return str(value)


def _record_cells(r: SweepRecord) -> list[str]:
    return [_cell(v) for v in (
        r.run_id, r.draw_id, r.strategy, r.alpha, r.beta, r.lambda_hold,
        r.omega, r.sharpe, r.cagr, r.vol, r.mdd, r.turnover_ann,
        r.efficiency, r.hhi, r.n_eff, r.c5, r.cost_drag_bp, r.final_value,
        r.converged, r.iterations, r.wall_ms, r.error)]


def write_results_csv(records: list[SweepRecord], path: Path) -> None:
    records = sorted(records, key=lambda r: r.run_id)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER.split(","))
        for r in records:
            writer.writerow(_record_cells(r))


def write_summary_csv(records: list[SweepRecord], path: Path) -> None:
    """Median and quartiles of each metric per strategy (error rows are
    counted but excluded from the statistics)."""
    strategies = sorted({r.strategy for r in records})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["strategy", "n", "n_errors"]
        for m in _SUMMARY_METRICS:
            header += [f"{m}_q25", f"{m}_median", f"{m}_q75"]
        writer.writerow(header)
        for strat in strategies:
            rows = [r for r in records if r.strategy == strat]
            good = [r for r in rows if not r.error]
            out = [strat, str(len(rows)), str(len(rows) - len(good))]
            for m in _SUMMARY_METRICS:
                vals = np.array([getattr(r, m) for r in good], dtype=float)
                if len(vals):
                    q25, med, q75 = np.quantile(vals, (0.25, 0.5, 0.75))
                    out += [repr(float(q25)), repr(float(med)),
                            repr(float(q75))]
                else:
                    out += ["", "", ""]
            writer.writerow(out)


def write_robustness_summary(summary: RobustnessSummary, out_dir: Path) -> None:
    """Per-draw best configurations plus the win-rate roll-up."""
    out_dir = Path(out_dir)
    cols = ("draw_id", "best_run_id", "alpha", "beta", "lambda", "omega",
            "qsw_sharpe", "mpt_sharpe", "qsw_efficiency", "mpt_efficiency",
            "sharpe_win", "efficiency_win")
    with open(out_dir / "best_per_draw.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in summary.per_draw:
            writer.writerow([_cell(row[c]) for c in cols])
    with open(out_dir / "win_rates.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["comparison", "win_rate"])
        writer.writerow(["qsw_best_vs_mpt_sharpe",
                         repr(summary.win_rate_sharpe)])
        writer.writerow(["qsw_best_vs_mpt_efficiency",
                         repr(summary.win_rate_efficiency)])


def _write_plots(records: list[SweepRecord], out_dir: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    good = [r for r in records if not r.error]
    strategies = sorted({r.strategy for r in good})
    metrics = ("sharpe", "turnover_ann", "efficiency", "hhi")
    fig, axes = plt.subplots(1, len(metrics), figsize=(4 * len(metrics), 4))
    for ax, metric in zip(np.atleast_1d(axes), metrics):
        data = [[getattr(r, metric) for r in good if r.strategy == s]
                for s in strategies]
        ax.boxplot(data, tick_labels=strategies)
        ax.set_title(metric)
        ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(out_dir / "metric_boxplots.png", dpi=120)
    plt.close(fig)


def emit_report(records: list[SweepRecord], out_dir: str | Path,
                plots: bool = False) -> dict[str, Path]:
    """Write results.csv and summary.csv (and optional plot files)."""
    if not records:
        raise DataError("no records to report")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {"results": out / "results.csv",
                 "summary": out / "summary.csv"}
        write_results_csv(records, paths["results"])
        write_summary_csv(records, paths["summary"])
        if plots:
            _write_plots(records, out)
            paths["plots"] = out / "metric_boxplots.png"
    except OSError as exc:
        raise DataError(f"cannot write report to {out}: {exc}") from None
    return paths


def read_records_csv(path: str | Path) -> list[SweepRecord]:
    """Load a results.csv back into records (for the report subcommand)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"results file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER.split(","):
            raise DataError(f"{path} does not match the results.csv schema")
        records = []
        for row in reader:
            if len(row) != len(header):
                raise DataError(f"malformed row in {path}: {row!r}")
            records.append(_record_from_row(row))
    if not records:
        raise DataError(f"{path} contains no records")
    return records


def _record_from_row(row: list[str]) -> SweepRecord:
    def opt_float(s):
        return float(s) if s else None

    return SweepRecord(
        run_id=int(row[0]),
        draw_id=int(row[1]) if row[1] else None,
        strategy=row[2],
        alpha=opt_float(row[3]), beta=opt_float(row[4]),
        lambda_hold=opt_float(row[5]), omega=opt_float(row[6]),
        sharpe=opt_float(row[7]), cagr=opt_float(row[8]),
        vol=opt_float(row[9]), mdd=opt_float(row[10]),
        turnover_ann=opt_float(row[11]), efficiency=opt_float(row[12]),
        hhi=opt_float(row[13]), n_eff=opt_float(row[14]),
        c5=opt_float(row[15]), cost_drag_bp=opt_float(row[16]),
        final_value=opt_float(row[17]),
        converged={"True": True, "False": False, "": None}[row[18]],
        iterations=int(row[19]) if row[19] else None,
        wall_ms=float(row[20]) if row[20] else 0.0,
        error=row[21] or None,
    )
