"""Report tables: seed-sweep results, partition heterogeneity, FPGA budget.

Every number here is recomputed from the per-round CSV logs; report
generation is pure and byte-stable given unchanged inputs.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .fpga import DeviceBudget, FpgaProjection, ZCU102, project
from .partition import HeterogeneityReport
from .stats import coefficient_of_variation, mean_std, paired_t_test

BIT_LABELS = {32: "FP32", 8: "INT8", 4: "INT4", 2: "INT2"}
BIT_ORDER = (32, 8, 4, 2)


class ReportError(ValueError):
    """Results directory cannot support the requested report."""


def load_round_rows(results_dir: str | Path) -> list[dict]:
    """Read every rounds_*.csv under a results directory."""
    rows = []
    paths = sorted(Path(results_dir).glob("rounds_*.csv"))
    if not paths:
        raise ReportError(f"no rounds_*.csv files under {results_dir}")
    for path in paths:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append({
                    "subset": row["subset"],
                    "bits": int(row["config_bits"]),
                    "partition": row["partition"],
                    "seed": int(row["seed"]),
                    "round": int(row["round"]),
                    "mae": float(row["mae"]),
                    "nasa_score": float(row["nasa_score"]),
                    "l_priv": float(row["l_priv"]),
                    "payload_bytes": float(row["payload_bytes"]),
                })
    return rows


def final_round_vectors(rows: list[dict]) -> dict:
    """Map (subset, bits, partition) -> {seed: (final mae, final score)}."""
    cells: dict = {}
    for row in rows:
        key = (row["subset"], row["bits"], row["partition"])
        per_seed = cells.setdefault(key, {})
        prev = per_seed.get(row["seed"])
        if prev is None or row["round"] > prev[0]:
            per_seed[row["seed"]] = (row["round"], row["mae"], row["nasa_score"])
    return {
        key: {seed: (m, s) for seed, (_, m, s) in per_seed.items()}
        for key, per_seed in cells.items()
    }


def _paired_vectors(cell: dict, baseline: dict) -> tuple[np.ndarray, ...]:
    seeds = sorted(cell)
    if sorted(baseline) != seeds:
        raise ReportError(
            f"seed sets differ from the FP32 baseline: {seeds} vs {sorted(baseline)}"
        )
    cell_mae = np.array([cell[s][0] for s in seeds])
    cell_score = np.array([cell[s][1] for s in seeds])
    base_mae = np.array([baseline[s][0] for s in seeds])
    base_score = np.array([baseline[s][1] for s in seeds])
    return cell_mae, cell_score, base_mae, base_score


def _fmt_p(p: float | None) -> str:
    if p is None:
        return "---"
    text = f"{p:.3f}"
    return f"**{text}**" if p < 0.05 else text


def results_table(rows: list[dict], partition: str = "noniid") -> tuple[str, str]:
    """Seed-sweep summary per (subset, config): text table and CSV.

    Columns: MAE mean+-std, p vs FP32 (paired over seeds), score (x10^3)
    mean+-std, p, CV of the score, Cohen's d. Needs >=2 seeds per cell
    and an FP32 baseline per subset.
    """
    cells = final_round_vectors(rows)
    subsets = sorted({k[0] for k in cells if k[2] == partition})
    if not subsets:
        raise ReportError(f"no results for partition {partition!r}")
    header = ["Sub.", "Cfg", "MAE (cycles)", "p_MAE", "Score S (x10^3)",
              "p_S", "CV_S", "d_MAE"]
    table_rows = []
    for subset in subsets:
        base = cells.get((subset, 32, partition))
        if base is None:
            raise ReportError(f"{subset}: FP32 baseline missing for {partition}")
        for bits in BIT_ORDER:
            cell = cells.get((subset, bits, partition))
            if cell is None:
                continue
            if len(cell) < 2:
                raise ReportError(
                    f"{subset}/{BIT_LABELS[bits]}: need >=2 seeds, got {len(cell)}"
                )
            cell_mae, cell_score, base_mae, base_score = _paired_vectors(cell, base)
            mae_m, mae_s = mean_std(cell_mae)
            sc_m, sc_s = mean_std(cell_score)
            if bits == 32:
                p_mae = p_s = None
                d_mae = 0.0
            else:
                p_mae = paired_t_test(cell_mae, base_mae).p
                p_s = paired_t_test(cell_score, base_score).p
                d_mae = paired_t_test(cell_mae, base_mae).cohens_d
            cv = coefficient_of_variation(cell_score)
            table_rows.append([
                subset,
                BIT_LABELS[bits],
                f"{mae_m:.2f}+-{mae_s:.2f}",
                _fmt_p(p_mae),
                f"{sc_m / 1e3:.0f}+-{sc_s / 1e3:.0f}",
                _fmt_p(p_s),
                f"{cv:.1f}%",
                f"{d_mae:+.2f}" if bits != 32 else "---",
            ])
    return _render(header, table_rows), _render_csv(header, table_rows)


def iid_bias_table(rows: list[dict], subset: str = "FD001") -> tuple[str, str]:
    """IID vs Non-IID comparison table for FP32 and INT4 on one subset."""
    cells = final_round_vectors(rows)
    header = ["Partition", "Cfg", "MAE (cycles)", "Score S (x10^3)"]
    table_rows = []
    for partition in ("iid", "noniid"):
        for bits in (32, 4):
            cell = cells.get((subset, bits, partition))
            if cell is None:
                raise ReportError(
                    f"{subset}/{BIT_LABELS[bits]}/{partition}: results missing"
                )
            maes = np.array([v[0] for v in cell.values()])
            scores = np.array([v[1] for v in cell.values()])
            mae_m, mae_s = mean_std(maes)
            sc_m, sc_s = mean_std(scores)
            table_rows.append([
                partition, BIT_LABELS[bits],
                f"{mae_m:.2f}+-{mae_s:.2f}",
                f"{sc_m / 1e3:.0f}+-{sc_s / 1e3:.0f}",
            ])
    return _render(header, table_rows), _render_csv(header, table_rows)


def partition_table(report: HeterogeneityReport) -> tuple[str, str]:
    """Per-client mean RUL and EMD table plus global/average rows."""
    header = ["Client", "Mean RUL", "EMD"]
    table_rows = [
        [f"k={k + 1}", f"{report.client_mean_rul[k]:.1f}",
         f"{report.client_emd[k]:.1f}"]
        for k in range(len(report.client_mean_rul))
    ]
    table_rows.append(["Global", f"{report.global_mean_rul:.1f}", "---"])
    table_rows.append(["Avg. EMD", "---", f"{report.avg_emd:.1f}"])
    return _render(header, table_rows), _render_csv(header, table_rows)


def fpga_table(
    param_count: int = 9_697, device: DeviceBudget = ZCU102
) -> tuple[str, str]:
    """Resource projection table for all supported bit-widths."""
    header = ["Cfg", "LUT", "%LUT", "DSP", "%DSP", "Lat. (us)", "Fit"]
    table_rows = []
    for bits in BIT_ORDER:
        pr: FpgaProjection = project(param_count, bits, device)
        table_rows.append([
            BIT_LABELS[bits],
            f"{pr.lut:,}",
            f"{pr.lut_pct:.1f}%",
            f"{pr.dsp:,}",
            f"{pr.dsp_pct:.1f}%",
            f"{pr.latency_us:g}",
            "yes" if pr.fits else "no",
        ])
    return _render(header, table_rows), _render_csv(header, table_rows)


def _render(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


def _render_csv(header: list[str], rows: list[list[str]]) -> str:
    out = [",".join(header)]
    out += [",".join(cell.replace(",", "") for cell in r) for r in rows]
    return "\n".join(out) + "\n"
