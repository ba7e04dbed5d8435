"""Static SVG figures from round logs.

Each SVG carries its source numbers in an XML comment so the figure can
be regenerated or inspected without the CSVs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import BIT_LABELS, BIT_ORDER, final_round_vectors  # noqa: E402

_COLORS = {32: "tab:blue", 8: "tab:orange", 4: "tab:green", 2: "tab:red"}


def _per_round_series(rows, subset, partition, field):
    """(bits -> rounds, mean, std) arrays of a per-round field over seeds."""
    series = {}
    for bits in BIT_ORDER:
        grouped: dict[int, list[float]] = {}
        for row in rows:
            if (row["subset"], row["bits"], row["partition"]) == (subset, bits, partition):
                grouped.setdefault(row["round"], []).append(row[field])
        if not grouped:
            continue
        rounds = np.array(sorted(grouped))
        mean = np.array([np.mean(grouped[r]) for r in rounds])
        std = np.array([np.std(grouped[r], ddof=1) if len(grouped[r]) > 1 else 0.0
                        for r in rounds])
        series[bits] = (rounds, mean, std)
    return series


def _save_with_table(fig, path: Path, table_lines: list[str]) -> None:
    fig.savefig(path, format="svg")
    plt.close(fig)
    text = path.read_text()
    comment = "<!-- data\n" + "\n".join(
        line.replace("--", "- -") for line in table_lines
    ) + "\n-->\n"
    path.write_text(text.replace("</svg>", comment + "</svg>"))


def plot_convergence(
    rows, path: str | Path, subset: str = "FD001", partition: str = "noniid",
    field: str = "mae",
) -> Path:
    """Per-round mean line with a +-1 std band per bit-width config."""
    path = Path(path)
    series = _per_round_series(rows, subset, partition, field)
    fig, ax = plt.subplots(figsize=(6, 4))
    table = [f"round_{field}:{subset}:{partition}", "bits,round,mean,std"]
    for bits, (rounds, mean, std) in series.items():
        label = BIT_LABELS[bits]
        ax.plot(rounds + 1, mean, label=label, color=_COLORS[bits])
        ax.fill_between(rounds + 1, mean - std, mean + std,
                        color=_COLORS[bits], alpha=0.2)
        table += [f"{bits},{r},{m:.10g},{s:.10g}"
                  for r, m, s in zip(rounds, mean, std)]
    ax.set_xlabel("round")
    ax.set_ylabel("MAE (cycles)" if field == "mae" else field)
    ax.set_title(f"{subset} ({partition})")
    ax.legend()
    fig.tight_layout()
    _save_with_table(fig, path, table)
    return path


def plot_privacy_proxy(
    rows, path: str | Path, subset: str = "FD001", partition: str = "noniid"
) -> Path:
    """Log-scale distortion proxy per round; FP32 is identically zero and
    therefore omitted."""
    path = Path(path)
    series = _per_round_series(rows, subset, partition, "l_priv")
    series.pop(32, None)
    fig, ax = plt.subplots(figsize=(6, 4))
    table = [f"l_priv:{subset}:{partition}", "bits,round,mean,std"]
    for bits, (rounds, mean, std) in series.items():
        ax.plot(rounds + 1, mean, label=BIT_LABELS[bits], color=_COLORS[bits])
        table += [f"{bits},{r},{m:.10g},{s:.10g}"
                  for r, m, s in zip(rounds, mean, std)]
    ax.set_yscale("log")
    ax.set_xlabel("round")
    ax.set_ylabel("per-parameter squared distortion")
    ax.set_title(f"{subset} ({partition}), FP32 omitted")
    if series:
        ax.legend()
    fig.tight_layout()
    _save_with_table(fig, path, table)
    return path


def plot_pareto(
    rows, path: str | Path, subset: str = "FD001", partition: str = "noniid"
) -> Path:
    """Payload per round (KiB) vs final MAE with +-1 std error bars."""
    path = Path(path)
    cells = final_round_vectors(rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    table = [f"pareto:{subset}:{partition}", "bits,payload_kib,mae_mean,mae_std"]
    for bits in BIT_ORDER:
        cell = cells.get((subset, bits, partition))
        if cell is None:
            continue
        payload = next(
            row["payload_bytes"] for row in rows
            if (row["subset"], row["bits"], row["partition"])
            == (subset, bits, partition)
        ) / 1024.0
        maes = np.array([v[0] for v in cell.values()])
        std = maes.std(ddof=1) if len(maes) > 1 else 0.0
        ax.errorbar(payload, maes.mean(), yerr=std, fmt="o",
                    color=_COLORS[bits], label=BIT_LABELS[bits], capsize=3)
        table.append(f"{bits},{payload:.2f},{maes.mean():.10g},{std:.10g}")
    ax.set_xscale("log")
    ax.set_xlabel("payload per round (KiB)")
    ax.set_ylabel("final MAE (cycles)")
    ax.set_title(f"accuracy vs communication, {subset} ({partition})")
    ax.legend()
    fig.tight_layout()
    _save_with_table(fig, path, table)
    return path
