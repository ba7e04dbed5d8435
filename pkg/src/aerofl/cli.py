"""Command-line front end.

Subcommands: ingest-check, run, partition-stats, fpga, report, plot.
Dataset root comes from --data-root or the CMAPSS_DATA_ROOT environment
variable. Exit codes: 0 success, 1 config error, 2 data error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__, fedsim, report as report_mod
from .data import ParseError
from .fedsim import SEED_LIST, SUBSETS, ExperimentConfig
from .fpga import DeviceBudget, ZCU102, lorawan_schedule, project, spare_dsp
from .nn.model import params_to_npz_dict
from .partition import IID, NONIID, partition_iid, partition_noniid, heterogeneity_report
from .quantize import VALID_BITS, payload_bytes

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

ENV_DATA_ROOT = "CMAPSS_DATA_ROOT"


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


def _data_root(args) -> Path:
    root = args.data_root or os.environ.get(ENV_DATA_ROOT)
    if not root:
        raise ConfigError(
            f"no dataset root: pass --data-root or set {ENV_DATA_ROOT}"
        )
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} is not a directory")
    return root


@lru_cache(maxsize=4)
def _load_subset_cached(root: str, subset: str) -> fedsim.SubsetData:
    return fedsim.load_subset(root, subset)


# ---------------------------------------------------------------------------
# run

_RUN_KEYS = {
    "data": {"root"},
    "run": {"subsets", "bits", "seeds", "partitions", "rounds", "epochs",
            "batch_size", "lr", "clients", "out", "workers"},
}


def _read_config_file(path: Path) -> dict:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    values: dict = {}
    for section in parser.sections():
        if section not in _RUN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in parser.items(section):
            if key not in _RUN_KEYS[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
            values[f"{section}.{key}"] = value
    return values


def _csv_ints(text: str) -> list[int]:
    return [int(tok) for tok in str(text).replace(",", " ").split()]


def _build_grid(args) -> list[ExperimentConfig]:
    file_cfg = _read_config_file(Path(args.config)) if args.config else {}

    def pick(cli_value, file_key, default):
        if cli_value is not None:
            return cli_value
        if file_key in file_cfg:
            return file_cfg[file_key]
        return default

    subsets = pick(args.subset, "run.subsets", list(SUBSETS))
    if isinstance(subsets, str):
        subsets = subsets.replace(",", " ").split()
    bits_list = pick(args.bits, "run.bits", list(VALID_BITS))
    if isinstance(bits_list, str):
        bits_list = _csv_ints(bits_list)
    seeds = pick(args.seed, "run.seeds", list(SEED_LIST))
    if isinstance(seeds, str):
        seeds = _csv_ints(seeds)
    partitions = pick(args.partition, "run.partitions", [NONIID])
    if isinstance(partitions, str):
        partitions = partitions.replace(",", " ").split()
    rounds = int(pick(args.rounds, "run.rounds", 20))
    epochs = int(pick(args.epochs, "run.epochs", 2))
    batch = int(pick(args.batch_size, "run.batch_size", 32))
    lr = float(pick(args.lr, "run.lr", 1e-3))
    clients = int(pick(args.clients, "run.clients", 10))

    grid = []
    for partition in partitions:
        for subset in subsets:
            if partition == IID and subset != "FD001" and not args.allow_iid_all:
                # IID sweeps default to FD001 only; --allow-iid-all overrides.
                continue
            for bits in bits_list:
                if partition == IID and bits not in (32, 4) and not args.allow_iid_all:
                    continue
                for seed in seeds:
                    try:
                        grid.append(ExperimentConfig(
                            subset=subset, bits=int(bits),
                            partition_mode=partition, rounds=rounds,
                            local_epochs=epochs, batch_size=batch, lr=lr,
                            n_clients=clients, seed=int(seed),
                        ))
                    except ValueError as exc:
                        raise ConfigError(str(exc)) from None
    if not grid:
        raise ConfigError("run grid is empty after filtering")
    return grid


def _cell_stem(cfg: ExperimentConfig) -> str:
    return f"{cfg.subset}_{cfg.bits}_{cfg.partition_mode}_{cfg.seed}"


def _run_cell(cfg: ExperimentConfig, root: str, out_dir: str) -> str:
    data = _load_subset_cached(root, cfg.subset)
    state = fedsim.run_experiment(cfg, data)
    out = Path(out_dir)
    stem = _cell_stem(cfg)
    (out / f"rounds_{stem}.csv").write_text(
        fedsim.rounds_to_csv(cfg, state.history)
    )
    np.savez(out / f"params_{stem}.npz", **params_to_npz_dict(state.global_params))
    return stem


def _write_manifest(out: Path, grid, root: Path, skipped: list[str]) -> None:
    checksums = {}
    for p in sorted(root.glob("*FD00*.txt")):
        checksums[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest = {
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "data_root": str(root),
        "dataset_checksums": checksums,
        "round_indexing": "rounds r in [0, R) feed the client-seed formula",
        "seed_list": sorted({c.seed for c in grid}),
        "cells": [_cell_stem(c) for c in grid],
        "skipped_cells": skipped,
        "config": [{
            "subset": c.subset, "bits": c.bits, "partition": c.partition_mode,
            "rounds": c.rounds, "local_epochs": c.local_epochs,
            "batch_size": c.batch_size, "lr": c.lr,
            "n_clients": c.n_clients, "seed": c.seed,
        } for c in grid],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _write_summaries(out: Path) -> None:
    rows = report_mod.load_round_rows(out)
    cells = report_mod.final_round_vectors(rows)
    grouped: dict = {}
    for (subset, bits, partition), per_seed in cells.items():
        grouped.setdefault((subset, bits, partition), per_seed)
    for (subset, bits, partition), per_seed in grouped.items():
        seeds = sorted(per_seed)
        summary = {
            "subset": subset, "bits": bits, "partition": partition,
            "seeds": seeds,
            "final_mae": [per_seed[s][0] for s in seeds],
            "final_nasa_score": [per_seed[s][1] for s in seeds],
        }
        path = out / f"summary_{subset}_{bits}_{partition}.json"
        path.write_text(json.dumps(summary, indent=2) + "\n")


def cmd_run(args) -> int:
    root = _data_root(args)
    grid = _build_grid(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"running {len(grid)} cell(s) -> {out}")
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [
                pool.submit(_run_cell, cfg, str(root), str(out)) for cfg in grid
            ]
            for fut in futures:
                print(f"  done {fut.result()}")
    else:
        for cfg in grid:
            stem = _run_cell(cfg, str(root), str(out))
            print(f"  done {stem}")
    _write_summaries(out)
    _write_manifest(out, grid, root, skipped=[])
    return EXIT_OK


# ---------------------------------------------------------------------------
# ingest-check

def cmd_ingest_check(args) -> int:
    root = _data_root(args)
    subsets = args.subset or [s for s in SUBSETS
                              if (root / f"train_{s}.txt").exists()]
    if not subsets:
        raise DataError(f"no train_FDxxx.txt files under {root}")
    for subset in subsets:
        data = _load_subset_cached(str(root), subset)
        train_engines = len(data.train_engine_ids)
        labels = [w.label for w in data.train_windows + data.test_windows]
        print(f"{subset}: {train_engines} train engines, "
              f"{len(data.train_windows)} train windows, "
              f"{len(data.test_windows)} test windows, "
              f"labels in [{min(labels):g}, {max(labels):g}]")
    return EXIT_OK


# ---------------------------------------------------------------------------
# partition-stats

def cmd_partition_stats(args) -> int:
    root = _data_root(args)
    data = _load_subset_cached(str(root), args.subset or "FD001")
    if (args.partition or NONIID) == NONIID:
        part = partition_noniid(data.train_engine_ids, args.clients, args.stats_seed)
    else:
        part = partition_iid(len(data.train_windows), args.clients, args.stats_seed)
    rep = heterogeneity_report(part, data.train_windows)
    text, csv_text = report_mod.partition_table(rep)
    print(text, end="")
    if args.csv:
        Path(args.csv).write_text(csv_text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fpga

def _load_device(path: str | None) -> DeviceBudget:
    if path is None:
        return ZCU102
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read device config {path}")
    try:
        dev = parser["device"]
        return DeviceBudget(
            name=dev.get("name", "custom"),
            lut=int(dev["lut"]), dsp=int(dev["dsp"]), bram36=int(dev["bram36"]),
        )
    except KeyError as exc:
        raise ConfigError(f"device config missing key {exc}") from None


def cmd_fpga(args) -> int:
    device = _load_device(args.device)
    text, csv_text = report_mod.fpga_table(args.params, device)
    print(f"device: {device.name} "
          f"({device.lut:,} LUT | {device.dsp:,} DSP | {device.bram36} BRAM36)")
    print(text, end="")
    int4 = project(args.params, 4, device)
    print(f"spare DSP at INT4: {spare_dsp(int4, device)}")
    payload = payload_bytes(args.params, 4)
    airtime, interval = lorawan_schedule(payload)
    print(f"INT4 LoRaWAN: {payload / 1024:.2f} KiB, "
          f"airtime {airtime:.1f} s, min interval {interval / 60:.1f} min")
    if args.csv:
        Path(args.csv).write_text(csv_text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# report / plot

def cmd_report(args) -> int:
    rows = report_mod.load_round_rows(args.results)
    partitions = sorted({r["partition"] for r in rows})
    out = Path(args.results)
    for partition in partitions:
        text, csv_text = report_mod.results_table(rows, partition)
        print(f"== results ({partition}) ==")
        print(text)
        (out / f"table_results_{partition}.txt").write_text(text)
        (out / f"table_results_{partition}.csv").write_text(csv_text)
    if IID in partitions and NONIID in partitions:
        text, csv_text = report_mod.iid_bias_table(rows)
        print("== IID vs Non-IID (FD001) ==")
        print(text)
        (out / "table_iid_bias.txt").write_text(text)
        (out / "table_iid_bias.csv").write_text(csv_text)
    return EXIT_OK


def cmd_plot(args) -> int:
    from . import plots

    rows = report_mod.load_round_rows(args.results)
    out = Path(args.out or args.results)
    out.mkdir(parents=True, exist_ok=True)
    subsets = sorted({r["subset"] for r in rows})
    partitions = sorted({r["partition"] for r in rows})
    for subset in subsets:
        for partition in partitions:
            if not any(r["subset"] == subset and r["partition"] == partition
                       for r in rows):
                continue
            tag = f"{subset}_{partition}"
            print(plots.plot_convergence(
                rows, out / f"fig_mae_{tag}.svg", subset, partition))
            print(plots.plot_convergence(
                rows, out / f"fig_score_{tag}.svg", subset, partition,
                field="nasa_score"))
            print(plots.plot_privacy_proxy(
                rows, out / f"fig_lpriv_{tag}.svg", subset, partition))
            print(plots.plot_pareto(
                rows, out / f"fig_pareto_{tag}.svg", subset, partition))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aerofl",
        description="Federated RUL training simulator with quantized updates",
    )
    parser.add_argument("--data-root", help=f"dataset root (or {ENV_DATA_ROOT})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute experiment grid cells")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--subset", nargs="+", choices=list(SUBSETS))
    p.add_argument("--bits", nargs="+", type=int, choices=list(VALID_BITS))
    p.add_argument("--seed", nargs="+", type=int)
    p.add_argument("--partition", nargs="+", choices=[NONIID, IID])
    p.add_argument("--rounds", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--clients", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--allow-iid-all", action="store_true",
                   help="lift the FD001/{FP32,INT4}-only restriction on IID runs")
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ingest-check", help="parse dataset files and print counts")
    p.add_argument("--subset", nargs="+", choices=list(SUBSETS))
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("partition-stats", help="per-client RUL / EMD table")
    p.add_argument("--subset", choices=list(SUBSETS), default="FD001")
    p.add_argument("--partition", choices=[NONIID, IID], default=NONIID)
    p.add_argument("--seed", dest="stats_seed", type=int, default=42)
    p.add_argument("--clients", type=int, default=10)
    p.add_argument("--csv", help="also write the table as CSV")
    p.set_defaults(func=cmd_partition_stats)

    p = sub.add_parser("fpga", help="analytical resource projection table")
    p.add_argument("--params", type=int, default=9_697)
    p.add_argument("--device", help="device budget config file")
    p.add_argument("--csv", help="also write the table as CSV")
    p.set_defaults(func=cmd_fpga)

    p = sub.add_parser("report", help="summary tables from a results directory")
    p.add_argument("--results", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="SVG figures from a results directory")
    p.add_argument("--results", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, report_mod.ReportError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError, ParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # surfaced with context, nonzero exit
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
