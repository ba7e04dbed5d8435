"""Synchronous FedAvg orchestration.

Each round: every client trains a private copy of the shared weights for
E local epochs, quantizes its weight delta, and the server adds the
uniform (1/N) mean of the dequantized deltas. Quantization touches only
the transmitted delta, never the local optimizer state or weights.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import quantize as qz
from .data import (
    SensorWindow,
    fit_normalizer,
    make_test_windows,
    make_training_windows,
    parse_rul_file,
    parse_trajectory_file,
    stack_windows,
)
from .nn import (
    AdamState,
    ModelParams,
    adam_step,
    backward,
    forward,
    init_params,
    mse_loss_and_grad,
    param_count,
)
from .nn.model import TOTAL_PARAMS, subtract
from .partition import IID, NONIID, group_windows, partition_iid, partition_noniid
from .stats import mae as mae_metric
from .stats import nasa_score

SEED_LIST = (42, 123, 256, 789, 1024, 2024, 3141, 4242, 5555, 9999)
SUBSETS = ("FD001", "FD002")

CSV_HEADER = (
    "subset,config_bits,partition,seed,round,mae,nasa_score,l_priv,payload_bytes"
)


@dataclass(frozen=True)
class ExperimentConfig:
    subset: str = "FD001"
    bits: int = 32
    partition_mode: str = NONIID
    rounds: int = 20
    local_epochs: int = 2
    batch_size: int = 32
    lr: float = 1e-3
    n_clients: int = 10
    seed: int = 42

    def __post_init__(self):
        if self.subset not in SUBSETS:
            raise ValueError(f"subset must be one of {SUBSETS}, got {self.subset!r}")
        if self.bits not in qz.VALID_BITS:
            raise ValueError(f"bits must be one of {qz.VALID_BITS}")
        if self.partition_mode not in (NONIID, IID):
            raise ValueError(f"unknown partition mode {self.partition_mode!r}")
        if min(self.rounds, self.n_clients) < 1 or self.local_epochs < 0:
            raise ValueError("rounds and n_clients must be >= 1, epochs >= 0")


@dataclass
class RoundMetrics:
    round_index: int
    mae: float
    nasa_score: float
    l_priv: float
    payload_bytes: float
    wall_clock: float


@dataclass
class SubsetData:
    """Windows of one C-MAPSS subset plus the train-engine id list."""

    train_windows: list[SensorWindow]
    test_windows: list[SensorWindow]
    train_engine_ids: list[int]


def load_subset(data_root: str | Path, subset: str) -> SubsetData:
    """Read train/test/RUL files of a subset and build all windows."""
    root = Path(data_root)
    train_path = root / f"train_{subset}.txt"
    test_path = root / f"test_{subset}.txt"
    rul_path = root / f"RUL_{subset}.txt"
    for p in (train_path, test_path, rul_path):
        if not p.exists():
            raise FileNotFoundError(f"missing dataset file: {p}")
    train_trajs = parse_trajectory_file(train_path.read_text())
    test_trajs = parse_trajectory_file(test_path.read_text())
    ruls = parse_rul_file(rul_path.read_text())
    if len(ruls) != len(test_trajs):
        raise ValueError(
            f"{rul_path.name}: {len(ruls)} values for {len(test_trajs)} test engines"
        )
    stats = fit_normalizer(train_trajs)
    train_windows = [w for t in train_trajs for w in make_training_windows(t, stats)]
    test_windows = [
        w for t, r in zip(test_trajs, ruls) for w in make_test_windows(t, r, stats)
    ]
    return SubsetData(
        train_windows=train_windows,
        test_windows=test_windows,
        train_engine_ids=[t.engine_id for t in train_trajs],
    )


def derive_client_seed(seed: int, round_index: int, client: int) -> int:
    """Per-round per-client RNG seed: s*10^4 + r*10^2 + k."""
    return seed * 10_000 + round_index * 100 + client


def local_train(
    global_params: ModelParams,
    client_x: np.ndarray,
    client_y: np.ndarray,
    config: ExperimentConfig,
    seed_client: int,
) -> ModelParams:
    """E epochs of seeded mini-batch Adam on MSE; returns the weight delta."""
    n = len(client_x)
    if n == 0:
        raise ValueError("client holds no training windows")
    rng = np.random.default_rng(seed_client)
    params = global_params
    state = AdamState.fresh(global_params, lr=config.lr)
    targets = client_y.reshape(-1, 1)
    for _ in range(config.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            pred, cache = forward(params, client_x[idx])
            _, dloss = mse_loss_and_grad(pred, targets[idx])
            grads = backward(cache, dloss)
            params, state = adam_step(params, grads, state)
    return subtract(params, global_params)


def quantize_delta(
    delta: ModelParams, bits: int, client_id: int, round_index: int
) -> qz.QuantizedDelta:
    tensors = {
        name: qz.quantize(arr, bits) for name, arr in delta.as_dict().items()
    }
    return qz.QuantizedDelta(tensors=tensors, client_id=client_id,
                             round_index=round_index)


def aggregate(
    global_params: ModelParams, deltas: list[qz.QuantizedDelta]
) -> ModelParams:
    """w <- w + (1/N) sum of dequantized client deltas (uniform weights)."""
    if not deltas:
        raise ValueError("no deltas to aggregate")
    n = len(deltas)
    new_arrays = {}
    for name, w in global_params.as_dict().items():
        acc = np.zeros(w.shape, dtype=np.float64)
        for d in deltas:
            q = d.tensors[name]
            if q.shape != w.shape:
                raise ValueError(f"{name}: delta shape {q.shape} != {w.shape}")
            acc += qz.dequantize(q).astype(np.float64)
        new_arrays[name] = (w.astype(np.float64) + acc / n).astype(w.dtype)
    return ModelParams(**new_arrays)


def evaluate(
    params: ModelParams, test_x: np.ndarray, test_y: np.ndarray,
    batch_size: int = 512,
) -> tuple[float, float]:
    """MAE and asymmetric score over the full test window set."""
    preds = np.empty(len(test_x), dtype=np.float64)
    for start in range(0, len(test_x), batch_size):
        out, _ = forward(params, test_x[start:start + batch_size])
        preds[start:start + batch_size] = out[:, 0]
    return mae_metric(preds, test_y), nasa_score(preds, test_y).total


@dataclass
class ExperimentState:
    config: ExperimentConfig
    global_params: ModelParams
    client_x: list[np.ndarray]
    client_y: list[np.ndarray]
    test_x: np.ndarray
    test_y: np.ndarray
    history: list[RoundMetrics] = field(default_factory=list)


def init_experiment(config: ExperimentConfig, data: SubsetData) -> ExperimentState:
    if config.partition_mode == NONIID:
        part = partition_noniid(data.train_engine_ids, config.n_clients, config.seed)
    else:
        part = partition_iid(len(data.train_windows), config.n_clients, config.seed)
    grouped = group_windows(part, data.train_windows)
    client_x, client_y = [], []
    for client_windows in grouped:
        x, y = stack_windows(client_windows)
        client_x.append(x)
        client_y.append(y)
    test_x, test_y = stack_windows(data.test_windows)
    return ExperimentState(
        config=config,
        global_params=init_params(config.seed),
        client_x=client_x,
        client_y=client_y,
        test_x=test_x,
        test_y=test_y.astype(np.float64),
    )


def run_round(state: ExperimentState, round_index: int) -> RoundMetrics:
    """One synchronous round: N local trainings, quantize, aggregate, eval."""
    cfg = state.config
    t0 = time.perf_counter()
    snapshot = state.global_params
    deltas = []
    distortion_sum = 0.0
    for k in range(1, cfg.n_clients + 1):
        delta = local_train(
            snapshot, state.client_x[k - 1], state.client_y[k - 1],
            cfg, derive_client_seed(cfg.seed, round_index, k),
        )
        qd = quantize_delta(delta, cfg.bits, client_id=k, round_index=round_index)
        for name, arr in delta.as_dict().items():
            recon = qz.dequantize(qd.tensors[name]).astype(np.float64)
            diff = arr.astype(np.float64) - recon
            distortion_sum += float(np.dot(diff.ravel(), diff.ravel()))
        deltas.append(qd)
    state.global_params = aggregate(snapshot, deltas)
    l_priv = distortion_sum / TOTAL_PARAMS / cfg.n_clients
    mae_val, score = evaluate(state.global_params, state.test_x, state.test_y)
    metrics = RoundMetrics(
        round_index=round_index,
        mae=mae_val,
        nasa_score=score,
        l_priv=l_priv,
        payload_bytes=qz.payload_bytes(param_count(snapshot), cfg.bits),
        wall_clock=time.perf_counter() - t0,
    )
    state.history.append(metrics)
    return metrics


def run_experiment(
    config: ExperimentConfig, data: SubsetData, progress=None
) -> ExperimentState:
    """All R rounds for one (subset, bits, partition, seed) cell."""
    state = init_experiment(config, data)
    for r in range(config.rounds):
        metrics = run_round(state, r)
        if progress is not None:
            progress(metrics)
    return state


def rounds_to_csv(config: ExperimentConfig, history: list[RoundMetrics]) -> str:
    """Serialize a round log to the canonical CSV schema (deterministic)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for m in history:
        writer.writerow([
            config.subset,
            config.bits,
            config.partition_mode,
            config.seed,
            m.round_index,
            f"{m.mae:.10g}",
            f"{m.nasa_score:.10g}",
            f"{m.l_priv:.10g}",
            f"{m.payload_bytes:.10g}",
        ])
    return buf.getvalue()
