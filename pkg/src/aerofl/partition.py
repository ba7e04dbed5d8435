"""Client partitions (Non-IID by engine, IID by window index) and label EMD.

Heterogeneity between a client's RUL-label distribution and the pooled
global one is measured with the 1-D earth mover's distance, discretized
on unit-cycle bins over [0, 125].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import RUL_CAP, SensorWindow

NONIID = "noniid"
IID = "iid"


@dataclass(frozen=True)
class ClientPartition:
    mode: str                      # NONIID or IID
    assignments: list[np.ndarray]  # engine ids (NONIID) or window indices (IID)
    seed: int

    @property
    def n_clients(self) -> int:
        return len(self.assignments)


@dataclass(frozen=True)
class HeterogeneityReport:
    client_mean_rul: np.ndarray  # (N,) cycles
    client_emd: np.ndarray       # (N,) cycles, vs pooled global labels
    global_mean_rul: float
    avg_emd: float


def _chunk(permuted: np.ndarray, n_clients: int) -> list[np.ndarray]:
    return [np.sort(chunk) for chunk in np.array_split(permuted, n_clients)]


def partition_noniid(engine_ids, n_clients: int = 10, seed: int = 0) -> ClientPartition:
    """Whole engines per client: seeded permutation, near-equal chunks."""
    engine_ids = np.asarray(engine_ids)
    if n_clients <= 0:
        raise ValueError("n_clients must be positive")
    if len(engine_ids) < n_clients:
        raise ValueError(f"{len(engine_ids)} engines cannot fill {n_clients} clients")
    rng = np.random.default_rng([seed, 0])
    permuted = rng.permutation(engine_ids)
    return ClientPartition(mode=NONIID, assignments=_chunk(permuted, n_clients), seed=seed)


def partition_iid(window_count: int, n_clients: int = 10, seed: int = 0) -> ClientPartition:
    """Shuffled window indices per client, near-equal chunks."""
    if n_clients <= 0:
        raise ValueError("n_clients must be positive")
    if window_count < n_clients:
        raise ValueError(f"{window_count} windows cannot fill {n_clients} clients")
    rng = np.random.default_rng([seed, 0])
    permuted = rng.permutation(window_count)
    return ClientPartition(mode=IID, assignments=_chunk(permuted, n_clients), seed=seed)


def emd_1d(sample_a, sample_b) -> float:
    """1-D EMD between two RUL samples on unit bins over [0, 125].

    Equals the integral of |CDF_a - CDF_b| over the label axis; for
    equal-size samples this matches the mean absolute difference of the
    sorted samples.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("EMD inputs must be non-empty")
    edges = np.arange(0, RUL_CAP + 2)  # unit bins, last bin holds the cap
    hist_a, _ = np.histogram(a, bins=edges)
    hist_b, _ = np.histogram(b, bins=edges)
    cdf_a = np.cumsum(hist_a) / a.size
    cdf_b = np.cumsum(hist_b) / b.size
    return float(np.abs(cdf_a - cdf_b).sum())


def group_windows(
    partition: ClientPartition, windows: list[SensorWindow]
) -> list[list[SensorWindow]]:
    """Materialize each client's window list from a partition."""
    if partition.mode == NONIID:
        by_engine: dict[int, list[SensorWindow]] = {}
        for w in windows:
            by_engine.setdefault(w.engine_id, []).append(w)
        return [
            [w for eid in client for w in by_engine.get(int(eid), [])]
            for client in partition.assignments
        ]
    return [[windows[int(i)] for i in client] for client in partition.assignments]


def heterogeneity_report(
    partition: ClientPartition, windows: list[SensorWindow]
) -> HeterogeneityReport:
    """Per-client mean RUL and EMD against the pooled label distribution."""
    grouped = group_windows(partition, windows)
    global_labels = np.array([w.label for w in windows], dtype=np.float64)
    means, emds = [], []
    for k, client_windows in enumerate(grouped):
        if not client_windows:
            raise ValueError(f"client {k} holds zero windows")
        labels = np.array([w.label for w in client_windows], dtype=np.float64)
        means.append(labels.mean())
        emds.append(emd_1d(labels, global_labels))
    return HeterogeneityReport(
        client_mean_rul=np.array(means),
        client_emd=np.array(emds),
        global_mean_rul=float(global_labels.mean()),
        avg_emd=float(np.mean(emds)),
    )
