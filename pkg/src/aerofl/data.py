"""C-MAPSS ingestion: parsing, sensor selection, normalization, windowing.

The raw files are whitespace-separated numeric text with 26 columns per
line: unit id, cycle index, 3 operational settings, 21 sensor readings.
Only 14 variance-informative sensor channels are retained downstream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

WINDOW_LEN = 50
RUL_CAP = 125

# Retained sensor channels s2,s3,s4,s7,s8,s9,s11,s12,s13,s14,s15,s17,s20,s21
# as 0-based indices into the 21-column sensor block.
SENSOR_COLUMNS = np.array([1, 2, 3, 6, 7, 8, 10, 11, 12, 13, 14, 16, 19, 20])
N_CHANNELS = len(SENSOR_COLUMNS)

N_RAW_COLUMNS = 26


class ParseError(ValueError):
    """Malformed C-MAPSS text input."""


@dataclass(frozen=True)
class EngineTrajectory:
    """One run-to-failure engine: cycles 1..T in order."""

    engine_id: int
    op_settings: np.ndarray  # (T, 3) float64
    sensors: np.ndarray      # (T, 21) float64

    def __post_init__(self):
        if self.engine_id < 1:
            raise ValueError(f"engine_id must be positive, got {self.engine_id}")
        if self.sensors.ndim != 2 or self.sensors.shape[1] != 21:
            raise ValueError(f"sensors must be (T, 21), got {self.sensors.shape}")
        if len(self.sensors) < 1:
            raise ValueError("trajectory must contain at least one row")
        if self.op_settings.shape != (len(self.sensors), 3):
            raise ValueError("op_settings/sensors row mismatch")

    def __len__(self) -> int:
        return len(self.sensors)


@dataclass(frozen=True)
class NormStats:
    """Per-channel z-score statistics for the 14 retained channels."""

    mean: np.ndarray  # (14,) float64
    std: np.ndarray   # (14,) float64

    def __post_init__(self):
        if self.mean.shape != (N_CHANNELS,) or self.std.shape != (N_CHANNELS,):
            raise ValueError("NormStats must hold 14 entries per field")
        if not np.all(self.std > 0):
            raise ValueError("every retained channel must have std > 0")


@dataclass(frozen=True)
class SensorWindow:
    """A normalized 14x50 input window with its capped RUL label."""

    values: np.ndarray  # (14, 50) float32
    label: float        # capped RUL, cycles
    engine_id: int
    end_cycle: int

    def __post_init__(self):
        if self.values.shape != (N_CHANNELS, WINDOW_LEN):
            raise ValueError(f"window must be 14x50, got {self.values.shape}")
        if not 0 <= self.label <= RUL_CAP:
            raise ValueError(f"label must lie in [0, {RUL_CAP}], got {self.label}")


def parse_trajectory_file(content: str) -> list[EngineTrajectory]:
    """Parse a train_FDxxx.txt / test_FDxxx.txt body into trajectories.

    Rows are grouped by unit id in file order. Raises ParseError with the
    offending 1-based line number on malformed input.
    """
    rows: list[list[float]] = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != N_RAW_COLUMNS:
            raise ParseError(
                f"line {lineno}: expected {N_RAW_COLUMNS} columns, got {len(tokens)}"
            )
        try:
            rows.append([float(tok) for tok in tokens])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-numeric token ({exc})") from None
    if not rows:
        raise ParseError("empty trajectory file")

    data = np.asarray(rows, dtype=np.float64)
    unit_ids = data[:, 0].astype(np.int64)
    trajectories = []
    # Preserve first-appearance order of unit ids.
    for uid in dict.fromkeys(unit_ids.tolist()):
        block = data[unit_ids == uid]
        cycles = block[:, 1].astype(np.int64)
        if not np.array_equal(cycles, np.arange(1, len(block) + 1)):
            raise ParseError(f"unit {uid}: cycle indices are not 1..T")
        trajectories.append(
            EngineTrajectory(
                engine_id=int(uid),
                op_settings=block[:, 2:5].copy(),
                sensors=block[:, 5:26].copy(),
            )
        )
    return trajectories


def format_trajectory_file(trajectories: list[EngineTrajectory]) -> str:
    """Inverse of parse_trajectory_file at full float precision."""
    lines = []
    for traj in trajectories:
        for t in range(len(traj)):
            fields = [str(traj.engine_id), str(t + 1)]
            fields += [repr(float(v)) for v in traj.op_settings[t]]
            fields += [repr(float(v)) for v in traj.sensors[t]]
            lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse_rul_file(content: str) -> list[int]:
    """Parse RUL_FDxxx.txt: one nonnegative integer per line, test-file order."""
    values = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        tok = line.strip()
        try:
            value = int(tok)
        except ValueError:
            raise ParseError(f"line {lineno}: expected integer, got {tok!r}") from None
        if value < 0:
            raise ParseError(f"line {lineno}: negative RUL {value}")
        values.append(value)
    if not values:
        raise ParseError("empty RUL file")
    return values


def select_sensors(traj: EngineTrajectory) -> np.ndarray:
    """Return the (T, 14) retained-channel series in the canonical order."""
    return traj.sensors[:, SENSOR_COLUMNS]


def fit_normalizer(train: list[EngineTrajectory]) -> NormStats:
    """Per-channel mean/std over all training rows (sample std, ddof=1)."""
    stacked = np.concatenate([select_sensors(t) for t in train], axis=0)
    if len(stacked) < 2:
        raise ValueError("need at least 2 rows to fit normalization statistics")
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0, ddof=1)
    if np.any(std == 0):
        bad = np.nonzero(std == 0)[0].tolist()
        raise ValueError(f"constant retained channel(s) at positions {bad}")
    return NormStats(mean=mean, std=std)


def apply_normalizer(series: np.ndarray, stats: NormStats) -> np.ndarray:
    """z-score a (T, 14) series with training-set statistics."""
    return (series - stats.mean) / stats.std


def make_training_windows(
    traj: EngineTrajectory, stats: NormStats, window: int = WINDOW_LEN
) -> list[SensorWindow]:
    """All sliding windows of a training trajectory with capped RUL labels.

    A trajectory of length T yields T - window + 1 windows; the window
    ending at cycle t carries label min(125, T - t). Trajectories shorter
    than the window are skipped with a warning (corrupt-input guard only).
    """
    T = len(traj)
    if T < window:
        log.warning(
            "engine %d: trajectory length %d < window %d, skipping",
            traj.engine_id, T, window,
        )
        return []
    series = apply_normalizer(select_sensors(traj), stats).astype(np.float32)
    out = []
    for t in range(window, T + 1):
        out.append(
            SensorWindow(
                values=series[t - window:t].T.copy(),
                label=float(min(RUL_CAP, T - t)),
                engine_id=traj.engine_id,
                end_cycle=t,
            )
        )
    return out


def make_test_windows(
    traj: EngineTrajectory,
    final_rul: int,
    stats: NormStats,
    window: int = WINDOW_LEN,
) -> list[SensorWindow]:
    """All sliding test windows; label = min(125, final_rul + T - t).

    Trajectories shorter than the window contribute exactly one window,
    left-padded by replicating the first row, labelled min(125, final_rul).
    """
    T = len(traj)
    series = apply_normalizer(select_sensors(traj), stats).astype(np.float32)
    if T < window:
        padded = np.concatenate(
            [np.repeat(series[:1], window - T, axis=0), series], axis=0
        )
        return [
            SensorWindow(
                values=padded.T.copy(),
                label=float(min(RUL_CAP, final_rul)),
                engine_id=traj.engine_id,
                end_cycle=T,
            )
        ]
    out = []
    for t in range(window, T + 1):
        out.append(
            SensorWindow(
                values=series[t - window:t].T.copy(),
                label=float(min(RUL_CAP, final_rul + T - t)),
                engine_id=traj.engine_id,
                end_cycle=t,
            )
        )
    return out


def stack_windows(windows: list[SensorWindow]) -> tuple[np.ndarray, np.ndarray]:
    """Stack windows into (n, 14, 50) float32 inputs and (n,) float32 labels."""
    x = np.stack([w.values for w in windows]).astype(np.float32)
    y = np.array([w.label for w in windows], dtype=np.float32)
    return x, y
