import os
from pathlib import Path

import numpy as np
import pytest

from aerofl.data import ParseError  # noqa: F401  (import check at collection)

REAL_DATA_ENV = "CMAPSS_DATA_ROOT"


def real_data_root() -> Path | None:
    root = os.environ.get(REAL_DATA_ENV)
    if not root:
        return None
    root = Path(root)
    needed = [f"{kind}_{s}.txt" for s in ("FD001", "FD002")
              for kind in ("train", "test", "RUL")]
    if all((root / name).exists() for name in needed):
        return root
    return None


requires_real_data = pytest.mark.skipif(
    real_data_root() is None,
    reason=f"C-MAPSS text files not found under ${REAL_DATA_ENV}",
)

_acceptance_reports: dict[str, object] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    decisive = report.when == "call" or (
        report.when == "setup" and report.outcome != "passed"
    )
    if decisive:
        _acceptance_reports[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance_reports):
        rep = _acceptance_reports[nodeid]
        name = nodeid.split("::")[-1]
        if rep.skipped:
            reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else ""
            line = f"SKIP  {name}  ({reason})"
        elif rep.outcome == "passed":
            line = f"PASS  {name}"
        else:
            line = f"FAIL  {name}"
        terminalreporter.write_line(line)


def make_synthetic_trajectory_text(
    n_engines: int, rng: np.random.Generator,
    min_len: int = 120, max_len: int = 220,
    lengths: list[int] | None = None,
) -> str:
    """C-MAPSS-format text: degrading sensors so every retained channel
    is informative and RUL is learnable."""
    lines = []
    for eid in range(1, n_engines + 1):
        T = lengths[eid - 1] if lengths else int(rng.integers(min_len, max_len + 1))
        base = rng.normal(500, 50, size=21)
        slope = rng.normal(0.3, 0.1, size=21) * rng.choice([-1, 1], size=21)
        for t in range(1, T + 1):
            ops = rng.normal(0, 0.01, size=3)
            wear = (t / T) ** 2
            sensors = base + slope * 40 * wear + rng.normal(0, 0.5, size=21)
            fields = [str(eid), str(t)]
            fields += [f"{v:.4f}" for v in ops]
            fields += [f"{v:.4f}" for v in sensors]
            lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def synthetic_dataset_dir(tmp_path_factory) -> Path:
    """A small on-disk dataset in the official file layout (FD001 only)."""
    root = tmp_path_factory.mktemp("cmapss_synth")
    rng = np.random.default_rng(1234)
    (root / "train_FD001.txt").write_text(
        make_synthetic_trajectory_text(12, rng, min_len=130, max_len=200)
    )
    # include one short test trajectory to exercise left-padding
    test_lengths = [80, 95, 110, 31, 60, 140]
    (root / "test_FD001.txt").write_text(
        make_synthetic_trajectory_text(
            6, rng, lengths=test_lengths
        )
    )
    ruls = rng.integers(10, 120, size=6)
    (root / "RUL_FD001.txt").write_text("\n".join(str(int(r)) for r in ruls) + "\n")
    return root
