import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""

    def record(label: str, ok: bool | None, detail: str = "") -> bool | None:
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        ACCEPTANCE_LINES.append(f"[{status}] {label}" + (f": {detail}" if detail else ""))
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def commute_csv(tmp_path):
    """A small synthetic commute dataset in canonical CSV form; returns its path."""
    from lppm_bench.datasets import save_csv
    from lppm_bench.datasets.synthetic import commute_dataset

    path = tmp_path / "commute.csv"
    save_csv(commute_dataset(n_users=3, seed=1, round_trips=3), path)
    return path
