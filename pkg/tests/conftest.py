from __future__ import annotations

import pytest

from faviscore import ConfusionMatrix, EvaluationSetting, SystemPair

# Example matrices with human outcome (100, 100, 100)
C1 = ConfusionMatrix.from_rows([[100, 0, 0], [0, 100, 0], [10, 0, 90]])
C2 = ConfusionMatrix.from_rows([[100, 0, 0], [0, 100, 0], [0, 10, 90]])
C3 = ConfusionMatrix.from_rows([[90, 0, 10], [0, 100, 0], [10, 0, 90]])
C4 = ConfusionMatrix.from_rows([[90, 10, 0], [0, 100, 0], [10, 0, 90]])
# human outcome (600, 100, 300)
C5 = ConfusionMatrix.from_rows([[360, 180, 60], [20, 40, 40], [90, 90, 120]])

ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


@pytest.fixture
def c5_setting() -> EvaluationSetting:
    return EvaluationSetting.from_confusion(SystemPair("sys1", "sys2"), C5)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
