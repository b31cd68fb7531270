import numpy as np
import pytest

from mfbm.numerics import SeededStream

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def stream():
    return SeededStream(20240917)


@pytest.fixture
def report_criterion():
    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def random_spd(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
