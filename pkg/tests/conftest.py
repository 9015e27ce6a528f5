from __future__ import annotations

import numpy as np
import pytest

from normlab.gauge import EllipseGauge, LpGauge, TrigPolyGauge, circle

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion this test checks")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if call.when != "call" and call.excinfo is None:
        return
    num, title = mark.args
    rec = _CRITERIA.setdefault(num, {"title": title, "ok": True})
    if call.excinfo is not None:
        rec["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        rec = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if rec['ok'] else 'FAIL'}  {rec['title']}")


@pytest.fixture
def perturbed():
    """``1 + 0.05 sin^2(2 theta)`` in trig-polynomial form."""
    return TrigPolyGauge(1.025, (0.0, -0.025))


@pytest.fixture
def lp4():
    return LpGauge(4)


@pytest.fixture
def unit_circle():
    return circle()


def random_ellipses(count: int, seed: int) -> list[EllipseGauge]:
    rng = np.random.default_rng(seed)
    return [EllipseGauge(rng.uniform(0.5, 1.5), rng.uniform(0.0, 0.85), rng.uniform(-np.pi, np.pi))
            for _ in range(count)]
