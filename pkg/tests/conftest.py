from __future__ import annotations

import numpy as np
import pytest

from mpsrg import ModelPoint, catalog_mps, transfer_operator


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def mps_of(model: str, g: float | None = None):
    return catalog_mps(ModelPoint(model, g))


def transfer_of(model: str, g: float | None = None):
    return transfer_operator(mps_of(model, g))


# printed GHZ transfer operator, 2|00><00| + 2|11><11|
GHZ_HALF_E = np.diag([2.0, 0.0, 0.0, 2.0])


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
