import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from electre_tree import TriBParameters  # noqa: E402
from electre_tree.datasets import load_dataset1  # noqa: E402

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def dataset1():
    return load_dataset1(with_labels=True)


@pytest.fixture
def merged_reference():
    return TriBParameters(weights=[0.52, 0.49], q=[3.78, 2.70], p=[5.83, 3.82],
                          v=[10.70, 5.68],
                          profiles=[[9.50, 8.20], [17.12, 10.68], [19.87, 13.45]], lam=0.76)


@pytest.fixture
def submodel_reference():
    return TriBParameters(weights=[0.53, 0.29], q=[1.13, 1.67], p=[1.57, 6.73],
                          v=[3.45, 6.77],
                          profiles=[[1.24, 6.77], [19.59, 10.95], [20.83, 15.38]], lam=0.86)


# 1-based ids of the sixteen alternatives in the sampled sub-model example
SUBMODEL_ROWS = np.array([4, 7, 8, 13, 17, 19, 26, 28, 33, 35, 36, 38, 40, 50, 52, 64]) - 1


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
