import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ddr.geometry import load_cell
from ddr.shapes import SHAPES_2D, SHAPES_3D, shape_document

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TEST_2D = ["triangle", "square", "pentagon", "l_hexagon"]
TEST_3D = ["tetra", "cube", "prism", "l_prism"]


def cell(name):
    return load_cell(shape_document(name))


@pytest.fixture(scope="session")
def cells():
    return {name: cell(name) for name in list(SHAPES_2D) + list(SHAPES_3D)}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
