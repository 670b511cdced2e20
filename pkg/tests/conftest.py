import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from soilobs.coupling import build_coupling
from soilobs.grid import GridSpec, assemble, layered_velocity
from soilobs.model import ReactionParams
from soilobs.reduction import assemble_reduced, disturbance_from_products

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")

TABLE1 = dict(spacing=10.0, vx=3.5e-3, diffusivity=0.19e-4)
TOP3 = ((1, 1), (4, 1), (7, 1))
OP = (5e-3, 3e-3, 2e-4)


def table1_grid(y_axis="up", N=7, sensors=TOP3):
    return GridSpec(N=N, vy=layered_velocity(N, -0.2, -0.1), sensors=sensors, y_axis=y_axis, **TABLE1)


@pytest.fixture(scope="session")
def params():
    return ReactionParams(r_max=1.2e-4, K_na=4.5e-3, K_oc=6.0e-3)


@pytest.fixture(scope="session")
def grid_up():
    return table1_grid("up")


@pytest.fixture(scope="session")
def sys_up(grid_up):
    return assemble(grid_up, 1.0)


@pytest.fixture(scope="session")
def coupling_up(sys_up, params):
    return build_coupling(sys_up, params, OP)


@pytest.fixture(scope="session")
def sys_down():
    return assemble(table1_grid("down"), 1.0)


@pytest.fixture(scope="session")
def reduced_up(params):
    g = table1_grid("up", N=11, sensors=((1, 1), (6, 1), (11, 1)))
    C_d, A_d = disturbance_from_products(params, 0.3e-9, 11, 3, (2.0e-3, 2.0e-3, 2.1e-3))
    return assemble_reduced(g, 1.0, C_d, A_d, np.full(121, 0.3e-9))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s[2:s.index(" ")])):
            terminalreporter.write_line(line)
