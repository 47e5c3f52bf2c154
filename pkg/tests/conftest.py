import numpy as np
import pytest

from thermomms.assembly import SILICON, assemble_system
from thermomms.mesh import PlateGeometry, build_dof_map, generate_plate_mesh
from thermomms.statespace import to_state_space

MACRO = PlateGeometry(h=0.042, l=0.140, t=0.001)
MICRO = PlateGeometry(h=4e-6, l=20e-6, t=0.1e-6)
CANTILEVER = {"structural": ["left_edge"], "thermal": ["left_edge"]}


def build_plate(geom=MACRO, nx=20, ny=6, mat=SILICON, bc=CANTILEVER):
    mesh = generate_plate_mesh(geom, nx, ny)
    dofs = build_dof_map(mesh, bc)
    model = assemble_system(mesh, mat, dofs, geom.t)
    return mesh, dofs, model


@pytest.fixture(scope="session")
def macro():
    mesh, dofs, model = build_plate()
    return mesh, dofs, model, to_state_space(model)


@pytest.fixture(scope="session")
def small_plate():
    mesh, dofs, model = build_plate(nx=4, ny=2)
    return mesh, dofs, model, to_state_space(model)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


def record(criterion, ok, detail):
    """Store one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE.append((criterion, bool(ok), detail))
    print(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'} | {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'} | {detail}")
