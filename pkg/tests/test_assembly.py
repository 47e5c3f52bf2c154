import numpy as np
import pytest
import scipy.linalg as sla

from thermomms.assembly import (SILICON, MaterialProps, assemble_system, element_matrices,
                                factor_stiffness)
from thermomms.errors import AssemblyError, InvalidInputError, RigidBodyModeError
from thermomms.mesh import PlateGeometry, build_dof_map, generate_plate_mesh

from conftest import build_plate
from oracles import dense_assembly

UNIT = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
UNIT_MAT = MaterialProps(E=1.0, nu=0.25, rho=1.0, alpha=1.0, kappa=1.0, cE_per_rho=1.0, T0=1.0)


def test_unit_square_hand_values():
    em = element_matrices(UNIT, UNIT_MAT, thickness=1.0)
    # int (dN1/dx)^2 + (dN1/dy)^2 over the unit square with N1 = (1-x)(1-y)
    assert em.kTT_e[0, 0] == pytest.approx(2 / 3, rel=1e-14)
    assert em.kTT_e[0, 2] == pytest.approx(-1 / 3, rel=1e-14)
    # consistent capacity: int N1^2 = 1/9, int N1 N3 = 1/36
    assert em.dTT_e[0, 0] == pytest.approx(1 / 9, rel=1e-14)
    assert em.dTT_e[0, 2] == pytest.approx(1 / 36, rel=1e-14)
    assert em.m_e[0, 0] == pytest.approx(1 / 9, rel=1e-14)
    assert em.m_e[0, 1] == 0.0


def test_element_invariants():
    em = element_matrices(UNIT * [2.0, 0.5] + 3.0, SILICON, thickness=1e-3)
    for X in (em.m_e, em.k_e, em.dTT_e, em.kTT_e):
        np.testing.assert_allclose(X, X.T, rtol=0, atol=1e-14 * abs(X).max())
    # three rigid-body modes of the free element
    w = np.linalg.eigvalsh(em.k_e)
    assert np.sum(np.abs(w) < 1e-10 * w.max()) == 3
    # constant temperature field has zero gradient
    np.testing.assert_allclose(em.kTT_e.sum(axis=1), 0.0, atol=1e-12 * em.kTT_e.max())
    # rigid translations do no work against thermal stress
    tx = np.tile([1.0, 0.0], 4)
    np.testing.assert_allclose(tx @ em.ksT_e, 0.0, atol=1e-12 * abs(em.ksT_e).max())
    # total mass
    assert em.m_e[0::2, 0::2].sum() == pytest.approx(SILICON.rho * 1.0 * 1e-3, rel=1e-12)


def test_plane_stress_coefficient():
    assert SILICON.beta == pytest.approx(SILICON.alpha * SILICON.E / (1 - SILICON.nu))
    strain = SILICON.with_(hypothesis="plane_strain")
    assert strain.beta == pytest.approx(strain.alpha * strain.E / (1 - 2 * strain.nu))
    with pytest.raises(InvalidInputError):
        SILICON.with_(nu=0.5)


def test_clockwise_element_rejected():
    with pytest.raises(AssemblyError):
        element_matrices(UNIT[::-1], SILICON, 1.0, index=7)


def test_sparse_matches_dense_oracle():
    mesh, dofs, model = build_plate(nx=5, ny=3)
    ref = dense_assembly(mesh, SILICON, dofs, 0.001)
    for name, X in model.blocks().items():
        np.testing.assert_allclose(X.toarray(), ref[name], rtol=0,
                                   atol=1e-13 * abs(ref[name]).max(), err_msg=name)
    assert (model.K_Ts != model.K_sT.T).nnz == 0


def test_rigid_body_mode_detected():
    mesh = generate_plate_mesh(PlateGeometry(0.042, 0.140, 0.001), 4, 2)
    dofs = build_dof_map(mesh, {"thermal": ["left_edge"]})
    model = assemble_system(mesh, SILICON, dofs, 0.001, check=False)
    with pytest.raises(RigidBodyModeError):
        factor_stiffness(model.K_ss)


def test_mesh_refinement_smoke():
    """Smallest structural eigenvalue moves less than 5% per refinement and decreases."""
    lam = []
    for nx, ny in ((10, 3), (20, 6), (40, 12)):
        _, _, model = build_plate(nx=nx, ny=ny)
        lam.append(sla.eigh(model.K_ss.toarray(), model.M_ss.toarray(),
                            subset_by_index=(0, 0), eigvals_only=True)[0])
    lam = np.array(lam)
    assert np.all(np.abs(np.diff(lam)) / lam[1:] < 0.05)
    assert np.all(np.diff(lam) < 0)
