import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from thermomms.assembly import SILICON, CoupledSecondOrderModel
from thermomms.errors import CapacityError
from thermomms.statespace import check_conjugate_closed, full_eigensolution, to_state_space

from conftest import build_plate

m, k, d, kt, c = 2.0, 50.0, 3.0, 7.0, 1.5


@pytest.fixture
def toy():
    one = lambda v: sp.csr_matrix([[v]])
    return CoupledSecondOrderModel(M_ss=one(m), K_ss=one(k), D_TT=one(d), K_TT=one(kt),
                                   K_sT=one(c))


def test_one_dof_matrices(toy):
    ssm = to_state_space(toy)
    A = np.diag([-k, m, -d])
    B = np.array([[0, k, 0], [k, 0, -c], [0, -c, -kt]])
    np.testing.assert_array_equal(ssm.A.toarray(), A)
    np.testing.assert_array_equal(ssm.B.toarray(), B)
    np.testing.assert_array_equal(ssm.load([4.0], [6.0]), [0.0, 4.0, -6.0])


def test_one_dof_characteristic_polynomial(toy):
    # det(B - mu A) = 0  <=>  -m d mu^3 + m kt mu^2 - (c^2 + k d) mu + k kt = 0
    ref = np.roots([-m * d, m * kt, -(c ** 2 + k * d), k * kt])
    es = full_eigensolution(to_state_space(toy))
    key = lambda z: (round(z.imag, 9), z.real)
    np.testing.assert_allclose(sorted(es.values, key=key), sorted(ref, key=key), rtol=1e-12)


def test_exact_symmetry(macro):
    *_, ssm = macro
    assert abs(ssm.A - ssm.A.T).max() == 0
    assert abs(ssm.B - ssm.B.T).max() == 0


def test_decoupled_spectrum_is_single_field():
    *_, model = build_plate(nx=6, ny=2, mat=SILICON.with_(alpha=0.0))
    es = full_eigensolution(to_state_space(model))
    lam = sla.eigh(model.K_ss.toarray(), model.M_ss.toarray(), eigvals_only=True)
    gam = sla.eigh(model.K_TT.toarray(), model.D_TT.toarray(), eigvals_only=True)
    real = es.real_mask()
    np.testing.assert_allclose(np.sort(es.values[real].real), gam, rtol=1e-10)
    im = np.sort(es.values[~real].imag)
    np.testing.assert_allclose(im[len(lam):], np.sqrt(lam), rtol=1e-10)
    np.testing.assert_allclose(im[:len(lam)], -np.sqrt(lam)[::-1], rtol=1e-10)


def test_eigenvectors_satisfy_pencil(small_plate):
    *_, ssm = small_plate
    es = full_eigensolution(ssm, want_vectors=True)
    A, B = ssm.A.toarray(), ssm.B.toarray()
    R = B @ es.vectors - (A @ es.vectors) * es.values
    scale = np.linalg.norm(B, 2) + np.abs(es.values) * np.linalg.norm(A, 2)
    assert np.max(np.linalg.norm(R, axis=0) / (scale * np.linalg.norm(es.vectors, axis=0))) < 1e-11
    check_conjugate_closed(es.values)


def test_capacity_limit(small_plate):
    *_, ssm = small_plate
    with pytest.raises(CapacityError):
        full_eigensolution(ssm, dense_limit=10)
