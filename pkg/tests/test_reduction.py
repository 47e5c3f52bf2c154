import numpy as np
import pytest
import scipy.linalg as sla

from thermomms import eigensolve, statespace
from thermomms.analysis import classify, relative_errors
from thermomms.assembly import SILICON
from thermomms.errors import InvalidInputError, ModelError
from thermomms.reduction import (reconstruct, reduce_mode_superposition, reduce_two_step,
                                 reduce_two_step_second_order, reduce_uncoupled,
                                 residual_flexibility_coupling)
from thermomms.statespace import full_eigensolution, to_state_space

from conftest import build_plate
from oracles import random_coupled_model, residual_flexibility_explicit


def rel_fro(X, Y):
    return np.linalg.norm(X - Y) / np.linalg.norm(Y)


@pytest.mark.parametrize("n_s", [0, 5, 17])
def test_residual_flexibility_matches_discarded_modes(rng, n_s):
    model = random_coupled_model(rng, 28, 12, coupling=0.3)
    struct = eigensolve.sym_gen_eig(model.K_ss, model.M_ss, n_s) if n_s else None
    psi = residual_flexibility_coupling(model, struct)
    ref = residual_flexibility_explicit(model, n_s)
    assert rel_fro(psi, ref) <= 1e-10


def test_psi_symmetric_psd(macro):
    _, _, model, _ = macro
    r = reduce_two_step(model, 30, 30)
    psi = r.bases["psi"]
    scale = np.abs(psi).max()
    assert np.abs(psi - psi.T).max() <= 1e-13 * scale
    eps = 1e-12 * np.trace(psi)
    np.linalg.cholesky(psi + eps * np.eye(len(psi)))


def test_shared_structure(macro):
    _, _, model, _ = macro
    u = reduce_uncoupled(model, 12, 9)
    p = reduce_two_step(model, 12, 9)
    np.testing.assert_array_equal(u.A, p.A)
    np.testing.assert_array_equal(u.B != 0, p.B != 0)
    np.testing.assert_array_equal(u.B[:24, :24], p.B[:24, :24])


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_second_order_path_agrees_on_random_models(seed):
    model = random_coupled_model(np.random.default_rng(seed), 18, 9, coupling=0.2)
    p = reduce_two_step(model, 6, 4)
    q = reduce_two_step_second_order(model, 6, 4)
    assert rel_fro(q.A, p.A) <= 1e-12
    assert rel_fro(q.B, p.B) <= 1e-12


def test_no_coupled_eigensolve_in_mode_synthesis(macro):
    _, _, model, _ = macro
    before = dict(statespace.CALL_COUNTS)
    n_eig = eigensolve.CALL_COUNTS["sym_gen_eig"]
    reduce_uncoupled(model, 10, 10)
    reduce_two_step(model, 10, 10)
    assert statespace.CALL_COUNTS == before
    assert eigensolve.CALL_COUNTS["sym_gen_eig"] - n_eig == 4


def test_decoupled_limit():
    *_, model = build_plate(nx=6, ny=3, mat=SILICON.with_(alpha=0.0))
    u = reduce_uncoupled(model, 8, 6)
    p = reduce_two_step(model, 8, 6)
    np.testing.assert_allclose(np.abs(p.T.toarray()), np.abs(u.T.toarray()), atol=1e-12)
    full = classify(full_eigensolution(to_state_space(model)), model.n_t)
    rep = relative_errors(full, classify(p.eigenvalues(), p.n_t))
    assert rep.max <= 1e-9


def test_full_basis_superposition_reproduces_spectrum(small_plate):
    *_, ssm = small_plate
    es = full_eigensolution(ssm, want_vectors=True)
    r = reduce_mode_superposition(ssm, ssm.n_s, ssm.n_t, eigenset=es)
    assert r.dim == ssm.dim
    full = classify(es, ssm.n_t)
    rep = relative_errors(full, classify(r.eigenvalues(), ssm.n_t))
    assert rep.max <= 1e-9


def test_two_step_beats_uncoupled_on_thermal(small_plate):
    _, _, model, ssm = small_plate
    full = classify(full_eigensolution(ssm), ssm.n_t)
    errs = {}
    for f in (reduce_uncoupled, reduce_two_step):
        r = f(model, 6, 5)
        errs[f.__name__] = relative_errors(full, classify(r.eigenvalues(), r.n_t)).thermal_max
    assert errs["reduce_two_step"] < errs["reduce_uncoupled"]


def test_counts_validated_and_reconstruct(small_plate):
    _, _, model, _ = small_plate
    with pytest.raises(InvalidInputError):
        reduce_uncoupled(model, 0, 3)
    with pytest.raises(InvalidInputError):
        reduce_two_step(model, 3, model.n_t + 1)
    r = reduce_uncoupled(model, 3, 0)
    assert r.dim == 6
    traj = reconstruct(r, np.ones((4, r.dim)))
    assert traj.shape == (4, 2 * model.n_s + model.n_t)
    with pytest.raises(ModelError):
        reconstruct(r, np.ones(5))
