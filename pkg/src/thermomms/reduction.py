"""Reduced state-space models built from single-field or coupled modal bases.

Three constructions are provided:

* :func:`reduce_uncoupled` projects each field on the eigenvectors of its own
  single-field problem.
* :func:`reduce_two_step` reduces the structure first, folds the static effect of
  the truncated structural modes into the thermal capacity through the structural
  residual flexibility, and then reduces the temperature on the eigenvectors of the
  updated thermal problem.
* :func:`reduce_mode_superposition` projects on eigenvectors of the full coupled
  pencil; it is accurate but needs the full eigensolution.

:func:`reduce_two_step_second_order` rebuilds the two-step model from the
second-order equations and serves as a cross-check.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import assembly
from .eigensolve import ModalBasis, fix_signs, sym_gen_eig
from .errors import InvalidInputError, ModelError
from .statespace import full_eigensolution, pencil_eig

__all__ = ["ReducedStateSpaceModel", "reduce_uncoupled", "reduce_two_step",
           "reduce_two_step_second_order", "reduce_mode_superposition",
           "residual_flexibility_coupling", "reconstruct", "second_order_to_state_space"]


@dataclass
class ReducedStateSpaceModel:
    """``A_r d_r' + B_r d_r = T^T f`` with ``d ~ T d_r``."""
    A: np.ndarray
    B: np.ndarray
    T: object                  # sparse block-diagonal or dense projection
    n_s: int                   # retained structural modes (pairs for superposition)
    n_t: int                   # retained thermal modes
    method: str
    bases: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    full_dims: tuple = None    # (N_s, N_T) of the model it came from

    @property
    def dim(self):
        return self.A.shape[0]

    def load(self, f):
        """Project a full load vector (or a stack of them, one per row)."""
        f = np.asarray(f)
        return (self.T.T @ f.T).T

    def eigenvalues(self):
        mu, _ = pencil_eig(self.B, self.A)
        return mu


def _check_counts(model, n_s, n_t):
    if not (1 <= n_s <= model.n_s):
        raise InvalidInputError(f"n_s={n_s} outside [1, N_s={model.n_s}]")
    if not (0 <= n_t <= model.n_t):
        raise InvalidInputError(f"n_t={n_t} outside [0, N_T={model.n_t}]")


def _projection(phi, xi):
    return sp.block_diag([sp.csr_matrix(phi), sp.csr_matrix(phi), sp.csr_matrix(xi)],
                         format="csr")


def _modal_state_space(lam_s, gam_t, coupling):
    """Reduced A, B from diagonal spectra and the projected coupling ``Phi^T K_sT Xi``."""
    ns, nt = len(lam_s), len(gam_t)
    L = np.diag(lam_s)
    A = sla.block_diag(-L, np.eye(ns), -np.eye(nt))
    B = np.zeros((2 * ns + nt,) * 2)
    B[:ns, ns:2 * ns] = L
    B[ns:2 * ns, :ns] = L
    B[ns:2 * ns, 2 * ns:] = -coupling
    B[2 * ns:, ns:2 * ns] = -coupling.T
    B[2 * ns:, 2 * ns:] = -np.diag(gam_t)
    return A, B


def _thermal_basis(K, D, n_t, metric):
    if n_t == 0:
        return ModalBasis(np.zeros(0), np.zeros((K.shape[0], 0)), metric)
    return sym_gen_eig(K, D, n_t, metric=metric)


def reduce_uncoupled(model, n_s, n_t):
    """Project each field on its own leading single-field modes."""
    _check_counts(model, n_s, n_t)
    t0 = time.perf_counter()
    struct = sym_gen_eig(model.K_ss, model.M_ss, n_s, metric="M_ss")
    therm = _thermal_basis(model.K_TT, model.D_TT, n_t, "D_TT")
    coupling = struct.vectors.T @ (model.K_sT @ therm.vectors)
    A, B = _modal_state_space(struct.values, therm.values, coupling)
    T = _projection(struct.vectors, therm.vectors)
    elapsed = time.perf_counter() - t0
    return ReducedStateSpaceModel(A, B, T, n_s, n_t, "uncoupled",
                                  bases={"structural": struct, "thermal": therm},
                                  timings={"construct": elapsed},
                                  full_dims=(model.n_s, model.n_t))


def residual_flexibility_coupling(model, struct, factor=None):
    """Thermal capacity correction from the truncated structural modes.

    Returns ``K_Ts (K_ss^-1 - Phi Lam^-1 Phi^T) K_sT`` (dense, symmetric, PSD),
    evaluated from one Cholesky factor of ``K_ss`` applied to the columns of
    ``K_sT``; neither ``K_ss^-1`` nor the residual flexibility is formed.

    ``struct`` is a mass-normalized :class:`ModalBasis` of retained modes, or
    ``None`` for none.
    """
    if factor is None:
        factor = assembly.factor_stiffness(model.K_ss)
    KsT = model.K_sT.toarray()
    static = model.K_sT.T @ sla.cho_solve(factor, KsT)
    if struct is not None and struct.k > 0:
        if np.any(struct.values <= 0):
            raise InvalidInputError("structural basis has non-positive eigenvalues")
        P = struct.vectors.T @ KsT                    # (k, N_T)
        static = static - P.T @ (P / struct.values[:, None])
    return 0.5 * (static + static.T)


def reduce_two_step(model, n_s, n_t):
    """Two-step reduction with the residual-flexibility thermal update."""
    _check_counts(model, n_s, n_t)
    t0 = time.perf_counter()
    # 1-2: dominant structural modes
    struct = sym_gen_eig(model.K_ss, model.M_ss, n_s, metric="M_ss")
    # 3: updated thermal capacity
    psi = residual_flexibility_coupling(model, struct)
    D_bar = model.D_TT.toarray() + psi
    # 4-5: updated thermal modes
    therm = _thermal_basis(model.K_TT, D_bar, n_t, "D_bar_TT")
    # 6: coupling block
    coupling = struct.vectors.T @ (model.K_sT @ therm.vectors)
    # 7: reduced matrices
    A, B = _modal_state_space(struct.values, therm.values, coupling)
    T = _projection(struct.vectors, therm.vectors)
    elapsed = time.perf_counter() - t0
    return ReducedStateSpaceModel(A, B, T, n_s, n_t, "two-step",
                                  bases={"structural": struct, "thermal": therm,
                                         "psi": psi, "D_bar": D_bar},
                                  timings={"construct": elapsed},
                                  full_dims=(model.n_s, model.n_t))


def second_order_to_state_space(M, C, K):
    """State-space pencil of ``M x'' + C x' + K x = g`` for a split (s, T) system.

    Works on the structure ``M = [[M_ss, 0], [0, 0]]``, ``C = [[0, 0], [C_Ts, C_TT]]``,
    ``K = [[K_ss, K_sT], [0, K_TT]]`` with the structural size inferred from the
    nonzero rows of ``M``; the result has state ``(x_s, x_s', x_T)``.
    """
    M, C, K = (np.asarray(X, dtype=float) for X in (M, C, K))
    ns = int(np.count_nonzero(np.any(M != 0, axis=1)))
    s, t = slice(0, ns), slice(ns, None)
    nt = M.shape[0] - ns
    Kss, KsT, KTT = K[s, s], K[s, t], K[t, t]
    Mss, CTs, CTT = M[s, s], C[t, s], C[t, t]
    A = sla.block_diag(-Kss, Mss, CTT)
    B = np.zeros((2 * ns + nt,) * 2)
    B[:ns, ns:2 * ns] = Kss
    B[ns:2 * ns, :ns] = Kss
    B[ns:2 * ns, 2 * ns:] = KsT
    B[2 * ns:, ns:2 * ns] = CTs
    B[2 * ns:, 2 * ns:] = KTT
    return A, B


def reduce_two_step_second_order(model, n_s, n_t):
    """Two-step reduction derived on the second-order equations.

    The structural displacement is split into retained modes plus the quasi-static
    response of the truncated modes, ``u ~ Phi q + G K_sT theta`` with the residual
    flexibility ``G = K_ss^-1 - Phi Lam^-1 Phi^T`` formed explicitly. Substituting
    into the thermal equation gives the updated capacity; its eigenvectors reduce
    the temperature and the second-order reduced system is converted to state space.
    """
    _check_counts(model, n_s, n_t)
    t0 = time.perf_counter()
    M = model.M_ss.toarray()
    K = model.K_ss.toarray()
    KsT = model.K_sT.toarray()
    D = model.D_TT.toarray()
    Kt = model.K_TT.toarray()

    lam, Phi = sla.eigh(K, M, subset_by_index=(0, n_s - 1), driver="gvx")
    Phi = fix_signs(Phi)
    G = np.linalg.inv(K) - (Phi / lam) @ Phi.T
    G = 0.5 * (G + G.T)
    D_bar = D + KsT.T @ G @ KsT
    D_bar = 0.5 * (D_bar + D_bar.T)
    if n_t > 0:
        gam, Xi = sla.eigh(Kt, D_bar, subset_by_index=(0, n_t - 1), driver="gvx")
        Xi = fix_signs(Xi)
    else:
        gam, Xi = np.zeros(0), np.zeros((model.n_t, 0))

    # second-order reduced operators, by explicit projection
    Mr = np.zeros((n_s + n_t,) * 2)
    Cr = np.zeros_like(Mr)
    Kr = np.zeros_like(Mr)
    s, t = slice(0, n_s), slice(n_s, None)
    Mr[s, s] = Phi.T @ M @ Phi
    Kr[s, s] = Phi.T @ K @ Phi
    Kr[s, t] = -Phi.T @ KsT @ Xi
    Kr[t, t] = -Xi.T @ Kt @ Xi
    Cr[t, s] = -Xi.T @ KsT.T @ Phi
    Cr[t, t] = -Xi.T @ D_bar @ Xi
    A, B = second_order_to_state_space(Mr, Cr, Kr)
    T = _projection(Phi, Xi)
    elapsed = time.perf_counter() - t0
    return ReducedStateSpaceModel(A, B, T, n_s, n_t, "two-step-second-order",
                                  bases={"structural": ModalBasis(lam, Phi, "M_ss"),
                                         "thermal": ModalBasis(gam, Xi, "D_bar_TT"),
                                         "D_bar": D_bar},
                                  timings={"construct": elapsed},
                                  full_dims=(model.n_s, model.n_t))


def reduce_mode_superposition(ssm, n_s, n_t, eigenset=None, tol=None):
    """Project the full pencil on ``n_t`` thermal and ``n_s`` structural coupled modes.

    Thermal-class eigenvectors (purely real eigenvalues, smallest ``|mu|`` first)
    enter as real columns; each structural conjugate pair (smallest ``|Im mu|``
    first) enters as the real and imaginary parts of one member. The reduced
    matrices are the congruences ``T^T A T`` and ``T^T B T``. When ``eigenset``
    is omitted the full eigensolution is computed here and timed as part of the
    construction.
    """
    from .analysis import classify

    if not (0 <= n_s <= ssm.n_s and 0 <= n_t <= ssm.n_t):
        raise InvalidInputError(f"mode counts ({n_s}, {n_t}) exceed ({ssm.n_s}, {ssm.n_t})")
    t0 = time.perf_counter()
    if eigenset is None or eigenset.vectors is None:
        eigenset = full_eigensolution(ssm, want_vectors=True)
    kw = {} if tol is None else {"tol": tol}
    spec = classify(eigenset, ssm.n_t, **kw)
    thermal = spec.thermal_index[:n_t]
    pairs = spec.structural_index[:n_s]
    V = eigenset.vectors
    cols = []
    for j in pairs:
        cols.append(V[:, j].real)
        cols.append(V[:, j].imag)
    for j in thermal:
        v = V[:, j]
        cols.append(v.real if np.linalg.norm(v.real) >= np.linalg.norm(v.imag) else v.imag)
    T = np.column_stack(cols) if cols else np.zeros((ssm.dim, 0))
    T = T / np.linalg.norm(T, axis=0)
    A = T.T @ (ssm.A @ T)
    B = T.T @ (ssm.B @ T)
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    elapsed = time.perf_counter() - t0
    return ReducedStateSpaceModel(A, B, T, n_s, n_t, "superposition",
                                  bases={"eigenvalues": eigenset.values[np.r_[pairs, thermal]
                                                                        .astype(int)]},
                                  timings={"construct": elapsed},
                                  full_dims=(ssm.n_s, ssm.n_t))


def reconstruct(r, d_r):
    """Map reduced states back to full states, ``d = T d_r``.

    ``d_r`` is one reduced state or a trajectory with one state per row.
    """
    d_r = np.asarray(d_r, dtype=float)
    if d_r.shape[-1] != r.dim:
        raise ModelError(f"reduced state has length {d_r.shape[-1]}, model has {r.dim}")
    return (r.T @ d_r.T).T
