"""Symmetric first-order form ``A d' + B d = f`` with state ``d = (u, u', theta)``."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import CapacityError, ModelError

__all__ = ["SymStateSpaceModel", "ComplexEigenSet", "to_state_space", "full_eigensolution",
           "DENSE_LIMIT", "REAL_TOL"]

DENSE_LIMIT = 5000
#: relative tolerance for calling an eigenvalue purely real, |Im mu| <= REAL_TOL |mu|
REAL_TOL = 1e-8

CALL_COUNTS = {"full_eigensolution": 0}


@dataclass
class SymStateSpaceModel:
    A: sp.csr_matrix
    B: sp.csr_matrix
    n_s: int
    n_t: int
    T0: float = 1.0
    source: object = None       # the CoupledSecondOrderModel, when built from one

    @property
    def dim(self):
        return 2 * self.n_s + self.n_t

    def slices(self):
        """Slices of the displacement, velocity and temperature blocks."""
        n_s, n_t = self.n_s, self.n_t
        return slice(0, n_s), slice(n_s, 2 * n_s), slice(2 * n_s, 2 * n_s + n_t)

    def load(self, f_s=None, Q_T=None):
        """Full load vector ``(0, f_s, -Q_T / T0)``."""
        f = np.zeros(self.dim)
        _, sv, st = self.slices()
        if f_s is not None:
            f[sv] = f_s
        if Q_T is not None:
            f[st] = -np.asarray(Q_T) / self.T0
        return f


def to_state_space(model):
    """Build the symmetric pencil from the constrained second-order blocks.

    ``A = diag(-K_ss, M_ss, -D_TT)`` and::

        B = [[0,     K_ss,  0    ],
             [K_ss,  0,    -K_sT ],
             [0,    -K_Ts, -K_TT ]]
    """
    K, M = model.K_ss, model.M_ss
    D, Kt, KsT = model.D_TT, model.K_TT, model.K_sT
    A = sp.block_diag([-K, M, -D], format="csr")
    B = sp.bmat([[None, K, None],
                 [K, None, -KsT],
                 [None, -KsT.T, -Kt]], format="csr")
    n_s, n_t = model.n_s, model.n_t
    # bmat leaves empty blocks out; force the full shape
    B = sp.csr_matrix(B, shape=(2 * n_s + n_t,) * 2)
    return SymStateSpaceModel(A=A, B=B, n_s=n_s, n_t=n_t, T0=model.T0, source=model)


@dataclass
class ComplexEigenSet:
    """Eigenvalues ``mu`` of ``B chi = mu A chi``, sorted by ``|mu|`` then ``Im mu``."""
    values: np.ndarray
    vectors: np.ndarray = None

    @property
    def count(self):
        return len(self.values)

    def real_mask(self, tol=REAL_TOL):
        return np.abs(self.values.imag) <= tol * np.abs(self.values)


def _canonical_order(values):
    return np.lexsort((values.imag, np.round(np.abs(values), 12)))


def pencil_eig(B, A, want_vectors=False):
    """All eigenvalues of the dense symmetric pencil ``(B, A)`` via QZ.

    A diagonal congruence ``S A S``, ``S B S`` with ``S = |diag A|^-1/2`` is applied
    first; it leaves the spectrum unchanged and equilibrates the block scales.
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    B = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    d = np.abs(np.diag(A))
    if np.any(d == 0):
        raise ModelError("A has a zero diagonal entry")
    s = 1.0 / np.sqrt(d)
    As = A * np.outer(s, s)
    Bs = B * np.outer(s, s)
    if want_vectors:
        mu, V = sla.eig(Bs, As)
        V = V * s[:, None]
    else:
        mu = sla.eigvals(Bs, As)
        V = None
    if not np.all(np.isfinite(mu)):
        raise ModelError("non-finite eigenvalue: A is singular")
    order = _canonical_order(mu)
    mu = mu[order]
    if V is not None:
        V = V[:, order]
    return mu, V


def full_eigensolution(ssm, want_vectors=False, dense_limit=DENSE_LIMIT, check=True):
    """All ``2 N_s + N_T`` eigenvalues of the full coupled pencil ``(B, A)``."""
    CALL_COUNTS["full_eigensolution"] += 1
    if ssm.dim > dense_limit:
        raise CapacityError(f"full state dimension {ssm.dim} exceeds the dense limit {dense_limit}; "
                            "use a coarser mesh for the full reference")
    mu, V = pencil_eig(ssm.B, ssm.A, want_vectors)
    if check:
        check_conjugate_closed(mu)
    return ComplexEigenSet(mu, V)


def check_conjugate_closed(mu, tol=REAL_TOL):
    """Raise :class:`ModelError` unless every complex eigenvalue has its conjugate."""
    cplx = mu[np.abs(mu.imag) > tol * np.abs(mu)]
    if cplx.size == 0:
        return
    upper = cplx[cplx.imag > 0]
    lower = np.conj(cplx[cplx.imag < 0])
    upper = upper[np.lexsort((upper.real, upper.imag))]
    lower = lower[np.lexsort((lower.real, lower.imag))]
    scale = np.abs(cplx).max()
    if upper.shape != lower.shape or np.max(np.abs(upper - lower), initial=0.0) > 1e-6 * scale:
        raise ModelError("spectrum is not closed under complex conjugation")
