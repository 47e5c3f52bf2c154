"""Symmetric-definite generalized eigenproblems ``K x = lam M x``."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import InvalidInputError, MetricError

__all__ = ["ModalBasis", "sym_gen_eig", "fix_signs"]

#: counts calls, so tests can assert which kernels a reduction used
CALL_COUNTS = {"sym_gen_eig": 0}


@dataclass
class ModalBasis:
    """Metric-normalized partial eigenbasis.

    ``vectors[:, i]`` pairs with ``values[i]``; ``metric`` names the matrix used
    for normalization (e.g. ``"M_ss"``, ``"D_TT"``, ``"D_bar_TT"``).
    """
    values: np.ndarray
    vectors: np.ndarray
    metric: str = ""

    @property
    def k(self):
        return len(self.values)

    def truncate(self, k):
        return ModalBasis(self.values[:k].copy(), self.vectors[:, :k].copy(), self.metric)


def _dense(X):
    return X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)


def fix_signs(vectors, tie=1e-6):
    """Flip columns so that each column's largest-magnitude entry is positive.

    Entries within a relative ``tie`` of the column maximum count as equal and the
    lowest index among them decides; mirror-symmetric meshes produce such ties.
    """
    if vectors.size == 0:
        return vectors
    mag = np.abs(vectors)
    top = mag >= (1.0 - tie) * mag.max(axis=0)
    rows = np.argmax(top, axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_gen_eig(K, M, k=None, metric=""):
    """Smallest ``k`` eigenpairs of ``K x = lam M x`` with ``M``-normalized vectors.

    Reduces to the standard problem ``L^-1 K L^-T y = lam y`` through the
    Cholesky factor ``M = L L^T`` and solves it densely.

    Parameters
    ----------
    K : (N, N) symmetric positive semidefinite, dense or sparse
    M : (N, N) symmetric positive definite, dense or sparse
    k : int, optional
        Number of modes, ``1 <= k <= N``; all when omitted.
    metric : str
        Tag stored on the result.

    Returns
    -------
    ModalBasis
        Ascending eigenvalues; eigenvector signs fixed by :func:`fix_signs`.
    """
    CALL_COUNTS["sym_gen_eig"] += 1
    Kd, Md = _dense(K), _dense(M)
    n = Kd.shape[0]
    if Kd.shape != (n, n) or Md.shape != (n, n):
        raise InvalidInputError(f"shape mismatch: K {Kd.shape}, M {Md.shape}")
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise InvalidInputError(f"requested {k} modes from a problem of size {n}")
    try:
        L = np.linalg.cholesky(Md)
    except np.linalg.LinAlgError:
        raise MetricError(f"metric {metric or 'M'} is not positive definite") from None
    Linv_K = sla.solve_triangular(L, Kd, lower=True)
    S = sla.solve_triangular(L, Linv_K.T, lower=True)
    S = 0.5 * (S + S.T)
    lam, Y = sla.eigh(S, subset_by_index=(0, k - 1))
    X = sla.solve_triangular(L, Y, lower=True, trans="T")
    return ModalBasis(lam, fix_signs(X), metric)
