"""Element and global matrices of the fully coupled linear thermoelastic problem.

Displacement and temperature shift share the bilinear interpolation of the
4-node quadrilateral; integrals use 2x2 Gauss quadrature.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import AssemblyError, InvalidInputError, ModelError, RigidBodyModeError
from .mesh import GAUSS_2X2, shape_functions

__all__ = ["MaterialProps", "ElementMatrices", "CoupledSecondOrderModel",
           "element_matrices", "assemble_system", "celsius_to_kelvin", "SILICON"]


def celsius_to_kelvin(t):
    return t + 273.15


@dataclass(frozen=True)
class MaterialProps:
    """Isotropic linear thermoelastic material.

    Attributes
    ----------
    E : Young's modulus [Pa]
    nu : Poisson ratio
    rho : density [kg/m^3]
    alpha : thermal expansion coefficient [1/K]
    kappa : thermal conductivity [W/(m K)]
    cE_per_rho : specific heat per unit mass [J/(K kg)]
    T0 : equilibrium temperature [K]
    hypothesis : ``"plane_stress"`` or ``"plane_strain"``
    """
    E: float
    nu: float
    rho: float
    alpha: float
    kappa: float
    cE_per_rho: float
    T0: float
    hypothesis: str = "plane_stress"

    def __post_init__(self):
        checks = {
            "E": self.E > 0, "nu": 0 <= self.nu < 0.5, "rho": self.rho > 0,
            "alpha": np.isfinite(self.alpha), "kappa": self.kappa > 0,
            "cE_per_rho": self.cE_per_rho > 0, "T0": self.T0 > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise InvalidInputError(f"invalid material property {name}={getattr(self, name)!r}")
        if self.hypothesis not in ("plane_stress", "plane_strain"):
            raise InvalidInputError(f"unknown hypothesis {self.hypothesis!r}")

    @property
    def lame_lambda(self):
        return self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))

    @property
    def lame_mu(self):
        return self.E / (2 * (1 + self.nu))

    @property
    def beta_3d(self):
        """Isotropic thermal stress modulus alpha (3 lambda + 2 mu)."""
        return self.alpha * (3 * self.lame_lambda + 2 * self.lame_mu)

    @property
    def beta(self):
        """Thermal stress coefficient of the in-plane model."""
        if self.hypothesis == "plane_stress":
            return self.alpha * self.E / (1 - self.nu)
        return self.beta_3d

    @property
    def cE(self):
        """Heat capacity per unit volume [J/(K m^3)]."""
        return self.rho * self.cE_per_rho

    def constitutive(self):
        """3x3 in-plane elasticity matrix acting on (eps_xx, eps_yy, gamma_xy)."""
        E, nu = self.E, self.nu
        if self.hypothesis == "plane_stress":
            c = E / (1 - nu ** 2)
            return c * np.array([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]])
        c = E / ((1 + nu) * (1 - 2 * nu))
        return c * np.array([[1 - nu, nu, 0], [nu, 1 - nu, 0], [0, 0, (1 - 2 * nu) / 2]])

    def with_(self, **changes):
        return MaterialProps(**{**self.__dict__, **changes})


#: silicon at 25 degC, as used for the plate scenarios
SILICON = MaterialProps(E=162.4e9, nu=0.28, rho=2330.0, alpha=2.54e-6, kappa=145.0,
                        cE_per_rho=711.0, T0=celsius_to_kelvin(25.0))


@dataclass
class ElementMatrices:
    m_e: np.ndarray     # 8x8 consistent mass
    k_e: np.ndarray     # 8x8 stiffness
    dTT_e: np.ndarray   # 4x4 heat capacity (not scaled by 1/T0)
    kTT_e: np.ndarray   # 4x4 conductivity (not scaled by 1/T0)
    ksT_e: np.ndarray   # 8x4 thermal stress coupling


def element_matrices(elem_coords, mat, thickness, index=None):
    """Integrate all five element blocks of one quadrilateral.

    ``elem_coords`` holds the 4 node positions counterclockwise. Structural DOFs
    are ordered ``(u1x, u1y, u2x, u2y, ...)``.
    """
    coords = np.asarray(elem_coords, dtype=float)
    D = mat.constitutive()
    m_vec = np.array([1.0, 1.0, 0.0])
    beta, cE, kappa, rho = mat.beta, mat.cE, mat.kappa, mat.rho

    m_e = np.zeros((8, 8))
    k_e = np.zeros((8, 8))
    dTT = np.zeros((4, 4))
    kTT = np.zeros((4, 4))
    ksT = np.zeros((8, 4))
    for xi, eta in GAUSS_2X2:
        N, dN = shape_functions(xi, eta)
        J = dN @ coords
        detJ = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if not detJ > 0:
            where = "" if index is None else f" {index}"
            raise AssemblyError(f"element{where} is degenerate or clockwise (det J = {detJ:g})")
        dNx = np.linalg.solve(J, dN)          # (2, 4) physical gradients
        w = detJ * thickness

        Nu = np.zeros((2, 8))
        Nu[0, 0::2] = N
        Nu[1, 1::2] = N
        Bu = np.zeros((3, 8))
        Bu[0, 0::2] = dNx[0]
        Bu[1, 1::2] = dNx[1]
        Bu[2, 0::2] = dNx[1]
        Bu[2, 1::2] = dNx[0]

        m_e += rho * w * Nu.T @ Nu
        k_e += w * Bu.T @ D @ Bu
        dTT += cE * w * np.outer(N, N)
        kTT += kappa * w * dNx.T @ dNx
        ksT += beta * w * np.outer(Bu.T @ m_vec, N)
    return ElementMatrices(m_e, k_e, dTT, kTT, ksT)


@dataclass
class CoupledSecondOrderModel:
    """Constrained global blocks of the second-order coupled system.

    ``D_TT`` and ``K_TT`` already carry the ``1/T0`` factor; ``K_sT`` is unscaled
    and ``K_Ts`` is its exact transpose.
    """
    M_ss: sp.csr_matrix
    K_ss: sp.csr_matrix
    D_TT: sp.csr_matrix
    K_TT: sp.csr_matrix
    K_sT: sp.csr_matrix
    dof_map: object = None
    material: MaterialProps = None
    mesh: object = None
    thickness: float = None

    @property
    def K_Ts(self):
        return self.K_sT.T.tocsr()

    @property
    def n_s(self):
        return self.M_ss.shape[0]

    @property
    def n_t(self):
        return self.D_TT.shape[0]

    @property
    def T0(self):
        return self.material.T0 if self.material is not None else 1.0

    def blocks(self):
        return {"M_ss": self.M_ss, "K_ss": self.K_ss, "D_TT": self.D_TT,
                "K_TT": self.K_TT, "K_sT": self.K_sT}

    def check(self):
        """Verify symmetry and definiteness requirements; raise on failure."""
        for name in ("M_ss", "K_ss", "D_TT", "K_TT"):
            X = getattr(self, name)
            scale = abs(X).max() if X.nnz else 0.0
            if X.nnz and abs(X - X.T).max() > 1e-12 * scale:
                raise ModelError(f"{name} is not symmetric")
        for name in ("M_ss", "D_TT"):
            try:
                sla.cho_factor(getattr(self, name).toarray())
            except np.linalg.LinAlgError:
                raise ModelError(f"{name} is not positive definite") from None
        factor_stiffness(self.K_ss)
        return self


def factor_stiffness(K_ss):
    """Cholesky factor of the constrained structural stiffness."""
    K = K_ss.toarray() if sp.issparse(K_ss) else np.asarray(K_ss)
    try:
        return sla.cho_factor(K, lower=True)
    except np.linalg.LinAlgError:
        raise RigidBodyModeError(
            "structural stiffness is singular: boundary conditions leave rigid-body modes") from None


def _scatter(rows, cols, vals, shape):
    keep = (rows >= 0) & (cols >= 0)
    return sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=shape).tocsr()


def assemble_system(mesh, mat, dofs, thickness, check=True):
    """Assemble the constrained global blocks by scatter-add in element order.

    Constrained DOFs are eliminated. Raises :class:`ModelError` when either field
    has no free DOF and :class:`RigidBodyModeError` when ``K_ss`` is singular.
    """
    n_s, n_t = dofs.n_s, dofs.n_t
    if n_s < 1 or n_t < 1:
        raise ModelError(f"model needs free DOFs in both fields, got N_s={n_s}, N_T={n_t}")

    ne = mesh.n_elements
    s_idx = dofs.s_node_dof[mesh.elements].reshape(ne, 8)
    t_idx = dofs.t_node_dof[mesh.elements]
    M = np.empty((ne, 8, 8))
    K = np.empty((ne, 8, 8))
    Dt = np.empty((ne, 4, 4))
    Kt = np.empty((ne, 4, 4))
    C = np.empty((ne, 8, 4))
    for e, conn in enumerate(mesh.elements):
        em = element_matrices(mesh.nodes[conn], mat, thickness, index=e)
        M[e], K[e], Dt[e], Kt[e], C[e] = em.m_e, em.k_e, em.dTT_e, em.kTT_e, em.ksT_e

    def rc(a, b):
        r = np.repeat(a[:, :, None], b.shape[1], axis=2).ravel()
        c = np.repeat(b[:, None, :], a.shape[1], axis=1).ravel()
        return r, c

    rs, cs = rc(s_idx, s_idx)
    rt, ct = rc(t_idx, t_idx)
    rst, cst = rc(s_idx, t_idx)
    inv_T0 = 1.0 / mat.T0
    model = CoupledSecondOrderModel(
        M_ss=_scatter(rs, cs, M.ravel(), (n_s, n_s)),
        K_ss=_scatter(rs, cs, K.ravel(), (n_s, n_s)),
        D_TT=_scatter(rt, ct, Dt.ravel() * inv_T0, (n_t, n_t)),
        K_TT=_scatter(rt, ct, Kt.ravel() * inv_T0, (n_t, n_t)),
        K_sT=_scatter(rst, cst, C.ravel(), (n_s, n_t)),
        dof_map=dofs, material=mat, mesh=mesh, thickness=thickness,
    )
    # exact symmetry; scatter-add roundoff can differ by one ulp between (i,j) and (j,i)
    for name in ("M_ss", "K_ss", "D_TT", "K_TT"):
        X = getattr(model, name)
        setattr(model, name, ((X + X.T) * 0.5).tocsr())
    if check:
        model.check()
    return model
