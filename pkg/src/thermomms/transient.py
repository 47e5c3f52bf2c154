"""Time integration of ``A d' + B d = f(t)`` for full and reduced models."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import InvalidInputError, ModelError, StiffnessError

__all__ = ["StructuralLoad", "ThermalLoad", "ExcitationSpec", "LoadHistory", "TransientResult",
           "build_load", "sample_load", "integrate", "field_difference", "FieldDifference",
           "summarize"]


@dataclass(frozen=True)
class StructuralLoad:
    node_set: str
    direction: str              # "x" or "y"
    amplitude: float            # N, per node of the set
    omega: float = 0.0          # rad/s
    kind: str = "constant"      # "constant" or "sinusoid"


@dataclass(frozen=True)
class ThermalLoad:
    node_set: str
    amplitude: float            # W, per node of the set
    omega: float = 0.0
    kind: str = "constant"


@dataclass
class ExcitationSpec:
    structural: list = field(default_factory=list)
    thermal: list = field(default_factory=list)

    def validate(self, mesh=None):
        for ld in [*self.structural, *self.thermal]:
            if ld.kind not in ("constant", "sinusoid"):
                raise InvalidInputError(f"unknown load kind {ld.kind!r}")
            if not np.isfinite(ld.amplitude) or not np.isfinite(ld.omega):
                raise InvalidInputError("load amplitude and frequency must be finite")
            if mesh is not None:
                mesh.node_set(ld.node_set)
        for ld in self.structural:
            if ld.direction not in ("x", "y"):
                raise InvalidInputError(f"unknown load direction {ld.direction!r}")


@dataclass(frozen=True)
class Profile:
    """Time factor of one load pattern."""
    kind: str = "constant"
    omega: float = 0.0

    def __call__(self, t):
        return 1.0 if self.kind == "constant" else np.sin(self.omega * t)


def _profile(kind, omega):
    return Profile(kind, omega)


@dataclass
class LoadHistory:
    """``f(t) = sum_k c_k(t) f_k`` with fixed spatial patterns ``f_k``."""
    patterns: list              # full-length vectors
    profiles: list              # callables t -> scalar

    def __call__(self, t):
        f = np.zeros(len(self.patterns[0])) if self.patterns else np.zeros(0)
        for vec, c in zip(self.patterns, self.profiles):
            f = f + c(t) * vec
        return f

    def project(self, T):
        """Same history seen through a reduced basis, ``T^T f``."""
        return LoadHistory([T.T @ v for v in self.patterns], list(self.profiles))


def build_load(spec, mesh, dofs, ssm):
    """Spatial load patterns of an :class:`ExcitationSpec` for a state-space model.

    Structural forces go to the velocity rows, heat inputs enter the temperature
    rows as ``-Q / T0``. Loads on constrained DOFs are dropped.
    """
    spec.validate(mesh)
    patterns, profiles = [], []
    for ld in spec.structural:
        f_s = np.zeros(ssm.n_s)
        comp = "xy".index(ld.direction)
        idx = dofs.s_node_dof[mesh.node_set(ld.node_set), comp]
        np.add.at(f_s, idx[idx >= 0], ld.amplitude)
        patterns.append(ssm.load(f_s=f_s))
        profiles.append(_profile(ld.kind, ld.omega))
    for ld in spec.thermal:
        q = np.zeros(ssm.n_t)
        idx = dofs.t_node_dof[mesh.node_set(ld.node_set)]
        np.add.at(q, idx[idx >= 0], ld.amplitude)
        patterns.append(ssm.load(Q_T=q))
        profiles.append(_profile(ld.kind, ld.omega))
    return LoadHistory(patterns, profiles)


def sample_load(spec, mesh, dofs, ssm, t):
    """Full load vector at time ``t``."""
    return build_load(spec, mesh, dofs, ssm)(t)


@dataclass
class TransientResult:
    t: np.ndarray
    states: np.ndarray           # (n_samples, dim)
    stats: dict = field(default_factory=dict)
    max_theta: np.ndarray = None
    max_u: np.ndarray = None


class _Rhs:
    """``d' = A^-1 f(t) - A^-1 B d`` with ``A^-1`` applied once, at setup."""

    def __init__(self, A, B, load, blocks=None):
        n = A.shape[0]
        if blocks is None:
            blocks = [slice(0, n)]
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        Bd = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
        G = np.zeros((n, n))
        pats = [np.asarray(p, dtype=float) for p in (load.patterns if load else [])]
        gp = [np.zeros(n) for _ in pats]
        for sl in blocks:
            Ab = Ad[sl, sl]
            if np.count_nonzero(Ab - np.diag(np.diag(Ab))) == 0:
                diag = np.diag(Ab)
                if np.any(diag == 0):
                    raise ModelError("A has a zero diagonal entry")
                solve = lambda X, diag=diag: (X.T / diag).T
            else:
                sign = -1.0 if Ab[0, 0] < 0 else 1.0
                try:
                    fac = sla.cho_factor(sign * Ab)
                    solve = lambda X, fac=fac, sign=sign: sla.cho_solve(fac, X) * sign
                except np.linalg.LinAlgError:
                    # indefinite blocks, e.g. the projected A of the superposition basis
                    lu = sla.lu_factor(Ab, check_finite=False)
                    if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.abs(Ab).max():
                        raise ModelError("a diagonal block of A is singular") from None
                    solve = lambda X, lu=lu: sla.lu_solve(lu, X)
            G[sl] = solve(Bd[sl])
            for g, p in zip(gp, pats):
                g[sl] = solve(p[sl])
        # per row block: a signed copy when the only coupling is +-identity,
        # otherwise one dense product over the span of nonzero column blocks
        self.parts = []
        for sl in blocks:
            nz = [sc for sc in blocks if np.any(G[sl, sc])]
            if not nz:
                continue
            if len(nz) == 1 and G[sl, nz[0]].shape[0] == G[sl, nz[0]].shape[1]:
                blk = G[sl, nz[0]]
                for sign in (1.0, -1.0):
                    if np.array_equal(blk, sign * np.eye(blk.shape[0])):
                        self.parts.append(("copy", sl, nz[0], sign))
                        break
                else:
                    self.parts.append(("mat", sl, nz[0], np.ascontiguousarray(blk)))
                continue
            span = slice(nz[0].start, nz[-1].stop)
            self.parts.append(("mat", sl, span, np.ascontiguousarray(G[sl, span])))
        self.n = n
        profiles = list(load.profiles) if load else []
        self.g_const = np.zeros(n)
        self.g = []
        self.profiles = []
        for g, c in zip(gp, profiles):
            if isinstance(c, Profile) and c.kind == "constant":
                self.g_const += g
            else:
                self.g.append(g)
                self.profiles.append(c)
        self.nfev = 0

    def __call__(self, t, d):
        self.nfev += 1
        out = self.g_const.copy()
        for g, c in zip(self.g, self.profiles):
            out += c(t) * g
        for kind, sl, sc, op in self.parts:
            if kind == "copy":
                out[sl] -= op * d[sc]
            else:
                out[sl] -= op @ d[sc]
        return out


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension (Shampine), rows give the polynomial coefficients per stage
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


def _dopri5(f, t0, t1, y0, t_eval, rtol, atol, h0, max_steps):
    t, y = t0, y0.copy()
    k1 = f(t, y)
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((k1 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, t1 - t0)
    h = h0
    out = np.empty((len(t_eval), len(y0)))
    j = 0
    while j < len(t_eval) and t_eval[j] <= t0:
        out[j] = y
        j += 1
    steps = rejects = 0
    K = np.empty((7, len(y0)))
    while t < t1 and j < len(t_eval):
        if steps + rejects >= max_steps:
            raise StiffnessError(f"step budget {max_steps} exhausted at t={t:g} (h={h:g})")
        h = min(h, t1 - t)
        if h < 1e-14 * max(abs(t), 1.0):
            raise StiffnessError(f"step size underflow at t={t:g}: h={h:g}, "
                                 f"{steps} accepted / {rejects} rejected steps")
        K[0] = k1
        for s in range(1, 7):
            dy = K[:s].T @ np.asarray(_A[s])
            K[s] = f(t + _C[s] * h, y + h * dy)
        y_new = y + h * (_B5 @ K)
        err_vec = h * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((err_vec / scale) ** 2))
        if err <= 1.0:
            t_new = t + h
            while j < len(t_eval) and t_eval[j] <= t_new * (1 + 1e-15):
                theta = (t_eval[j] - t) / h
                b = _P @ np.array([theta, theta ** 2, theta ** 3, theta ** 4])
                out[j] = y + h * (b @ K)
                j += 1
            t, y, k1 = t_new, y_new, K[6].copy()
            steps += 1
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            rejects += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
    return out, {"steps": steps, "rejects": rejects}


def _rk4(f, t0, t1, y0, t_eval, h):
    n_steps = int(np.ceil((t1 - t0) / h - 1e-9))
    h = (t1 - t0) / n_steps
    grid = t0 + h * np.arange(n_steps + 1)
    traj = np.empty((n_steps + 1, len(y0)))
    y = y0.copy()
    traj[0] = y
    for i in range(n_steps):
        t = grid[i]
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        traj[i + 1] = y
    idx = np.rint((np.asarray(t_eval) - t0) / h).astype(int)
    if np.any(np.abs(grid[np.clip(idx, 0, n_steps)] - t_eval) > 1e-9 * max(h, 1.0)):
        raise InvalidInputError("fixed-step sample times must lie on the step grid")
    return traj[idx], {"steps": n_steps, "rejects": 0}


def integrate(A, B, load, d0=None, t_span=(0.0, 1.0), t_eval=None, rtol=1e-8, atol=1e-11,
              method="dopri5", h=None, blocks=None, max_steps=10_000_000):
    """Integrate ``A d' + B d = f(t)``.

    Parameters
    ----------
    A, B : square matrices of one model (full or reduced)
    load : LoadHistory or None
        ``None`` means no excitation.
    d0 : initial state, zero by default
    t_span : (t0, t1)
    t_eval : sample times inside ``t_span``; 101 uniform samples by default
    rtol, atol : tolerances of the adaptive scheme
    method : ``"dopri5"`` (adaptive Dormand-Prince 5(4)) or ``"rk4"`` (fixed step ``h``)
    blocks : slices along which ``A`` is block diagonal; each block is factored once

    Returns
    -------
    TransientResult
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise InvalidInputError(f"empty time span {t_span}")
    n = A.shape[0]
    d0 = np.zeros(n) if d0 is None else np.asarray(d0, dtype=float)
    t_eval = np.linspace(t0, t1, 101) if t_eval is None else np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) <= 0) or t_eval[0] < t0 or t_eval[-1] > t1:
        raise InvalidInputError("t_eval must be strictly increasing inside t_span")
    rhs = _Rhs(A, B, load, blocks)
    if method == "dopri5":
        states, stats = _dopri5(rhs, t0, t1, d0, t_eval, rtol, atol, None, max_steps)
    elif method == "rk4":
        if h is None:
            raise InvalidInputError("fixed-step integration needs a step size h")
        states, stats = _rk4(rhs, t0, t1, d0, t_eval, h)
    else:
        raise InvalidInputError(f"unknown integration method {method!r}")
    stats["nfev"] = rhs.nfev
    return TransientResult(t=t_eval, states=states, stats=stats)


def summarize(result, n_s, n_t, T=None, dofs=None, n_nodes=None):
    """Fill ``max_theta`` and ``max_u`` of a result, in full coordinates.

    ``T`` maps reduced states back; ``max_u`` is the largest nodal displacement
    norm when ``dofs`` and ``n_nodes`` are given, else the largest DOF magnitude.
    """
    full = result.states if T is None else (T @ result.states.T).T
    u = full[:, :n_s]
    theta = full[:, 2 * n_s:2 * n_s + n_t]
    result.max_theta = np.abs(theta).max(axis=1) if n_t else np.zeros(len(full))
    if dofs is not None and n_nodes is not None:
        result.max_u = nodal_displacement_norm(u, dofs, n_nodes).max(axis=1)
    else:
        result.max_u = np.abs(u).max(axis=1)
    return result


@dataclass
class FieldDifference:
    t: np.ndarray
    theta: np.ndarray       # (n_samples, N_T) |d theta|
    u: np.ndarray           # (n_samples, N_s) |d u| per structural DOF
    max_theta: np.ndarray   # per sample
    max_u: np.ndarray       # per sample


def nodal_displacement_norm(u_dofs, dofs, n_nodes):
    """Per-node displacement norms from a stack of structural DOF vectors."""
    comp = np.zeros((u_dofs.shape[0], n_nodes, 2))
    comp[:, dofs.s_dof_node[:, 0], dofs.s_dof_node[:, 1]] = u_dofs
    return np.sqrt((comp ** 2).sum(axis=2))


def field_difference(full, reduced, r, dofs=None, n_nodes=None):
    """Full-minus-reconstructed differences of temperature and displacement fields.

    ``r`` is the reduced model that produced ``reduced``. When ``dofs`` and
    ``n_nodes`` are given, ``max_u`` is the largest nodal norm of the displacement
    difference; otherwise the largest DOF difference.
    """
    if len(full.t) != len(reduced.t) or np.any(
            np.abs(full.t - reduced.t) > 1e-12 * max(1.0, abs(full.t[-1]))):
        raise InvalidInputError("full and reduced results are sampled on different time grids")
    n_s, _ = r.full_dims
    diff = full.states - (r.T @ reduced.states.T).T
    d_u = diff[:, :n_s]
    d_th = diff[:, 2 * n_s:]
    if dofs is not None and n_nodes is not None:
        max_u = nodal_displacement_norm(d_u, dofs, n_nodes).max(axis=1)
    else:
        max_u = np.abs(d_u).max(axis=1)
    max_th = np.abs(d_th).max(axis=1) if d_th.shape[1] else np.zeros(len(full.t))
    return FieldDifference(full.t, np.abs(d_th), np.abs(d_u), max_th, max_u)
