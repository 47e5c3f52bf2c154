"""Structured quadrilateral meshes for rectangular plates and DOF bookkeeping."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["PlateGeometry", "Mesh", "DofMap", "generate_plate_mesh", "build_dof_map",
           "jacobian_determinants", "GAUSS_2X2"]

_G = 1.0 / np.sqrt(3.0)
#: 2x2 Gauss points in the reference square, unit weights
GAUSS_2X2 = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])

EDGE_SETS = ("left_edge", "right_edge", "bottom_edge", "top_edge")


@dataclass(frozen=True)
class PlateGeometry:
    """Rectangular plate of height ``h`` (y), width ``l`` (x) and thickness ``t``, all in m."""
    h: float
    l: float
    t: float

    def __post_init__(self):
        for name in ("h", "l", "t"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"plate {name} must be positive, got {value!r}")


@dataclass
class Mesh:
    nodes: np.ndarray                      # (n_nodes, 2)
    elements: np.ndarray                   # (n_elem, 4), counterclockwise
    node_sets: dict = field(default_factory=dict)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    def node_set(self, name):
        try:
            return self.node_sets[name]
        except KeyError:
            raise ValueError(f"unknown node set {name!r}; known sets: {sorted(self.node_sets)}") from None


def generate_plate_mesh(geom, nx, ny):
    """Uniform ``nx`` x ``ny`` grid of bilinear quads spanning ``[0, l] x [0, h]``.

    Node ``(i, j)`` (column ``i``, row ``j``) has index ``j * (nx + 1) + i``.
    Besides the four edge sets, the mesh carries ``corner_*`` single-node sets and
    ``right_mid`` / ``left_mid`` (node nearest the middle of that edge).
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError(f"element counts must be positive integers, got nx={nx!r}, ny={ny!r}")
    nx, ny = int(nx), int(ny)
    x = np.linspace(0.0, geom.l, nx + 1)
    y = np.linspace(0.0, geom.h, ny + 1)
    X, Y = np.meshgrid(x, y)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    n0 = idx[:-1, :-1].ravel()
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])

    jm = ny // 2
    node_sets = {
        "left_edge": idx[:, 0].copy(),
        "right_edge": idx[:, -1].copy(),
        "bottom_edge": idx[0, :].copy(),
        "top_edge": idx[-1, :].copy(),
        "corner_bottom_left": idx[:1, 0].copy(),
        "corner_bottom_right": idx[:1, -1].copy(),
        "corner_top_left": idx[-1:, 0].copy(),
        "corner_top_right": idx[-1:, -1].copy(),
        "left_mid": idx[jm:jm + 1, 0].copy(),
        "right_mid": idx[jm:jm + 1, -1].copy(),
        "all": idx.ravel().copy(),
    }
    return Mesh(nodes=nodes, elements=elements, node_sets=node_sets)


def shape_functions(xi, eta):
    """Bilinear shape functions and their reference derivatives, shape (4,), (2, 4)."""
    N = 0.25 * np.array([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                         (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])
    dN = 0.25 * np.array([[-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)],
                          [-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)]])
    return N, dN


def jacobian_determinants(coords):
    """Jacobian determinants of one element at the 2x2 Gauss points."""
    dets = []
    for xi, eta in GAUSS_2X2:
        _, dN = shape_functions(xi, eta)
        dets.append(np.linalg.det(dN @ coords))
    return np.array(dets)


@dataclass(frozen=True)
class DofMap:
    """Free DOF numbering for both fields.

    ``s_node_dof[n, c]`` is the structural free-DOF index of component ``c`` (0=x, 1=y)
    at node ``n``, or -1 when constrained; ``t_node_dof[n]`` likewise for temperature.
    """
    s_node_dof: np.ndarray
    t_node_dof: np.ndarray
    s_dof_node: np.ndarray      # (N_s, 2): node, component
    t_dof_node: np.ndarray      # (N_T,)

    @property
    def n_s(self):
        return len(self.s_dof_node)

    @property
    def n_t(self):
        return len(self.t_dof_node)


def build_dof_map(mesh, bc=None):
    """Number free DOFs node-major with x before y.

    ``bc`` maps ``"structural"`` and ``"thermal"`` to lists of node-set names.
    A structural entry may carry a component suffix (``"left_edge:x"``) to fix a
    single direction; otherwise both directions are fixed.
    """
    bc = bc or {}
    unknown = set(bc) - {"structural", "thermal"}
    if unknown:
        raise ValueError(f"unknown boundary-condition field(s): {sorted(unknown)}")
    n = mesh.n_nodes
    s_fixed = np.zeros((n, 2), dtype=bool)
    t_fixed = np.zeros(n, dtype=bool)
    for entry in bc.get("structural", []):
        name, _, comp = entry.partition(":")
        nodes = mesh.node_set(name)
        if comp == "":
            s_fixed[nodes, :] = True
        elif comp in ("x", "y"):
            s_fixed[nodes, "xy".index(comp)] = True
        else:
            raise ValueError(f"bad component {comp!r} in structural BC {entry!r}")
    for name in bc.get("thermal", []):
        t_fixed[mesh.node_set(name)] = True

    s_node_dof = -np.ones((n, 2), dtype=np.int64)
    free = ~s_fixed.ravel()
    s_node_dof.ravel()[free] = np.arange(free.sum())
    flat = np.flatnonzero(free)
    s_dof_node = np.column_stack([flat // 2, flat % 2])

    t_node_dof = -np.ones(n, dtype=np.int64)
    t_node_dof[~t_fixed] = np.arange((~t_fixed).sum())
    t_dof_node = np.flatnonzero(~t_fixed)
    return DofMap(s_node_dof, t_node_dof, s_dof_node, t_dof_node)
