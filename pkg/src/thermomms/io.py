"""Matrix Market and JSON export of assembled and reduced models."""

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .eigensolve import ModalBasis

__all__ = ["export_model", "export_reduced", "load_reduced"]


def _mmwrite(path, X, symmetric=False):
    X = sp.coo_matrix(X) if not sp.issparse(X) else X.tocoo()
    scipy.io.mmwrite(str(path), X, symmetry="symmetric" if symmetric else "general",
                     precision=17)


def export_model(model, out):
    """Write the coupled blocks of a :class:`CoupledSecondOrderModel`.

    Produces ``M_ss.mtx``, ``K_ss.mtx``, ``D_TT.mtx``, ``K_TT.mtx``, ``K_sT.mtx``
    and a ``model.json`` with the dimensions and material.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name, X in model.blocks().items():
        if name == "K_Ts":
            continue
        _mmwrite(out / f"{name}.mtx", X, symmetric=name != "K_sT")
    mat = model.material
    meta = {"N_s": model.n_s, "N_T": model.n_t, "thickness": model.thickness,
            "material": {k: getattr(mat, k) for k in
                         ("E", "nu", "rho", "alpha", "kappa", "cE_per_rho", "T0", "hypothesis")}}
    (out / "model.json").write_text(json.dumps(meta, indent=2))


def export_reduced(r, out, dofs=None):
    """Write ``A_r``, ``B_r`` and ``T`` of a reduced model plus ``manifest.json``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _mmwrite(out / "A_r.mtx", r.A, symmetric=True)
    _mmwrite(out / "B_r.mtx", r.B, symmetric=True)
    _mmwrite(out / "T.mtx", r.T)
    manifest = {"method": r.method, "n_s": r.n_s, "n_t": r.n_t, "dim": r.dim,
                "full_dims": list(r.full_dims) if r.full_dims else None,
                "timings": r.timings,
                "bases": {k: {"k": v.k, "metric": v.metric}
                          for k, v in r.bases.items() if isinstance(v, ModalBasis)}}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))


def load_reduced(out):
    """Read back an exported reduced model as ``(A_r, B_r, T, manifest)``."""
    out = Path(out)
    A = scipy.io.mmread(str(out / "A_r.mtx")).toarray()
    B = scipy.io.mmread(str(out / "B_r.mtx")).toarray()
    T = sp.csr_matrix(scipy.io.mmread(str(out / "T.mtx")))
    return A, B, T, json.loads((out / "manifest.json").read_text())
