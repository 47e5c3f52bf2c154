"""Scenario configuration and the assemble -> reduce -> analyze -> integrate pipeline."""

import copy
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (classify, relative_errors, spectra_report, write_eigen_csv,
                       write_error_csv, write_spectra_csv)
from .assembly import MaterialProps, assemble_system, celsius_to_kelvin
from .errors import ConfigError, ThermoMMSError
from .io import export_model, export_reduced
from .mesh import PlateGeometry, build_dof_map, generate_plate_mesh
from .reduction import reduce_mode_superposition, reduce_two_step, reduce_uncoupled
from .statespace import full_eigensolution, to_state_space
from .transient import (ExcitationSpec, StructuralLoad, ThermalLoad, build_load,
                        field_difference, integrate, nodal_displacement_norm, summarize)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

METHODS = ("uncoupled", "two-step", "superposition")
REDUCERS = {"uncoupled": reduce_uncoupled, "two-step": reduce_two_step}

_MATERIAL_FIELDS = ("E", "nu", "rho", "alpha", "kappa", "cE_per_rho")


@dataclass
class ScenarioConfig:
    name: str
    geometry: PlateGeometry
    nx: int
    ny: int
    material: MaterialProps
    bc: dict
    n_s: int
    n_t: int
    methods: tuple = METHODS
    convergence: list = field(default_factory=list)
    excitation: ExcitationSpec = None
    integrator: dict = field(default_factory=dict)
    transient: bool = True
    output_dir: str = "out"
    field_format: str = "csv"
    seed: int = 0
    raw: dict = field(default_factory=dict)

    def digest(self):
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def bundled_config(name):
    """Path of a scenario shipped with the package, e.g. ``"plate_macro"``."""
    ref = resources.files("thermomms") / "scenarios" / f"{name}.toml"
    return Path(str(ref))


def load_raw(path):
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _req(section, key, where, kind=float):
    if key not in section:
        raise ConfigError(f"missing field {where}.{key}")
    value = section[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {where}.{key} has invalid value {value!r}") from None


def parse_config(raw):
    """Build a :class:`ScenarioConfig`; raise :class:`ConfigError` naming the bad field."""
    raw = copy.deepcopy(raw)
    for sec in ("geometry", "mesh", "material", "reduction"):
        if not isinstance(raw.get(sec), dict):
            raise ConfigError(f"missing section [{sec}]")
    g, m, mat, red = raw["geometry"], raw["mesh"], raw["material"], raw["reduction"]
    try:
        geom = PlateGeometry(h=_req(g, "h", "geometry"), l=_req(g, "l", "geometry"),
                             t=_req(g, "t", "geometry"))
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from None
    nx, ny = _req(m, "nx", "mesh", int), _req(m, "ny", "mesh", int)
    if nx < 1 or ny < 1:
        raise ConfigError("mesh.nx and mesh.ny must be positive")

    props = {k: _req(mat, k, "material") for k in _MATERIAL_FIELDS}
    if "T0" in mat:
        props["T0"] = _req(mat, "T0", "material")
    elif "T0_celsius" in mat:
        props["T0"] = celsius_to_kelvin(_req(mat, "T0_celsius", "material"))
    else:
        raise ConfigError("missing field material.T0 (or material.T0_celsius)")
    props["hypothesis"] = mat.get("hypothesis", "plane_stress")
    try:
        material = MaterialProps(**props)
    except ValueError as exc:
        raise ConfigError(f"material: {exc}") from None

    bc = raw.get("bc", {})
    if not isinstance(bc, dict) or set(bc) - {"structural", "thermal"}:
        raise ConfigError("bc accepts only 'structural' and 'thermal' lists")

    methods = tuple(red.get("methods", METHODS))
    for name in methods:
        if name not in METHODS:
            raise ConfigError(f"reduction.methods: unknown method {name!r} (known: {', '.join(METHODS)})")
    convergence = [tuple(int(v) for v in pair) for pair in red.get("convergence", [])]

    exc = raw.get("excitation", {})
    try:
        excitation = ExcitationSpec(
            structural=[StructuralLoad(**ld) for ld in exc.get("structural", [])],
            thermal=[ThermalLoad(**ld) for ld in exc.get("thermal", [])])
    except TypeError as err:
        raise ConfigError(f"excitation: {err}") from None
    try:
        excitation.validate()
    except ValueError as err:
        raise ConfigError(f"excitation: {err}") from None

    integ = dict(raw.get("integrator", {}))
    integ.setdefault("method", "dopri5")
    integ.setdefault("rtol", 1e-8)
    integ.setdefault("atol", 1e-11)
    integ.setdefault("t_end", 0.005)
    integ.setdefault("n_samples", 26)
    integ.setdefault("snapshots", [])
    if integ["method"] not in ("dopri5", "rk4"):
        raise ConfigError(f"integrator.method: unknown method {integ['method']!r}")

    out = raw.get("output", {})
    fmt = out.get("field_format", "csv")
    if fmt not in ("csv", "npy"):
        raise ConfigError(f"output.field_format: unknown format {fmt!r}")
    return ScenarioConfig(
        name=raw.get("name", "scenario"), geometry=geom, nx=nx, ny=ny, material=material,
        bc={"structural": list(bc.get("structural", [])), "thermal": list(bc.get("thermal", []))},
        n_s=_req(red, "n_s", "reduction", int), n_t=_req(red, "n_t", "reduction", int),
        methods=methods, convergence=convergence, excitation=excitation, integrator=integ,
        transient=bool(raw.get("transient", {}).get("enabled", True)),
        output_dir=out.get("dir", "out"), field_format=fmt, seed=int(raw.get("seed", 0)), raw=raw)


def load_config(path):
    return parse_config(load_raw(path))


def validate(path):
    """Static checks of a config file; returns a list of diagnostic strings.

    An empty problem list yields ``["ok: N_s=..., N_T=..."]``.
    """
    try:
        cfg = load_config(path)
        mesh = generate_plate_mesh(cfg.geometry, cfg.nx, cfg.ny)
        dofs = build_dof_map(mesh, cfg.bc)
        cfg.excitation.validate(mesh)
    except (ConfigError, ValueError) as exc:
        return [str(exc)]
    problems = []
    if not cfg.bc["structural"]:
        problems.append("bc.structural is empty: the structural stiffness would be singular")
    if dofs.n_s < 1 or dofs.n_t < 1:
        problems.append(f"boundary conditions leave N_s={dofs.n_s}, N_T={dofs.n_t} free DOFs")
    pairs = [(cfg.n_s, cfg.n_t), *cfg.convergence]
    for ns, nt in pairs:
        if not 1 <= ns <= dofs.n_s:
            problems.append(f"reduction n_s={ns} exceeds N_s={dofs.n_s}" if ns > dofs.n_s
                            else f"reduction n_s={ns} must be at least 1")
        if not 0 <= nt <= dofs.n_t:
            problems.append(f"reduction n_t={nt} exceeds N_T={dofs.n_t}")
    if problems:
        return problems
    return [f"ok: N_s={dofs.n_s}, N_T={dofs.n_t}, state dimension {2 * dofs.n_s + dofs.n_t}"]


@dataclass
class Scenario:
    """Assembled objects of one scenario, built on demand."""
    config: ScenarioConfig

    def __post_init__(self):
        cfg = self.config
        self.mesh = generate_plate_mesh(cfg.geometry, cfg.nx, cfg.ny)
        self.dofs = build_dof_map(self.mesh, cfg.bc)
        self.model = assemble_system(self.mesh, cfg.material, self.dofs, cfg.geometry.t)
        self.ssm = to_state_space(self.model)
        self._full = None

    @classmethod
    def from_file(cls, path):
        return cls(load_config(path))

    def full_spectrum(self):
        if self._full is None:
            es = full_eigensolution(self.ssm)
            self._full = (es, classify(es, self.ssm.n_t))
        return self._full

    def reduce(self, method, n_s=None, n_t=None):
        n_s = self.config.n_s if n_s is None else n_s
        n_t = self.config.n_t if n_t is None else n_t
        if method == "superposition":
            return reduce_mode_superposition(self.ssm, n_s, n_t)
        return REDUCERS[method](self.model, n_s, n_t)

    def errors(self, r, n_thermal=None, n_structural=None):
        _, full = self.full_spectrum()
        red = classify(r.eigenvalues(), r.n_t)
        return relative_errors(full, red, n_thermal, n_structural)

    def load(self):
        return build_load(self.config.excitation, self.mesh, self.dofs, self.ssm)

    def time_grid(self):
        integ = self.config.integrator
        return np.linspace(0.0, float(integ["t_end"]), int(integ["n_samples"]))

    def _integrate(self, A, B, load, blocks=None, fixed_step=False):
        integ = self.config.integrator
        t_eval = self.time_grid()
        method = "rk4" if fixed_step else integ["method"]
        h = integ.get("h")
        if method == "rk4" and h is None:
            h = (t_eval[1] - t_eval[0]) / 1000
        return integrate(A, B, load, t_span=(0.0, t_eval[-1]), t_eval=t_eval,
                         rtol=integ["rtol"], atol=integ["atol"], method=method, h=h,
                         blocks=blocks)

    def transient_full(self, fixed_step=False):
        t0 = time.perf_counter()
        res = self._integrate(self.ssm.A, self.ssm.B, self.load(), self.ssm.slices(), fixed_step)
        res.stats["wall"] = time.perf_counter() - t0
        return summarize(res, self.ssm.n_s, self.ssm.n_t, dofs=self.dofs, n_nodes=self.mesh.n_nodes)

    def transient_reduced(self, r, fixed_step=False):
        t0 = time.perf_counter()
        res = self._integrate(r.A, r.B, self.load().project(r.T), None, fixed_step)
        res.stats["wall"] = time.perf_counter() - t0
        return summarize(res, self.ssm.n_s, self.ssm.n_t, T=r.T, dofs=self.dofs,
                         n_nodes=self.mesh.n_nodes)


def _write_fields(path, mesh, dofs, ssm, state, fmt):
    n = mesh.n_nodes
    theta = np.zeros(n)
    theta[dofs.t_dof_node] = state[2 * ssm.n_s:]
    u = np.zeros((n, 2))
    u[dofs.s_dof_node[:, 0], dofs.s_dof_node[:, 1]] = state[:ssm.n_s]
    table = np.column_stack([np.arange(n), mesh.nodes, theta, u])
    if fmt == "npy":
        np.save(path.with_suffix(".npy"), table)
    else:
        np.savetxt(path.with_suffix(".csv"), table, delimiter=",", fmt="%.17g",
                   header="node,x,y,theta,ux,uy", comments="")


def run(config_path, out=None, methods=None, fixed_step=False, threads=1, export=False):
    """Execute a scenario and write its artifacts; returns a summary dict."""
    cfg = load_config(config_path)
    if methods:
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise ConfigError(f"--methods: unknown method(s) {', '.join(bad)}")
        cfg.methods = tuple(methods)
    out = Path(out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problems = validate(config_path)
    if not problems[0].startswith("ok"):
        raise ConfigError("; ".join(problems))

    sc = Scenario(cfg)
    es, full = sc.full_spectrum()
    classes = np.empty(es.count, dtype=object)
    classes[:] = "structural"
    classes[full.thermal_index] = "thermal"
    write_eigen_csv(out / "full_eigenvalues.csv", es.values, classes)

    reduced, reports, timings, spectra = {}, {}, {}, [("full", full)]
    for name in cfg.methods:
        r = sc.reduce(name)
        reduced[name] = r
        timings[name] = r.timings["construct"]
        rep = sc.errors(r)
        reports[name] = rep
        spectra.append((name, classify(r.eigenvalues(), r.n_t)))
        if export:
            export_reduced(r, out / "reduced" / name, dofs=None)
    write_error_csv(out / "eigen_errors.csv", reports)
    report = spectra_report(spectra)
    write_spectra_csv(out / "spectra.csv", report)

    convergence = {}
    for ns, nt in cfg.convergence:
        for name in (m for m in cfg.methods if m in REDUCERS):
            rep = sc.errors(sc.reduce(name, ns, nt))
            convergence.setdefault(name, []).append({"n_s": ns, "n_t": nt, **rep.summary()})

    transient = {}
    if cfg.transient and (cfg.excitation.structural or cfg.excitation.thermal):
        transient = _run_transient(sc, reduced, out, fixed_step, threads)

    order = sorted(timings, key=timings.get)
    timing_doc = {"order": order, "seconds": {k: timings[k] for k in order}}
    expected = [m for m in ("uncoupled", "two-step", "superposition") if m in timings]
    timing_doc["table1_pattern"] = "pass" if order == expected else "warn"
    (out / "timings.json").write_text(json.dumps(timing_doc, indent=2))

    summary = {
        "scenario": cfg.name, "N_s": sc.ssm.n_s, "N_T": sc.ssm.n_t,
        "classification_tol": full.tol,
        "errors": {k: v.summary() for k, v in reports.items()},
        "convergence": convergence,
        "overlap": report["overlap"],
        "transient": transient,
    }
    manifest = {"config": str(config_path), "config_sha256": cfg.digest(), "version": __version__,
                "numpy": np.__version__, "scipy": __import__("scipy").__version__,
                "summary": summary}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_jsonable))
    return summary


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)


def _run_transient(sc, reduced, out, fixed_step, threads):
    full = sc.transient_full(fixed_step)
    runs = {name: r for name, r in reduced.items()}
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = {name: pool.submit(sc.transient_reduced, r, fixed_step) for name, r in runs.items()}
        results = {name: fut.result() for name, fut in futures.items()}

    rows = [("full", t, th, u) for t, th, u in zip(full.t, full.max_theta, full.max_u)]
    summary = {"full_wall": full.stats["wall"], "window": [float(full.t[0]), float(full.t[-1])]}
    diffs = {}
    for name, res in results.items():
        rows += [(name, t, th, u) for t, th, u in zip(res.t, res.max_theta, res.max_u)]
        fd = field_difference(full, res, runs[name], sc.dofs, sc.mesh.n_nodes)
        diffs[name] = fd
        summary[name] = {"max_dtheta": float(fd.max_theta.max()), "max_du": float(fd.max_u.max()),
                         "wall": res.stats["wall"]}
    with open(out / "transient_max.csv", "w") as fh:
        fh.write("model,t,max_abs_theta,max_norm_u\n")
        for name, t, th, u in rows:
            fh.write(f"{name},{t!r},{float(th)!r},{float(u)!r}\n")

    snaps = sc.config.integrator.get("snapshots", [])
    if snaps:
        fdir = out / "fields"
        fdir.mkdir(exist_ok=True)
        for ts in snaps:
            i = int(np.argmin(np.abs(full.t - ts)))
            _write_fields(fdir / f"full_t{i:04d}", sc.mesh, sc.dofs, sc.ssm, full.states[i],
                          sc.config.field_format)
            for name, res in results.items():
                rec = runs[name].T @ res.states[i]
                _write_fields(fdir / f"diff_{name}_t{i:04d}", sc.mesh, sc.dofs, sc.ssm,
                              full.states[i] - rec, sc.config.field_format)
    return summary


def export_assembled(config_path, out):
    sc = Scenario(load_config(config_path))
    export_model(sc.model, Path(out))
    return sc
