"""Command line entry point: ``thermomms {run,validate,assemble,eig}``."""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, ThermoMMSError

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def _resolve(path):
    """Accept a file path or the name of a bundled scenario."""
    from .scenario import bundled_config
    p = Path(path)
    if p.exists() or p.suffix:
        return p
    return bundled_config(path)


def _cmd_run(args):
    from .scenario import run
    summary = run(_resolve(args.config), out=args.out, methods=args.methods,
                  fixed_step=args.fixed_step, threads=args.threads, export=args.export)
    print(json.dumps({"errors": summary["errors"], "overlap": summary["overlap"]}, indent=2))


def _cmd_validate(args):
    from .scenario import validate
    diags = validate(_resolve(args.config))
    for line in diags:
        print(line)
    return EXIT_OK if diags[0].startswith("ok") else EXIT_CONFIG


def _cmd_assemble(args):
    from .scenario import export_assembled, load_config
    path = _resolve(args.config)
    out = Path(args.out or load_config(path).output_dir) / "matrices"
    sc = export_assembled(path, out)
    print(f"wrote blocks for N_s={sc.ssm.n_s}, N_T={sc.ssm.n_t} to {out}")


def _cmd_eig(args):
    from .analysis import spectra_report, write_eigen_csv, write_spectra_csv
    from .scenario import Scenario, load_config
    path = _resolve(args.config)
    cfg = load_config(path)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    sc = Scenario(cfg)
    es, full = sc.full_spectrum()
    classes = np.full(es.count, "structural", dtype=object)
    classes[full.thermal_index] = "thermal"
    write_eigen_csv(out / "full_eigenvalues.csv", es.values, classes)
    report = spectra_report([("full", full)])
    write_spectra_csv(out / "spectra.csv", report)
    print(f"{full.n_thermal} thermal, {full.n_pairs} structural pairs "
          f"(tolerance {full.tol:g}); overlap {report['overlap']['full']}")


def build_parser():
    p = argparse.ArgumentParser(prog="thermomms", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, func, helptext in (("run", _cmd_run, "full pipeline"),
                                 ("validate", _cmd_validate, "static config checks"),
                                 ("assemble", _cmd_assemble, "export assembled matrices"),
                                 ("eig", _cmd_eig, "full coupled spectrum only")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True,
                       help="TOML/JSON file or bundled scenario name (plate_macro, plate_micro)")
        s.set_defaults(func=func)
        if name != "validate":
            s.add_argument("--out", help="output directory (default from config)")
        if name == "run":
            s.add_argument("--methods", type=lambda v: [m.strip() for m in v.split(",") if m.strip()],
                           help="comma-separated subset of uncoupled,two-step,superposition")
            s.add_argument("--fixed-step", action="store_true",
                           help="use classical RK4 with a fixed step for reproducible output")
            s.add_argument("--threads", type=int, default=1,
                           help="concurrent reduced-model integrations")
            s.add_argument("--export", action="store_true",
                           help="also write reduced models in Matrix Market format")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ThermoMMSError as exc:
        print(f"numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
