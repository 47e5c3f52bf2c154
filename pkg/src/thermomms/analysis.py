"""Spectrum classification and relative eigenvalue errors.

Purely real eigenvalues of the coupled pencil are thermal-dominant; the complex
conjugate pairs are structural-dominant.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ClassificationError
from .statespace import REAL_TOL

__all__ = ["ClassifiedSpectrum", "ErrorReport", "classify", "relative_errors",
           "spectra_report", "write_error_csv", "write_spectra_csv", "write_eigen_csv"]

MAX_TOL = 1e-4


@dataclass
class ClassifiedSpectrum:
    thermal: np.ndarray            # real, ascending |mu|
    structural: np.ndarray         # Im > 0 representatives, ascending Im
    tol: float
    thermal_index: np.ndarray      # positions in the input array
    structural_index: np.ndarray

    @property
    def n_thermal(self):
        return len(self.thermal)

    @property
    def n_pairs(self):
        return len(self.structural)


def classify(spec, n_thermal_expected, tol=REAL_TOL, max_tol=MAX_TOL):
    """Split a conjugate-closed spectrum into thermal and structural classes.

    If the number of purely real eigenvalues differs from ``n_thermal_expected``
    the tolerance is widened tenfold at a time up to ``max_tol``; the tolerance
    finally used is reported on the result.

    Raises
    ------
    ClassificationError
        When the counts cannot be matched.
    """
    mu = np.asarray(getattr(spec, "values", spec), dtype=complex)
    t = tol
    while True:
        real = np.abs(mu.imag) <= t * np.abs(mu)
        n_real = int(real.sum())
        if n_real == n_thermal_expected or n_real > n_thermal_expected or t * 10 > max_tol * (1 + 1e-9):
            break
        t *= 10
    if n_real != n_thermal_expected:
        raise ClassificationError(
            f"found {n_real} purely real eigenvalues at tolerance {t:g}, expected {n_thermal_expected}")
    if (len(mu) - n_real) % 2:
        raise ClassificationError("odd number of complex eigenvalues")

    ti = np.flatnonzero(real)
    ti = ti[np.argsort(np.abs(mu[ti]), kind="stable")]
    si = np.flatnonzero(~real & (mu.imag > 0))
    if 2 * len(si) != len(mu) - n_real:
        raise ClassificationError("complex eigenvalues do not form conjugate pairs")
    si = si[np.lexsort((mu[si].real, mu[si].imag))]
    return ClassifiedSpectrum(thermal=mu[ti].real.copy(), structural=mu[si].copy(), tol=t,
                              thermal_index=ti, structural_index=si)


@dataclass
class ErrorReport:
    thermal: np.ndarray
    structural: np.ndarray
    thermal_pairs: list       # (full, reduced) tuples
    structural_pairs: list

    @staticmethod
    def _summary(e):
        return (float(e.max()), float(e.mean())) if e.size else (0.0, 0.0)

    @property
    def thermal_max(self):
        return self._summary(self.thermal)[0]

    @property
    def thermal_mean(self):
        return self._summary(self.thermal)[1]

    @property
    def structural_max(self):
        return self._summary(self.structural)[0]

    @property
    def structural_mean(self):
        return self._summary(self.structural)[1]

    @property
    def max(self):
        return max(self.thermal_max, self.structural_max)

    def summary(self):
        return {"thermal_max": self.thermal_max, "thermal_mean": self.thermal_mean,
                "structural_max": self.structural_max, "structural_mean": self.structural_mean,
                "n_thermal": int(self.thermal.size), "n_structural": int(self.structural.size)}


def relative_errors(full, reduced, n_thermal=None, n_structural=None):
    """Index-wise relative errors ``|mu_F - mu_r| / |mu_F|`` within each class.

    By default every eigenvalue the reduced model carries is tracked.
    """
    nt = reduced.n_thermal if n_thermal is None else n_thermal
    ns = reduced.n_pairs if n_structural is None else n_structural
    nt = min(nt, full.n_thermal, reduced.n_thermal)
    ns = min(ns, full.n_pairs, reduced.n_pairs)
    ft, rt = full.thermal[:nt], reduced.thermal[:nt]
    fs, rs = full.structural[:ns], reduced.structural[:ns]
    et = np.abs(ft - rt) / np.abs(ft)
    es = np.abs(fs - rs) / np.abs(fs)
    return ErrorReport(et, es, list(zip(ft, rt)), list(zip(fs, rs)))


def spectra_report(models):
    """Absolute spectra per class and the thermal/structural overlap interval.

    ``models`` is a sequence of ``(label, ClassifiedSpectrum)``. Returns a dict with
    ``rows`` (label, class, index, |mu|) and, per label, the ``overlap`` interval
    ``(lo, hi)`` of the two classes' ``|mu|`` ranges, or ``None`` when disjoint.
    """
    rows = []
    overlap = {}
    for label, cs in models:
        for i, v in enumerate(np.abs(cs.thermal)):
            rows.append((label, "thermal", i, float(v)))
        for i, v in enumerate(np.abs(cs.structural)):
            rows.append((label, "structural", i, float(v)))
        if cs.n_thermal and cs.n_pairs:
            at, ast = np.abs(cs.thermal), np.abs(cs.structural)
            lo, hi = max(at.min(), ast.min()), min(at.max(), ast.max())
            overlap[label] = (float(lo), float(hi)) if lo <= hi else None
        else:
            overlap[label] = None
    return {"rows": rows, "overlap": overlap}


def write_eigen_csv(path, values, classes=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "Re", "Im", "class"])
        for i, mu in enumerate(values):
            w.writerow([i, repr(float(mu.real)), repr(float(mu.imag)),
                        "" if classes is None else classes[i]])


def write_error_csv(path, reports):
    """``reports`` maps a method label to an :class:`ErrorReport`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "class", "index", "full_Re", "full_Im", "reduced_Re", "reduced_Im",
                    "rel_error"])
        for label, rep in reports.items():
            for cls, pairs, errs in (("thermal", rep.thermal_pairs, rep.thermal),
                                     ("structural", rep.structural_pairs, rep.structural)):
                for i, ((f, r), e) in enumerate(zip(pairs, errs)):
                    f, r = complex(f), complex(r)
                    w.writerow([label, cls, i, repr(f.real), repr(f.imag), repr(r.real),
                                repr(r.imag), repr(float(e))])


def write_spectra_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "class", "index", "abs_mu"])
        for row in report["rows"]:
            w.writerow([row[0], row[1], row[2], repr(row[3])])
