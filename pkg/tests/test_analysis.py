import csv

import numpy as np
import pytest

from thermomms.analysis import (classify, relative_errors, spectra_report, write_eigen_csv,
                                write_error_csv, write_spectra_csv)
from thermomms.errors import ClassificationError


def spectrum(thermal, structural):
    s = np.asarray(structural, dtype=complex)
    return np.concatenate([np.asarray(thermal, dtype=complex), s, s.conj()])


def test_classify_orders_classes():
    mu = spectrum([5.0, 0.2, 1.0], [3 + 40j, 1 + 10j])
    cs = classify(mu, 3)
    np.testing.assert_array_equal(cs.thermal, [0.2, 1.0, 5.0])
    np.testing.assert_array_equal(cs.structural, [1 + 10j, 3 + 40j])
    assert cs.tol == 1e-8
    np.testing.assert_array_equal(mu[cs.thermal_index], cs.thermal)


def test_classify_widens_tolerance():
    cs = classify(np.array([1.0 + 3e-7j, 1.0 - 3e-7j, 2.0, 1 + 10j, 1 - 10j]), 3)
    assert cs.tol == pytest.approx(1e-6)
    with pytest.raises(ClassificationError):
        classify(np.array([1.0 + 1e-2j, 1.0 - 1e-2j, 2.0]), 3)


def test_relative_errors_indexwise():
    full = classify(spectrum([1.0, 2.0, 4.0], [1j * 10, 1j * 20]), 3)
    red = classify(spectrum([1.1, 2.0], [1j * 10.5]), 2)
    rep = relative_errors(full, red)
    np.testing.assert_allclose(rep.thermal, [0.1, 0.0])
    np.testing.assert_allclose(rep.structural, [0.05])
    assert rep.max == pytest.approx(0.1)
    assert rep.summary()["n_structural"] == 1
    assert relative_errors(full, red, n_thermal=1).thermal.size == 1


def test_overlap_interval():
    a = classify(spectrum([1.0, 50.0], [20j, 100j]), 2)
    b = classify(spectrum([1.0, 5.0], [20j, 100j]), 2)
    rep = spectra_report([("a", a), ("b", b)])
    assert rep["overlap"] == {"a": (20.0, 50.0), "b": None}
    assert len(rep["rows"]) == 8


def test_csv_writers(tmp_path):
    full = classify(spectrum([1.0, 2.0], [10j]), 2)
    red = classify(spectrum([1.5], [11j]), 1)
    write_error_csv(tmp_path / "e.csv", {"m": relative_errors(full, red)})
    rows = list(csv.DictReader(open(tmp_path / "e.csv")))
    assert [r["class"] for r in rows] == ["thermal", "structural"]
    assert float(rows[0]["rel_error"]) == 0.5
    write_spectra_csv(tmp_path / "s.csv", spectra_report([("full", full)]))
    assert open(tmp_path / "s.csv").readline().strip() == "model,class,index,abs_mu"
    write_eigen_csv(tmp_path / "v.csv", np.array([1 + 2j]), ["structural"])
    assert open(tmp_path / "v.csv").read().splitlines()[1] == "0,1.0,2.0,structural"
