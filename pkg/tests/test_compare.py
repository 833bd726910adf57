import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkpca import analytic, compare, noise, processes
from walkpca.errors import DimensionMismatchError, DomainError
from walkpca.pca import pca_trajectory
from walkpca.processes import ProcessSpec, Trajectory


def test_identical_spectra_have_zero_error():
    pred = analytic.predicted_spectrum("flat", 100, 30)
    m = compare.spectrum_error(pred, pred, (1, 20))
    assert m.per_k == [0.0] * 20 and m.median_rel_error == 0.0 and m.max_rel_error == 0.0
    assert m.k == list(range(1, 21))


def test_spectrum_error_is_scale_invariant_on_ratios():
    rng = np.random.default_rng(0)
    e = np.sort(rng.random(30))[::-1]
    p = np.sort(rng.random(30))[::-1]
    a = compare.spectrum_error(e, p, (1, 10))
    b = compare.spectrum_error(7.5 * e, 7.5 * p, (1, 10))
    np.testing.assert_allclose(a.per_k, b.per_k, rtol=1e-12)


def test_raw_scale_compares_eigenvalues():
    m = compare.spectrum_error(np.array([2.0, 1.0]), np.array([1.0, 1.0]), (1, 2), scale="raw")
    assert m.per_k == [1.0, 0.0] and m.scale == "raw"


def test_spectrum_error_rejects_bad_ranges():
    x = np.ones(5)
    with pytest.raises(DomainError):
        compare.spectrum_error(x, x, (3, 2))
    with pytest.raises(DomainError):
        compare.spectrum_error(x, x, (0, 2))
    with pytest.raises(DimensionMismatchError):
        compare.spectrum_error(x, x, (1, 6))
    with pytest.raises(DomainError):
        compare.spectrum_error(x, x, (1, 2), scale="log")


def test_sorting_bias_is_flagged_for_nearly_flat_ou():
    spec = ProcessSpec("ou", alpha=0.9)
    t = processes.simulate(spec, 300, noise.make_isotropic(2000), 0)
    m = compare.spectrum_error(pca_trajectory(t, 40), analytic.predicted_spectrum(spec, 300, 40), (1, 20))
    assert m.sorting_bias["flagged"]
    flat = processes.simulate(ProcessSpec("flat"), 300, noise.make_isotropic(2000), 0)
    m = compare.spectrum_error(pca_trajectory(flat, 40), analytic.predicted_spectrum("flat", 300, 40), (1, 20))
    assert not m.sorting_bias["flagged"]


def test_projection_match():
    c = analytic.lissajous_projection(3, 500, 2.0)
    assert compare.projection_match(c, 3, 500, 2.0) == pytest.approx(1.0)
    assert compare.projection_match(-c, 3, 500, 2.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        compare.projection_match(np.ones(500), 3, 500, 2.0)
    with pytest.raises(DimensionMismatchError):
        compare.projection_match(c[:-1], 3, 500, 2.0)


def test_flat_walk_projections_follow_cosines():
    t = processes.simulate(ProcessSpec("flat"), 1000, noise.make_isotropic(10000), 2)
    r = pca_trajectory(t, 5)
    m = compare.projection_metrics(r.projections[:, :4], [1, 2, 3, 4], 1000, r.eigenvalues[:4])
    assert min(m["per_k_corr"]) >= 0.9
    assert m["zero_crossings"][2] == 3


@pytest.mark.parametrize("k", [1, 2, 5, 17])
def test_zero_crossings_of_cosines(k):
    n = 400
    t = np.arange(1, n + 1)
    assert compare.count_zero_crossings(np.cos(np.pi * k * t / n)) == k


def test_zero_crossings_ignore_exact_zeros():
    assert compare.count_zero_crossings(np.full(10, 2.0)) == 0
    assert compare.count_zero_crossings([1.0, 0.0, -1.0]) == 1
    assert compare.count_zero_crossings([1.0, 0.0, 1.0]) == 0


@settings(max_examples=50)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=50))
def test_metrics_are_sign_invariant(xs):
    xs = np.array(xs)
    assert compare.count_zero_crossings(xs) == compare.count_zero_crossings(-xs)


def test_plateau_estimate():
    assert compare.plateau_estimate(np.full(10, 3.5), 0.2) == 3.5
    s = np.random.default_rng(0).random(37)
    assert compare.plateau_estimate(s, 1.0) == np.mean(s)
    assert compare.plateau_estimate(np.arange(10.0), 0.25) == pytest.approx(np.mean([7.0, 8.0, 9.0]))
    with pytest.raises(DomainError):
        compare.plateau_estimate(s, 0.0)


def test_flat_walk_has_no_plateau():
    est = [compare.plateau_estimate(processes.distance_from_origin(
        processes.simulate(ProcessSpec("flat"), n, noise.make_isotropic(1000), 0))) for n in (200, 800)]
    assert est[1] > 1.5 * est[0]


def test_iterate_average_error():
    X = np.tile([1.0, -2.0], (6, 1))
    np.testing.assert_array_equal(compare.iterate_average_error(Trajectory(X), [1.0, -2.0]), 0.0)
    X = np.array([[2.0], [0.0], [1.0]])
    np.testing.assert_allclose(compare.iterate_average_error(X), [2.0, 1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        compare.iterate_average_error(Trajectory(X), [0.0, 0.0])


def test_report_serialises_to_json():
    pred = analytic.predicted_spectrum("flat", 50, 10)
    rep = compare.ComparisonReport(spectrum=compare.spectrum_error(pred, pred, (1, 5)),
                                   plateau=compare.plateau_metrics(np.ones(10), 0.2, 1.0))
    rep.extra["note"] = "x"
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["spectrum"]["median_rel_error"] == 0.0
    assert doc["plateau"] == {"estimate": 1.0, "predicted": 1.0, "rel_dev": 0.0, "tail_fraction": 0.2}
    assert doc["note"] == "x" and doc["projection"] is None
