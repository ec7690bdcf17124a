"""Local linear smoothing: prediction, fallbacks, and span selection."""

import warnings

import numpy as np
import pytest

from rankmargin.errors import DegeneratePredictionWarning, ParameterError
from rankmargin.loess import (
    DEFAULT_SPAN_GRID,
    fit_loess,
    predict_loess,
    predict_loess_arrays,
    select_span_cv,
)
from rankmargin.synth import generate_synthetic
from util import make_dataset

import oracles


def test_default_span_grid():
    assert DEFAULT_SPAN_GRID[0] == 0.05
    assert DEFAULT_SPAN_GRID[-1] == 1.0
    assert len(DEFAULT_SPAN_GRID) == 20


def test_neighborhood_sizes():
    data = generate_synthetic(4518, seed=0)
    assert fit_loess(data, 0.3).neighborhood_size == 1356
    assert fit_loess(data, 1.0).neighborhood_size == 4518


def test_span_validation():
    data = generate_synthetic(100, seed=0, rank_max=30)
    for bad in (0.0, -0.2, 1.0000001):
        with pytest.raises(ParameterError):
            fit_loess(data, bad)
    with pytest.raises(ParameterError):
        fit_loess(data, 1e-4)  # keeps a single point; a plane needs 3


def test_reproduces_plane_exactly():
    rng = np.random.default_rng(15)
    road = rng.integers(1, 51, 200)
    home = rng.integers(1, 51, 200)
    movs = 2.0 - 0.3 * road + 0.4 * home
    fit = fit_loess(make_dataset(road, home, movs), 0.35)
    queries_r = np.array([10.0, 25.5, 40.0, 7.3])
    queries_h = np.array([30.0, 12.2, 40.0, 44.9])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        preds = predict_loess_arrays(fit, queries_r, queries_h)
    expected = 2.0 - 0.3 * queries_r + 0.4 * queries_h
    np.testing.assert_allclose(preds, expected, atol=1e-8)


def test_antisymmetric_configuration_predicts_zero():
    # mirrored pairs around the query with opposite marks: the local plane's
    # intercept vanishes by symmetry
    offsets = [(2, 0), (0, 3), (2, 2), (4, 4)]
    marks = [5.0, 1.5, -2.0, 8.0]
    road, home, movs = [], [], []
    for (dr, dh), v in zip(offsets, marks):
        road += [10 + dr, 10 - dr]
        home += [10 + dh, 10 - dh]
        movs += [v, -v]
    fit = fit_loess(make_dataset(road, home, movs), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert predict_loess(fit, 10.0, 10.0) == pytest.approx(0.0, abs=1e-10)


def test_matches_brute_force_reference():
    rng = np.random.default_rng(16)
    worst = 0.0
    for trial in range(10):
        n = int(rng.integers(100, 501))
        rank_max = int(rng.integers(30, 301))
        data = generate_synthetic(n, seed=trial + 100, rank_max=rank_max)
        span = float(rng.uniform(0.2, 0.9))
        fit = fit_loess(data, span)
        for _ in range(6):
            qr = float(rng.uniform(1, rank_max))
            qh = float(rng.uniform(1, rank_max))
            got = predict_loess(fit, qr, qh)
            want = oracles.loess_predict_reference(
                list(data.road_ranks), list(data.home_ranks), list(data.movs),
                span, qr, qh,
            )
            worst = max(worst, abs(got - want))
    assert worst <= 1e-8


def test_arrays_match_scalar():
    data = generate_synthetic(150, seed=17, rank_max=40)
    fit = fit_loess(data, 0.4)
    r = np.array([3.0, 18.5, 39.0])
    h = np.array([22.0, 5.5, 1.0])
    batch = predict_loess_arrays(fit, r, h)
    singles = [predict_loess(fit, ri, hi) for ri, hi in zip(r, h)]
    np.testing.assert_array_equal(batch, singles)


class TestDegenerateNeighborhoods:
    def test_all_neighbors_at_query(self):
        data = make_dataset([5] * 6, [5] * 6, [1.0, 2, 3, 4, 5, 6])
        fit = fit_loess(data, 0.5)
        with pytest.warns(DegeneratePredictionWarning):
            assert predict_loess(fit, 5.0, 5.0) == pytest.approx(3.5)

    def test_ring_around_query(self):
        data = make_dataset(
            [9, 11, 10, 10], [10, 10, 9, 11], [2.0, 4.0, 6.0, 8.0]
        )
        fit = fit_loess(data, 1.0, standardize=False)
        with pytest.warns(DegeneratePredictionWarning):
            assert predict_loess(fit, 10.0, 10.0) == pytest.approx(5.0)

    def test_fewer_than_three_inside(self):
        data = make_dataset(
            [11, 10, 12, 10], [10, 11, 10, 12], [3.0, 7.0, 100.0, 200.0]
        )
        fit = fit_loess(data, 1.0, standardize=False)
        with pytest.warns(DegeneratePredictionWarning):
            # the two distance-2 points tie at d_max and drop out; the two
            # distance-1 points share a tricube weight, so their plain mean
            assert predict_loess(fit, 10.0, 10.0) == pytest.approx(5.0)

    def test_collinear_neighborhood(self):
        idx = np.arange(1, 11)
        data = make_dataset(idx, idx, 1.0 + 0.5 * idx)
        fit = fit_loess(data, 1.0)
        with pytest.warns(DegeneratePredictionWarning):
            got = predict_loess(fit, 3.0, 5.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            want = oracles.loess_predict_reference(
                list(data.road_ranks), list(data.home_ranks), list(data.movs),
                1.0, 3.0, 5.0,
            )
        assert got == pytest.approx(want, abs=1e-12)


class TestSpanSelection:
    def test_deterministic(self):
        data = generate_synthetic(200, seed=18, rank_max=50)
        a = select_span_cv(data, span_grid=[0.3, 0.6], folds=4, seed=2)
        b = select_span_cv(data, span_grid=[0.3, 0.6], folds=4, seed=2)
        assert a == b
        c = select_span_cv(data, span_grid=[0.3, 0.6], folds=4, seed=3)
        assert c[1] != a[1]

    def test_singleton_grid(self):
        data = generate_synthetic(80, seed=19, rank_max=30)
        best, curve = select_span_cv(data, span_grid=[0.4], folds=4, seed=0)
        assert best == 0.4
        assert len(curve) == 1

    def test_grid_and_fold_errors(self):
        data = generate_synthetic(30, seed=20, rank_max=20)
        with pytest.raises(ParameterError):
            select_span_cv(data, span_grid=[], folds=3, seed=0)
        with pytest.raises(ParameterError):
            select_span_cv(data, span_grid=[0.5, 1.5], folds=3, seed=0)
        with pytest.raises(ParameterError):
            select_span_cv(data, span_grid=[0.5], folds=1, seed=0)
        with pytest.raises(ParameterError):
            select_span_cv(data, span_grid=[0.5], folds=31, seed=0)
        with pytest.raises(ParameterError):
            # ceil(0.05 * 27) = 2 inside the smallest training fold
            select_span_cv(data, span_grid=[0.05], folds=10, seed=0)

    def test_zero_noise_plane_scores_near_zero(self):
        rng = np.random.default_rng(0)
        road = rng.integers(1, 301, 150)
        home = rng.integers(1, 301, 150)
        movs = 2.0 - 0.04 * road + 0.05 * home
        data = make_dataset(road, home, movs)
        best, curve = select_span_cv(data, span_grid=[0.2, 0.5, 1.0], folds=5, seed=0)
        assert all(r <= 1e-6 for _, r in curve)

    def test_exact_ties_take_largest_span(self):
        # every fit degenerates to the same coincident-point mean, so all
        # spans score identically and the tie rule decides
        data = make_dataset([5] * 6, [5] * 6, [1.0, 5, 3, 2, 4, 6])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneratePredictionWarning)
            best, curve = select_span_cv(
                data, span_grid=[0.7, 0.9, 1.0], folds=2, seed=1
            )
        scores = {r for _, r in curve}
        assert len(scores) == 1
        assert best == 1.0

    def test_cv_curve_is_flat_on_rank_data(self):
        data = generate_synthetic(600, seed=14, rank_max=150)
        best, curve = select_span_cv(
            data, span_grid=[0.1, 0.2, 0.3, 0.4, 0.5], folds=5, seed=3
        )
        vals = [r for _, r in curve]
        assert max(vals) / min(vals) <= 1.10
        assert all(10.5 <= v <= 12.5 for v in vals)
