"""Local linear (LOESS) smoothing of MOV over the two rank coordinates.

Prediction at a query point fits a weighted plane through the nearest
neighbors: the `ceil(span * n)` training points closest in scaled Euclidean
rank distance, weighted by the tricube kernel

    w(d) = (1 - (d / d_max)^3)^3   for d < d_max, else 0

where d_max is the distance to the q-th nearest point. The neighborhood is
open: points at d_max, including ties, get weight zero. Each rank axis is
divided by its training standard deviation before distances are taken
(disable with standardize=False to use raw ranks).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DegeneratePredictionWarning, ParameterError, RankDeficientError
from .evaluate import fold_assignments
from .numerics import weighted_least_squares

DEFAULT_SPAN_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))


@dataclass(frozen=True)
class LoessFit:
    """Lazy smoother: holds the training data, all work happens at predict."""

    road_ranks: np.ndarray
    home_ranks: np.ndarray
    movs: np.ndarray
    span: float
    predictor_scales: tuple[float, float]

    @property
    def neighborhood_size(self) -> int:
        return math.ceil(self.span * len(self.movs))


def fit_loess(train: Dataset, span: float = 0.3, standardize: bool = True) -> LoessFit:
    """Bind training data and a span; validates that neighborhoods are usable."""
    if not 0.0 < span <= 1.0:
        raise ParameterError(f"span must be in (0, 1], got {span}")
    n = len(train)
    q = math.ceil(span * n)
    if q < 3:
        raise ParameterError(
            f"span {span} keeps only {q} of {n} points; a local plane needs at least 3"
        )
    if standardize:
        sr = float(train.road_ranks.std()) or 1.0
        sh = float(train.home_ranks.std()) or 1.0
    else:
        sr = sh = 1.0
    return LoessFit(
        road_ranks=train.road_ranks,
        home_ranks=train.home_ranks,
        movs=train.movs,
        span=span,
        predictor_scales=(sr, sh),
    )


def predict_loess(fit: LoessFit, road_rank: float, home_rank: float) -> float:
    """Local linear prediction at one rank pair.

    Falls back to the tricube-weighted neighborhood mean (with a
    DegeneratePredictionWarning) when the local plane is unidentifiable:
    coincident neighbors or a collinear neighborhood.
    """
    sr, sh = fit.predictor_scales
    dr = (fit.road_ranks - road_rank) / sr
    dh = (fit.home_ranks - home_rank) / sh
    d = np.sqrt(dr * dr + dh * dh)
    q = fit.neighborhood_size
    d_max = np.partition(d, q - 1)[q - 1]
    if d_max == 0.0:
        at_query = d == 0.0
        warnings.warn(
            "all nearest neighbors coincide with the query; returning their mean",
            DegeneratePredictionWarning,
            stacklevel=2,
        )
        return float(fit.movs[at_query].mean())
    inside = d < d_max
    if not np.any(inside):
        # every neighbor ties at d_max (e.g. a query at the center of a ring)
        nearest = d == d.min()
        warnings.warn(
            "all neighbors tie at the boundary distance; returning nearest-point mean",
            DegeneratePredictionWarning,
            stacklevel=2,
        )
        return float(fit.movs[nearest].mean())
    u = d[inside] / d_max
    w = (1.0 - u**3) ** 3
    marks = fit.movs[inside]
    if inside.sum() < 3:
        warnings.warn(
            "fewer than 3 neighbors inside the bandwidth; returning weighted mean",
            DegeneratePredictionWarning,
            stacklevel=2,
        )
        return float(np.average(marks, weights=w))
    design = np.column_stack(
        [
            np.ones(int(inside.sum())),
            fit.road_ranks[inside] - road_rank,
            fit.home_ranks[inside] - home_rank,
        ]
    )
    try:
        sol = weighted_least_squares(design, marks, w)
    except RankDeficientError:
        warnings.warn(
            "collinear neighborhood; returning weighted mean",
            DegeneratePredictionWarning,
            stacklevel=2,
        )
        return float(np.average(marks, weights=w))
    # design is centered at the query, so the intercept is the prediction
    return float(sol.coefficients[0])


def predict_loess_arrays(fit: LoessFit, road_ranks, home_ranks) -> np.ndarray:
    r = np.atleast_1d(np.asarray(road_ranks, dtype=float))
    h = np.atleast_1d(np.asarray(home_ranks, dtype=float))
    return np.array([predict_loess(fit, ri, hi) for ri, hi in zip(r, h)])


def select_span_cv(
    train: Dataset,
    span_grid=None,
    folds: int = 10,
    seed: int = 0,
    standardize: bool = True,
):
    """Choose the span by k-fold cross-validation.

    One fold partition (a function of size, folds, and seed only) is shared
    by every span so the curve is comparable across the grid. Returns
    (best_span, curve) where curve is a list of (span, rmse) in grid order;
    rmse pools squared errors over all folds before the square root. Ties
    break toward the larger span.
    """
    grid = [float(s) for s in (DEFAULT_SPAN_GRID if span_grid is None else span_grid)]
    if not grid:
        raise ParameterError("span grid is empty")
    for s in grid:
        if not 0.0 < s <= 1.0:
            raise ParameterError(f"span must be in (0, 1], got {s}")
    n = len(train)
    assignments = fold_assignments(n, folds, seed)
    smallest_train = min(n - len(f) for f in assignments)
    for s in grid:
        if math.ceil(s * smallest_train) < 3:
            raise ParameterError(
                f"span {s} keeps fewer than 3 points in a fold of {smallest_train} games"
            )
    all_idx = np.arange(n)
    curve = []
    for s in grid:
        total_sq = 0.0
        for held_out in assignments:
            tr_idx = np.setdiff1d(all_idx, held_out)
            part = fit_loess(train.subset(tr_idx), s, standardize=standardize)
            preds = predict_loess_arrays(
                part, train.road_ranks[held_out], train.home_ranks[held_out]
            )
            err = preds - train.movs[held_out]
            total_sq += float(err @ err)
        curve.append((s, math.sqrt(total_sq / n)))
    best_span, best_rmse = curve[0]
    for s, r in curve[1:]:
        if r < best_rmse or (r == best_rmse and s > best_span):
            best_span, best_rmse = s, r
    return best_span, curve
