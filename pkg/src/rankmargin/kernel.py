"""Gaussian kernel (Nadaraya-Watson) smoothing of MOV over rank space.

The prediction at a query point is the kernel-weighted mean of training
margins, with standard-normal-density weights on scaled distances. Two
flavors:

  * isotropic: one bandwidth sigma on plain Euclidean rank distance;
  * anisotropic: the rank plane is rotated 45 degrees (x along rank sum,
    y along rank difference) and each rotated axis gets its own bandwidth.

Weight ratios are what matter, so weights are computed relative to the
closest point: exp(-(q - q_min) / 2) with q the squared scaled distance.
That keeps the weight sum >= 1 no matter how far the query sits, instead of
underflowing to 0/0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset, rotate_arrays
from .errors import DataError, DegeneratePredictionWarning, ParameterError
from .evaluate import fold_assignments

DEFAULT_SIGMA_GRID = tuple(np.geomspace(1.0, 200.0, 40))
DEFAULT_SIGMA_X_GRID = tuple(float(v) for v in range(10, 101, 10))
DEFAULT_SIGMA_Y_GRID = tuple(float(v) for v in range(2, 41, 2))

_TOTAL_WEIGHT_FLOOR = 1e-300
_QUERY_BLOCK = 1024


@dataclass(frozen=True)
class KernelSmootherSpec:
    """A fitted (lazy) kernel smoother; mode is 'isotropic' or 'anisotropic'."""

    mode: str
    road_ranks: np.ndarray
    home_ranks: np.ndarray
    movs: np.ndarray
    sigma: float | None = None
    sigma_x: float | None = None
    sigma_y: float | None = None
    rot_x: np.ndarray | None = None
    rot_y: np.ndarray | None = None


def isotropic_smoother(train: Dataset, sigma: float) -> KernelSmootherSpec:
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if len(train) == 0:
        raise DataError("cannot smooth over an empty training set")
    return KernelSmootherSpec(
        mode="isotropic",
        road_ranks=train.road_ranks,
        home_ranks=train.home_ranks,
        movs=train.movs,
        sigma=float(sigma),
    )


def anisotropic_smoother(train: Dataset, sigma_x: float, sigma_y: float) -> KernelSmootherSpec:
    if sigma_x <= 0 or sigma_y <= 0:
        raise ParameterError(f"bandwidths must be positive, got ({sigma_x}, {sigma_y})")
    if len(train) == 0:
        raise DataError("cannot smooth over an empty training set")
    x, y = rotate_arrays(train.road_ranks, train.home_ranks)
    return KernelSmootherSpec(
        mode="anisotropic",
        road_ranks=train.road_ranks,
        home_ranks=train.home_ranks,
        movs=train.movs,
        sigma_x=float(sigma_x),
        sigma_y=float(sigma_y),
        rot_x=x,
        rot_y=y,
    )


def _squared_scaled_distances(spec: KernelSmootherSpec, road_rank, home_rank) -> np.ndarray:
    if spec.mode == "isotropic":
        dr = spec.road_ranks - road_rank
        dh = spec.home_ranks - home_rank
        return (dr * dr + dh * dh) / (spec.sigma * spec.sigma)
    qx, qy = rotate_arrays(road_rank, home_rank)
    dx = (spec.rot_x - qx) / spec.sigma_x
    dy = (spec.rot_y - qy) / spec.sigma_y
    return dx * dx + dy * dy


def predict_kernel(spec: KernelSmootherSpec, road_rank: float, home_rank: float) -> float:
    """Kernel-weighted mean margin at one rank pair."""
    # overflow on absurdly distant queries is expected and handled below
    with np.errstate(over="ignore", invalid="ignore"):
        q = _squared_scaled_distances(spec, float(road_rank), float(home_rank))
        q_min = q.min()
        if math.isfinite(q_min):
            w = np.exp(-0.5 * (q - q_min))
            total = w.sum()
            if total >= _TOTAL_WEIGHT_FLOOR and math.isfinite(total):
                return float((w @ spec.movs) / total)
    warnings.warn(
        "total kernel weight underflowed; returning nearest training margin",
        DegeneratePredictionWarning,
        stacklevel=2,
    )
    return float(spec.movs[int(np.argmin(q))])


def predict_kernel_arrays(spec: KernelSmootherSpec, road_ranks, home_ranks) -> np.ndarray:
    """Vectorized predictions; processes queries in blocks to bound memory."""
    r = np.atleast_1d(np.asarray(road_ranks, dtype=float))
    h = np.atleast_1d(np.asarray(home_ranks, dtype=float))
    out = np.empty(len(r))
    if spec.mode == "isotropic":
        px, py = spec.road_ranks, spec.home_ranks
        inv2x = inv2y = 1.0 / (spec.sigma * spec.sigma)
        qx, qy = r, h
    else:
        px, py = spec.rot_x, spec.rot_y
        inv2x = 1.0 / (spec.sigma_x * spec.sigma_x)
        inv2y = 1.0 / (spec.sigma_y * spec.sigma_y)
        qx, qy = rotate_arrays(r, h)
    # overflow on absurdly distant queries is expected and repaired below
    with np.errstate(over="ignore", invalid="ignore"):
        for start in range(0, len(r), _QUERY_BLOCK):
            stop = min(start + _QUERY_BLOCK, len(r))
            dx = qx[start:stop, None] - px[None, :]
            dy = qy[start:stop, None] - py[None, :]
            q = dx * dx * inv2x + dy * dy * inv2y
            q -= q.min(axis=1)[:, None]
            w = np.exp(-0.5 * q)
            out[start:stop] = (w @ spec.movs) / w.sum(axis=1)
    bad = ~np.isfinite(out)
    if bad.any():
        # overflowed distances; the scalar path warns and falls back
        for i in np.flatnonzero(bad):
            out[i] = predict_kernel(spec, r[i], h[i])
    return out


def select_sigma_loo(train: Dataset, sigma_grid=None):
    """Pick the isotropic bandwidth by leave-one-out cross-validation.

    Direct O(n^2) summation with per-point exclusion; the LOO criterion is
    mean squared prediction error, reported as RMSE. Returns
    (best_sigma, curve) with curve a list of (sigma, rmse) in grid order.
    Ties break toward the larger sigma.
    """
    grid = [float(s) for s in (DEFAULT_SIGMA_GRID if sigma_grid is None else sigma_grid)]
    if not grid:
        raise ParameterError("sigma grid is empty")
    if any(s <= 0 for s in grid):
        raise ParameterError("sigma grid entries must be positive")
    n = len(train)
    if n < 2:
        raise DataError("leave-one-out needs at least 2 games")
    r, h, y = train.road_ranks, train.home_ranks, train.movs
    total_sq = np.zeros(len(grid))
    for start in range(0, n, _QUERY_BLOCK):
        stop = min(start + _QUERY_BLOCK, n)
        dr = r[start:stop, None] - r[None, :]
        dh = h[start:stop, None] - h[None, :]
        d2 = dr * dr + dh * dh
        rows = np.arange(start, stop)
        d2[rows - start, rows] = np.inf  # exclude each point from its own fit
        d2_min = d2.min(axis=1)
        for gi, sigma in enumerate(grid):
            w = np.exp(-0.5 * (d2 - d2_min[:, None]) / (sigma * sigma))
            w[rows - start, rows] = 0.0
            preds = (w @ y) / w.sum(axis=1)
            err = preds - y[start:stop]
            total_sq[gi] += float(err @ err)
    curve = [(s, math.sqrt(t / n)) for s, t in zip(grid, total_sq)]
    best_sigma, best_rmse = curve[0]
    for s, rm in curve[1:]:
        if rm < best_rmse or (rm == best_rmse and s > best_sigma):
            best_sigma, best_rmse = s, rm
    return best_sigma, curve


def select_aniso_cv(
    train: Dataset,
    sigma_x_grid=None,
    sigma_y_grid=None,
    folds: int = 10,
    seed: int = 0,
):
    """Pick (sigma_x, sigma_y) by k-fold cross-validation over a grid.

    The fold partition is fixed (a function of size, folds, seed) and shared
    by every bandwidth pair. Returns ((sigma_x, sigma_y), surface) where
    surface lists (sigma_x, sigma_y, rmse) in grid order; RMSE pools squared
    errors over folds. Ties break toward larger sigma_x, then larger sigma_y.
    """
    xs = [float(s) for s in (DEFAULT_SIGMA_X_GRID if sigma_x_grid is None else sigma_x_grid)]
    ys = [float(s) for s in (DEFAULT_SIGMA_Y_GRID if sigma_y_grid is None else sigma_y_grid)]
    if not xs or not ys:
        raise ParameterError("bandwidth grids must be nonempty")
    if any(s <= 0 for s in xs + ys):
        raise ParameterError("bandwidth grid entries must be positive")
    n = len(train)
    assignments = fold_assignments(n, folds, seed)
    x, yrot = rotate_arrays(train.road_ranks, train.home_ranks)
    marks = train.movs
    all_idx = np.arange(n)
    total_sq = np.zeros((len(xs), len(ys)))
    for held_out in assignments:
        tr = np.setdiff1d(all_idx, held_out)
        dx2 = (x[held_out][:, None] - x[tr][None, :]) ** 2
        dy2 = (yrot[held_out][:, None] - yrot[tr][None, :]) ** 2
        actual = marks[held_out]
        m_tr = marks[tr]
        for xi, sx in enumerate(xs):
            qx = dx2 / (sx * sx)
            for yi, sy in enumerate(ys):
                q = qx + dy2 / (sy * sy)
                q_min = q.min(axis=1)
                w = np.exp(-0.5 * (q - q_min[:, None]))
                preds = (w @ m_tr) / w.sum(axis=1)
                err = preds - actual
                total_sq[xi, yi] += float(err @ err)
    surface = []
    for xi, sx in enumerate(xs):
        for yi, sy in enumerate(ys):
            surface.append((sx, sy, math.sqrt(total_sq[xi, yi] / n)))
    best = surface[0][:2]
    best_rmse = surface[0][2]
    for sx, sy, rm in surface[1:]:
        if rm < best_rmse:
            best, best_rmse = (sx, sy), rm
        elif rm == best_rmse:
            if sx > best[0] or (sx == best[0] and sy > best[1]):
                best = (sx, sy)
    return best, surface
