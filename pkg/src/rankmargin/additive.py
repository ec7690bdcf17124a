"""Additive model: MOV = mu + f_road(road rank) + f_home(home rank) + noise.

Both component functions are natural cubic smoothing splines, estimated by
backfitting: each sweep smooths the partial residuals against one rank axis,
recenters that component to mean zero over the training games, then does the
same for the other axis. The smoothing parameter of each axis is calibrated
once, up front, to a degrees-of-freedom target; it depends only on the knot
layout and weights, not on the response, so sweeps reuse it.

Pointwise 95% confidence bands for a component treat the final sweep's
smoother as fixed: the band half-width at a grid point g is
1.96 * sigma_hat * ||row(g)|| where row(g) is the linear map from training
responses to the centered component estimate at g.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass, replace

from .data import Dataset
from .errors import DataError, NotConvergedError, ParameterError
from .numerics import SmoothFunction, SplineSmoother, evaluate_smooth, evaluation_weights

_MIN_GAMES = 10


@dataclass(frozen=True)
class AdditiveFit:
    mu: float
    f_road: SmoothFunction
    f_home: SmoothFunction
    sigma_hat: float
    iterations_used: int
    converged: bool
    n_train: int


def _response_scale(y: np.ndarray) -> float:
    # IQR is the convergence yardstick; fall back to the range, then to 1,
    # so degenerate responses still terminate.
    q1, q3 = np.percentile(y, [25.0, 75.0])
    scale = float(q3 - q1)
    if scale == 0.0:
        scale = float(y.max() - y.min())
    return scale if scale > 0.0 else 1.0


def _centered(sf: SmoothFunction, shift: float) -> SmoothFunction:
    # shifting a spline by a constant leaves second derivatives untouched
    return replace(sf, values=sf.values - shift)


def fit_additive(
    train: Dataset,
    df_per_term: float = 4.0,
    tolerance: float = 1e-6,
    max_iterations: int = 100,
) -> AdditiveFit:
    """Backfit the two-component additive model.

    Requires at least 10 games and at least 4 distinct ranks on each axis.
    Convergence: the largest absolute change in fitted values over one sweep
    is at most `tolerance` times the response scale (interquartile range of
    the margins). A fit that exhausts max_iterations is returned with
    converged=False rather than raised.
    """
    n = len(train)
    if n < _MIN_GAMES:
        raise DataError(f"need at least {_MIN_GAMES} games to backfit, got {n}")
    if tolerance <= 0:
        raise ParameterError(f"tolerance must be positive, got {tolerance}")
    if max_iterations < 1:
        raise ParameterError(f"max_iterations must be >= 1, got {max_iterations}")
    y = train.movs
    smoother_r = SplineSmoother(train.road_ranks)
    smoother_h = SplineSmoother(train.home_ranks)
    lam_r = smoother_r.lambda_for_df(df_per_term)
    lam_h = smoother_h.lambda_for_df(df_per_term)

    mu = float(y.mean())
    fr_at_train = np.zeros(n)
    fh_at_train = np.zeros(n)
    sf_r = sf_h = None
    scale = _response_scale(y)
    fitted_prev = np.full(n, mu)
    converged = False
    iterations_used = 0
    for iterations_used in range(1, max_iterations + 1):
        sf_r = smoother_r.smooth(y - mu - fh_at_train, lam_r)
        fr_at_train = sf_r.values[smoother_r.group_index]
        shift_r = float(fr_at_train.mean())
        fr_at_train = fr_at_train - shift_r
        sf_r = _centered(sf_r, shift_r)

        sf_h = smoother_h.smooth(y - mu - fr_at_train, lam_h)
        fh_at_train = sf_h.values[smoother_h.group_index]
        shift_h = float(fh_at_train.mean())
        fh_at_train = fh_at_train - shift_h
        sf_h = _centered(sf_h, shift_h)

        fitted = mu + fr_at_train + fh_at_train
        delta = float(np.max(np.abs(fitted - fitted_prev)))
        fitted_prev = fitted
        if delta <= tolerance * scale:
            converged = True
            break

    resid = y - fitted_prev
    # model df: the constant plus each component net of its own constant
    model_df = 1.0 + (sf_r.effective_df - 1.0) + (sf_h.effective_df - 1.0)
    denom = max(1.0, n - model_df)
    sigma_hat = float(np.sqrt(resid @ resid / denom))
    return AdditiveFit(
        mu=mu,
        f_road=sf_r,
        f_home=sf_h,
        sigma_hat=sigma_hat,
        iterations_used=iterations_used,
        converged=converged,
        n_train=n,
    )


def predict_additive(fit: AdditiveFit, road_rank: float, home_rank: float) -> float:
    """mu + f_road(road) + f_home(home); splines extrapolate linearly."""
    return float(
        fit.mu + evaluate_smooth(fit.f_road, road_rank) + evaluate_smooth(fit.f_home, home_rank)
    )


def predict_additive_arrays(fit: AdditiveFit, road_ranks, home_ranks) -> np.ndarray:
    r = np.atleast_1d(np.asarray(road_ranks, dtype=float))
    h = np.atleast_1d(np.asarray(home_ranks, dtype=float))
    return fit.mu + evaluate_smooth(fit.f_road, r) + evaluate_smooth(fit.f_home, h)


def component_band(fit: AdditiveFit, which_term: str, grid):
    """Pointwise 95% band for one component over `grid`.

    Returns (estimate, lower, upper) arrays. Refuses non-converged fits:
    the band linearizes around the final sweep, which is meaningless if the
    sweeps were still moving.
    """
    if not fit.converged:
        raise NotConvergedError("confidence bands require a converged fit")
    if which_term == "road":
        sf = fit.f_road
    elif which_term == "home":
        sf = fit.f_home
    else:
        raise ParameterError(f"which_term must be 'road' or 'home', got {which_term!r}")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))

    # Rebuild the final smoother from the stored knots/weights/lambda.
    smoother = SplineSmoother(sf.knots, sf.knot_weights)
    s_matrix = smoother.smoother_matrix(sf.lam)
    a = evaluation_weights(sf.knots, grid)  # grid point <- knot values
    w = sf.knot_weights
    centering = w / w.sum()
    rho = (a - centering[None, :]) @ s_matrix
    # Var(group mean k) = sigma^2 / w_k under unit-weight training games
    se = fit.sigma_hat * np.sqrt((rho * rho) @ (1.0 / w))
    estimate = evaluate_smooth(sf, grid)
    half = 1.96 * se
    return estimate, estimate - half, estimate + half
