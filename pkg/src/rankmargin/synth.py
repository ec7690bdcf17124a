"""Synthetic game generation for benchmarks and tests.

Margins are drawn from a quadratic surface in the two ranks plus Gaussian
noise. Scores are back-filled so that road_score - home_score reproduces the
margin exactly while both scores stay nonnegative (the road score is pinned
at 70 when the road team loses, the home score at 70 when it wins).
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .data import Dataset, GameRecord
from .errors import ParameterError

# Defaults approximate the margin structure of NCAA regular-season games:
# home side favored by a bit under 6 points between equally ranked teams,
# gently quadratic in both ranks, noise near 11.5 points.
DEFAULT_COEFFICIENTS = (-5.8, -0.074, 0.10, 4.7e-5, -1.2e-4)
DEFAULT_NOISE_SIGMA = 11.5
DEFAULT_RANK_MAX = 351

_START_DATE = dt.date(2014, 11, 1)
_GAMES_PER_DAY = 50


def generate_synthetic(
    n: int,
    coefficients=DEFAULT_COEFFICIENTS,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
    rank_max: int = DEFAULT_RANK_MAX,
    seed: int = 0,
    round_margins: bool = False,
) -> Dataset:
    """Generate `n` games with ranks uniform on {1..rank_max}^2.

    The margin for ranks (r, h) is

        mov = b0 + b1 r + b2 h + b3 r^2 + b4 h^2 + Normal(0, noise_sigma)

    with (b0..b4) = `coefficients`. Exact real-valued margins are kept by
    default; `round_margins=True` rounds them to integers (needed when the
    result will be written to CSV, whose schema wants integer scores).
    Identical arguments always produce an identical dataset.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if rank_max < 2:
        raise ParameterError(f"rank_max must be >= 2, got {rank_max}")
    if noise_sigma < 0:
        raise ParameterError(f"noise_sigma must be >= 0, got {noise_sigma}")
    coefficients = tuple(float(c) for c in coefficients)
    if len(coefficients) != 5:
        raise ParameterError(f"expected 5 coefficients, got {len(coefficients)}")
    b0, b1, b2, b3, b4 = coefficients

    rng = np.random.default_rng(seed)
    ranks = rng.integers(1, rank_max + 1, size=(n, 2))
    road = ranks[:, 0].astype(float)
    home = ranks[:, 1].astype(float)
    noise = rng.normal(0.0, noise_sigma, size=n) if noise_sigma > 0 else np.zeros(n)
    mov = b0 + b1 * road + b2 * home + b3 * road * road + b4 * home * home + noise
    if round_margins:
        mov = np.rint(mov)

    games = []
    for i in range(n):
        m = mov[i]
        if round_margins:
            m = int(m)
        road_score = 70 + max(m, 0)
        home_score = road_score - m
        games.append(
            GameRecord(
                date=_START_DATE + dt.timedelta(days=i // _GAMES_PER_DAY),
                home_team=f"T{int(home[i]):03d}",
                road_team=f"T{int(road[i]):03d}",
                home_rank=int(home[i]),
                road_rank=int(road[i]),
                home_score=home_score,
                road_score=road_score,
            )
        )
    return Dataset.from_games(games)
