"""Shared builders for the test suite."""

from __future__ import annotations

import datetime

from rankmargin.data import Dataset, GameRecord


def make_dataset(road_ranks, home_ranks, movs, dates=None) -> Dataset:
    """Build a Dataset from parallel sequences, back-filling scores.

    Scores are chosen so road - home reproduces each margin exactly while
    both stay nonnegative.
    """
    n = len(movs)
    if dates is None:
        base = datetime.date(2015, 1, 1)
        dates = [base + datetime.timedelta(days=i) for i in range(n)]
    games = []
    for r, h, m, d in zip(road_ranks, home_ranks, movs, dates):
        road_score = 70.0 + max(m, 0.0)
        games.append(
            GameRecord(
                date=d,
                home_team=f"H{int(h)}",
                road_team=f"R{int(r)}",
                home_rank=int(h),
                road_rank=int(r),
                home_score=road_score - m,
                road_score=road_score,
            )
        )
    return Dataset.from_games(games)
