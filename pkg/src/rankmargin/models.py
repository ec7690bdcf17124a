"""Canonical model definitions for benchmarking and the CLI.

Column names match the benchmark table; each builder returns a ModelSpec
whose fit callable produces a batch predictor (arrays of road and home ranks
in, array of predicted margins out).
"""

from __future__ import annotations

from .additive import fit_additive, predict_additive_arrays
from .data import Dataset
from .evaluate import ModelSpec
from .kernel import (
    anisotropic_smoother,
    isotropic_smoother,
    predict_kernel_arrays,
)
from .loess import fit_loess, predict_loess_arrays
from .quadratic import fit_quadratic, predict_quadratic_arrays

QUADRATIC = "Quadratic regression"
GAM = "Gaussian GAM"
LOESS = "Local linear (LOESS)"
ISOTROPIC = "Isotropic kernel"
ANISOTROPIC = "Anisotropic kernel"

TABLE_COLUMNS = (QUADRATIC, GAM, LOESS, ISOTROPIC, ANISOTROPIC)


def quadratic_model(include_interaction: bool = False) -> ModelSpec:
    def fit(train: Dataset):
        qf = fit_quadratic(train, include_interaction=include_interaction)
        return lambda r, h: predict_quadratic_arrays(qf, r, h)

    return ModelSpec(name=QUADRATIC, fit=fit)


def gam_model(
    df_per_term: float = 4.0, tolerance: float = 1e-6, max_iterations: int = 100
) -> ModelSpec:
    def fit(train: Dataset):
        af = fit_additive(
            train,
            df_per_term=df_per_term,
            tolerance=tolerance,
            max_iterations=max_iterations,
        )
        return lambda r, h: predict_additive_arrays(af, r, h)

    return ModelSpec(name=GAM, fit=fit)


def loess_model(span: float = 0.3, standardize: bool = True) -> ModelSpec:
    def fit(train: Dataset):
        lf = fit_loess(train, span=span, standardize=standardize)
        return lambda r, h: predict_loess_arrays(lf, r, h)

    return ModelSpec(name=LOESS, fit=fit)


def isotropic_kernel_model(sigma: float) -> ModelSpec:
    def fit(train: Dataset):
        spec = isotropic_smoother(train, sigma)
        return lambda r, h: predict_kernel_arrays(spec, r, h)

    return ModelSpec(name=ISOTROPIC, fit=fit)


def anisotropic_kernel_model(sigma_x: float, sigma_y: float) -> ModelSpec:
    def fit(train: Dataset):
        spec = anisotropic_smoother(train, sigma_x, sigma_y)
        return lambda r, h: predict_kernel_arrays(spec, r, h)

    return ModelSpec(name=ANISOTROPIC, fit=fit)


def table_models(span: float, sigma: float, sigma_x: float, sigma_y: float, df: float = 4.0):
    """The five models of the benchmark table, in column order."""
    return [
        quadratic_model(),
        gam_model(df_per_term=df),
        loess_model(span=span),
        isotropic_kernel_model(sigma),
        anisotropic_kernel_model(sigma_x, sigma_y),
    ]
