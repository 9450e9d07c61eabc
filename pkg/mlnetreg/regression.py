"""C-MNetR, CC-MNetR and RCFE fits plus the usual OLS diagnostics.

No model adds an intercept on its own; callers that want one append a ones
column to ``X``.  The error variance uses ``N - q`` with ``q`` the number of
fitted columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from statsmodels.stats.outliers_influence import variance_inflation_factor
from statsmodels.tools.tools import add_constant

from mlnetreg.exceptions import DimensionMismatch, RankDeficient, ZeroVariance
from mlnetreg.linalg import as_matrix, least_squares

logger = logging.getLogger(__name__)

COLLINEARITY_TOL = 1e-12


class ModelKind(Enum):
    CMNETR = "cmnetr"
    CCMNETR = "ccmnetr"
    RCFE = "rcfe"
    OLS = "ols"


@dataclass(frozen=True)
class RegressionFit:
    model: ModelKind
    beta_x: np.ndarray
    beta_net: np.ndarray
    residuals: np.ndarray
    sigma2_hat: float
    std_errors: np.ndarray
    p_values: np.ndarray
    r_squared: float
    rss: float
    column_names: Tuple[str, ...]
    z_stat_z: Optional[float] = None
    z_p_value: Optional[float] = None
    # OLS standard errors ignore centrality measurement error
    naive_inference: bool = True

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.beta_x, self.beta_net])

    @property
    def n_obs(self) -> int:
        return int(self.residuals.shape[0])

    @property
    def n_params(self) -> int:
        return len(self.column_names)

    def as_dict(self) -> dict:
        return {
            "model": self.model.value,
            "coefficients": dict(zip(self.column_names, self.coefficients.tolist())),
            "std_errors": dict(zip(self.column_names, self.std_errors.tolist())),
            "p_values": dict(zip(self.column_names, self.p_values.tolist())),
            "sigma2_hat": self.sigma2_hat,
            "r_squared": self.r_squared,
            "rss": self.rss,
            "n_obs": self.n_obs,
            "z_stat_z": self.z_stat_z,
            "z_p_value": self.z_p_value,
            "naive_inference": self.naive_inference,
        }


@dataclass(frozen=True)
class FTestResult:
    f_stat: float
    df_num: int
    df_den: int
    p_value: float

    @property
    def df(self) -> Tuple[int, int]:
        return self.df_num, self.df_den


def _block(values, n_rows: int, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        return np.zeros((n_rows, 0))
    matrix = as_matrix(array, name)
    if matrix.shape[0] != n_rows:
        raise DimensionMismatch(f"{name} has {matrix.shape[0]} rows, expected {n_rows}")
    return matrix


def _names(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{index + 1}" for index in range(count)]


def _r_squared(y: np.ndarray, rss: float) -> float:
    centred = y - y.mean()
    tss = float(centred @ centred)
    if tss == 0.0:
        return 1.0 if rss == 0.0 else 0.0
    return float(min(1.0, max(0.0, 1.0 - rss / tss)))


def fit_ols(
    design,
    response,
    column_names: Sequence[str],
    *,
    n_x: Optional[int] = None,
    model: ModelKind = ModelKind.OLS,
    naive_inference: bool = False,
) -> RegressionFit:
    """Plain OLS; the first ``n_x`` columns are reported as ``beta_x``."""

    y = np.asarray(response, dtype=np.float64).reshape(-1)
    W = _block(design, y.shape[0], "design")
    if W.shape[1] != len(column_names):
        raise DimensionMismatch(f"{W.shape[1]} design columns but {len(column_names)} names")
    result = least_squares(W, y)
    n_x = W.shape[1] if n_x is None else n_x
    std_errors = np.sqrt(result.sigma2_hat * result.xtx_inverse_diag)
    df = W.shape[0] - W.shape[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = result.coefficients / std_errors
    p_values = np.where(np.isnan(t_values), np.nan, 2.0 * stats.t.sf(np.abs(t_values), df))
    return RegressionFit(
        model=model,
        beta_x=result.coefficients[:n_x].copy(),
        beta_net=result.coefficients[n_x:].copy(),
        residuals=result.residuals,
        sigma2_hat=result.sigma2_hat,
        std_errors=std_errors,
        p_values=p_values,
        r_squared=_r_squared(y, result.rss),
        rss=result.rss,
        column_names=tuple(column_names),
        naive_inference=naive_inference,
    )


def fit_cmnetr(covariates, centrality, response) -> RegressionFit:
    """OLS of ``y`` on ``(X, C)``; pass the true ``C`` or an estimate."""

    y = np.asarray(response, dtype=np.float64).reshape(-1)
    X = _block(covariates, y.shape[0], "X")
    C = _block(centrality, y.shape[0], "C")
    names = _names("x", X.shape[1]) + _names("c", C.shape[1])
    return fit_ols(
        np.hstack([X, C]),
        y,
        names,
        n_x=X.shape[1],
        model=ModelKind.CMNETR,
        naive_inference=True,
    )


def fit_ccmnetr(
    covariates,
    community_centrality,
    response,
    beta_z_null: float = 0.0,
    *,
    column_names: Optional[Sequence[str]] = None,
) -> RegressionFit:
    """OLS of ``y`` on ``(X, Z)`` with the standardised statistic for ``beta_Z``.

    ``column_names`` labels every column of ``(X, Z)``; the default is
    ``x1..xP, z``.

    ``z_stat_z = sqrt(Z^T Z / sigma2_hat) * (beta_Z - beta_z_null)``; it is
    omitted when the fit is exact (``sigma2_hat == 0``).
    """

    y = np.asarray(response, dtype=np.float64).reshape(-1)
    X = _block(covariates, y.shape[0], "X")
    Z = np.asarray(community_centrality, dtype=np.float64).reshape(-1)
    if Z.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"Z has {Z.shape[0]} entries, expected {y.shape[0]}")
    names = _names("x", X.shape[1]) + ["z"] if column_names is None else list(column_names)
    if len(names) != X.shape[1] + 1:
        raise DimensionMismatch(f"expected {X.shape[1] + 1} column names, got {len(names)}")
    fit = fit_ols(
        np.hstack([X, Z.reshape(-1, 1)]),
        y,
        names,
        n_x=X.shape[1],
        model=ModelKind.CCMNETR,
        naive_inference=False,
    )
    z_stat: Optional[float] = None
    z_p_value: Optional[float] = None
    if fit.sigma2_hat > 0:
        z_stat = float(np.sqrt(Z @ Z / fit.sigma2_hat) * (fit.beta_net[0] - beta_z_null))
        z_p_value = float(2.0 * stats.norm.sf(abs(z_stat)))
    return RegressionFit(
        model=fit.model,
        beta_x=fit.beta_x,
        beta_net=fit.beta_net,
        residuals=fit.residuals,
        sigma2_hat=fit.sigma2_hat,
        std_errors=fit.std_errors,
        p_values=fit.p_values,
        r_squared=fit.r_squared,
        rss=fit.rss,
        column_names=fit.column_names,
        z_stat_z=z_stat,
        z_p_value=z_p_value,
        naive_inference=False,
    )


def fit_rcfe(covariates, centrality, community_matrix, response) -> RegressionFit:
    """Community fixed effects baseline: OLS on ``(X, C, S)`` without intercept."""

    y = np.asarray(response, dtype=np.float64).reshape(-1)
    X = _block(covariates, y.shape[0], "X")
    C = _block(centrality, y.shape[0], "C")
    S = _block(community_matrix, y.shape[0], "S")
    names = _names("x", X.shape[1]) + _names("c", C.shape[1]) + _names("s", S.shape[1])
    return fit_ols(
        np.hstack([X, C, S]),
        y,
        names,
        n_x=X.shape[1],
        model=ModelKind.RCFE,
        naive_inference=True,
    )


def vif(covariates) -> np.ndarray:
    """Variance inflation factors, each from an auxiliary regression with intercept."""

    X = as_matrix(covariates, "X")
    n, p = X.shape
    if p < 2:
        raise DimensionMismatch(f"VIF needs at least two covariates, got {p}")
    spread = X.max(axis=0) - X.min(axis=0)
    if (spread == 0.0).any():
        column = int(np.flatnonzero(spread == 0.0)[0])
        raise ZeroVariance(f"covariate {column + 1} is constant")

    exog = add_constant(X, prepend=True, has_constant="add")
    factors = np.empty(p)
    with np.errstate(divide="ignore"):
        for column in range(p):
            factor = float(variance_inflation_factor(exog, column + 1))
            if not np.isfinite(factor) or factor * COLLINEARITY_TOL >= 1.0:
                raise RankDeficient(f"covariate {column + 1} is perfectly collinear with the others")
            factors[column] = factor
    return factors


def added_variable_f_test(fit_reduced: RegressionFit, fit_full: RegressionFit) -> FTestResult:
    """F statistic for the columns ``fit_full`` adds to ``fit_reduced``."""

    if fit_reduced.n_obs != fit_full.n_obs:
        raise DimensionMismatch("models were fitted on different numbers of observations")
    missing = set(fit_reduced.column_names) - set(fit_full.column_names)
    if missing or fit_full.n_params < fit_reduced.n_params:
        raise DimensionMismatch(f"reduced design is not nested in the full design (missing {sorted(missing)})")

    df_num = fit_full.n_params - fit_reduced.n_params
    df_den = fit_full.n_obs - fit_full.n_params
    if df_num == 0:
        return FTestResult(0.0, 0, df_den, 1.0)
    gain = max(fit_reduced.rss - fit_full.rss, 0.0)
    if fit_full.rss == 0.0:
        f_stat = float("inf") if gain > 0 else 0.0
    else:
        f_stat = (gain / df_num) / (fit_full.rss / df_den)
    p_value = float(stats.f.sf(f_stat, df_num, df_den))
    return FTestResult(float(f_stat), df_num, df_den, p_value)


def standardize(matrix):
    """Columns to mean 0 and sample variance 1 (divisor ``N - 1``)."""

    M = as_matrix(matrix, "matrix")
    if M.shape[0] < 2:
        raise ZeroVariance("standardisation needs at least two rows")
    means = M.mean(axis=0)
    sds = M.std(axis=0, ddof=1)
    if (sds == 0).any():
        constant = [int(index) + 1 for index in np.flatnonzero(sds == 0)]
        raise ZeroVariance(f"columns {constant} have zero variance")
    return (M - means) / sds, means, sds
