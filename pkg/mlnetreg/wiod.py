"""World input-output style pipeline: flows to centrality to CC-MNetR.

Steps: symmetrise the raw flow matrix, scale it to ``[0, 2]``, take
centrality with ``a_N = sqrt(N L)``, aggregate it per community, standardise
the response and covariates, screen covariates by VIF, then compare the
covariate-only model against the one with ``Z`` added.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from mlnetreg.centrality import (
    AssumptionDiagnostics,
    CentralityBundle,
    assumption_diagnostics,
    community_centrality,
    eigenvector_centrality,
)
from mlnetreg.exceptions import DataError, NoCovariatesSurvive
from mlnetreg.ingest import DatasetBundle
from mlnetreg.linalg import as_matrix
from mlnetreg.regression import (
    FTestResult,
    ModelKind,
    RegressionFit,
    added_variable_f_test,
    fit_ccmnetr,
    fit_ols,
    standardize,
    vif,
)

logger = logging.getLogger(__name__)

DEFAULT_VIF_THRESHOLD = 5.0
SCALED_MAX = 2.0
INTERCEPT = "const"
Z_COLUMN = "Z"


class ScaleMode(Enum):
    GLOBAL = "global"
    PER_BLOCK = "per-block"


@dataclass(frozen=True)
class VifStep:
    dropped: str
    vif: float
    remaining: Tuple[str, ...]


@dataclass
class WiodResult:
    reduced_fit: RegressionFit
    full_fit: RegressionFit
    f_test: FTestResult
    initial_vif: Tuple[Tuple[str, float], ...]
    final_vif: Tuple[Tuple[str, float], ...]
    vif_steps: List[VifStep]
    surviving: Tuple[str, ...]
    centrality: CentralityBundle
    Z: np.ndarray
    diagnostics: AssumptionDiagnostics
    sector_ranking: List[Tuple[int, float]] = field(default_factory=list)
    scale: ScaleMode = ScaleMode.GLOBAL

    @property
    def dropped(self) -> Tuple[str, ...]:
        return tuple(step.dropped for step in self.vif_steps)

    def as_dict(self) -> dict:
        return {
            "scale": self.scale.value,
            "a_n": self.centrality.a_n,
            "lambda1": self.centrality.lambda1,
            "lambda2": self.centrality.lambda2,
            "spectral_gap": self.centrality.gap,
            "vif": {
                "initial": dict(self.initial_vif),
                "final": dict(self.final_vif),
                "steps": [
                    {"dropped": step.dropped, "vif": step.vif, "remaining": list(step.remaining)}
                    for step in self.vif_steps
                ],
            },
            "surviving": list(self.surviving),
            "dropped": list(self.dropped),
            "reduced_model": self.reduced_fit.as_dict(),
            "full_model": self.full_fit.as_dict(),
            "r_squared": {"reduced": self.reduced_fit.r_squared, "full": self.full_fit.r_squared},
            "f_test": {
                "f_stat": self.f_test.f_stat,
                "df_num": self.f_test.df_num,
                "df_den": self.f_test.df_den,
                "p_value": self.f_test.p_value,
            },
            "diagnostics": self.diagnostics.as_dict(),
            "sector_ranking": [{"sector": sector, "centrality": score} for sector, score in self.sector_ranking],
        }


def symmetrize(flows) -> np.ndarray:
    """``B = B_a + B_a^T``."""

    B = as_matrix(flows, "flows")
    if B.shape[0] != B.shape[1]:
        raise DataError(f"flow matrix must be square, got {B.shape}")
    return B + B.T


def scale_to_band(matrix, mode: ScaleMode = ScaleMode.GLOBAL, n_nodes: Optional[int] = None) -> np.ndarray:
    """Scale nonnegative entries to ``[0, 2]`` by ``2 b / max``.

    ``PER_BLOCK`` divides every ``N x N`` block by its own maximum; an
    all-zero block stays zero.
    """

    B = as_matrix(matrix, "matrix")
    if (B < 0).any():
        raise DataError("flows must be nonnegative before scaling")
    if mode is ScaleMode.GLOBAL:
        peak = float(B.max())
        if peak == 0.0:
            raise DataError("flow matrix is identically zero")
        return SCALED_MAX * B / peak

    if n_nodes is None or B.shape[0] % n_nodes:
        raise DataError(f"per-block scaling needs N dividing {B.shape[0]}")
    scaled = np.zeros_like(B)
    blocks = B.shape[0] // n_nodes
    for row in range(blocks):
        for col in range(blocks):
            rows = slice(row * n_nodes, (row + 1) * n_nodes)
            cols = slice(col * n_nodes, (col + 1) * n_nodes)
            peak = float(B[rows, cols].max())
            if peak > 0:
                scaled[rows, cols] = SCALED_MAX * B[rows, cols] / peak
    if not scaled.any():
        raise DataError("flow matrix is identically zero")
    return scaled


def vif_screen(
    covariates,
    names: Sequence[str],
    threshold: float = DEFAULT_VIF_THRESHOLD,
) -> Tuple[List[int], List[VifStep], np.ndarray, np.ndarray]:
    """Drop the highest-VIF covariate until none exceeds ``threshold``.

    Returns kept column indices, the drop history and the VIF vectors before
    and after screening.  A single remaining covariate has no VIF and stops
    the loop.
    """

    X = as_matrix(covariates, "X")
    if X.shape[1] == 0:
        raise NoCovariatesSurvive("no covariates to screen")
    kept = list(range(X.shape[1]))
    steps: List[VifStep] = []
    initial = vif(X) if len(kept) >= 2 else np.ones(1)
    current = initial
    while len(kept) >= 2:
        current = vif(X[:, kept])
        worst = int(np.argmax(current))
        if not current[worst] > threshold:
            break
        dropped = kept.pop(worst)
        steps.append(VifStep(names[dropped], float(current[worst]), tuple(names[index] for index in kept)))
        logger.info("Dropping %s (VIF %.2f > %.2f)", names[dropped], current[worst], threshold)
        current = np.ones(1)
    if not kept:
        raise NoCovariatesSurvive(f"every covariate exceeded VIF {threshold}")
    return kept, steps, initial, current


def sector_ranking(C) -> List[Tuple[int, float]]:
    """Nodes (1-based) ordered by mean centrality across layers, highest first."""

    scores = as_matrix(C, "C").mean(axis=1)
    order = np.argsort(-scores, kind="stable")
    return [(int(index) + 1, float(scores[index])) for index in order]


def wiod_pipeline(
    bundle: DatasetBundle,
    vif_threshold: float = DEFAULT_VIF_THRESHOLD,
    *,
    scale: ScaleMode = ScaleMode.GLOBAL,
    a_n: Optional[float] = None,
) -> WiodResult:
    N, L = bundle.n_nodes, bundle.n_layers
    B = scale_to_band(symmetrize(bundle.supra), scale, N)
    a_n = math.sqrt(N * L) if a_n is None else a_n
    centrality = eigenvector_centrality(B, N, L, a_n)
    _, Z = community_centrality(centrality.C, bundle.communities)

    y, _, _ = standardize(bundle.response.reshape(-1, 1))
    y = y[:, 0]
    X, _, _ = standardize(bundle.covariates)
    names = list(bundle.covariate_names)

    kept, steps, initial, final = vif_screen(X, names, vif_threshold)
    surviving = tuple(names[index] for index in kept)
    X_kept = X[:, kept]
    final_pairs = tuple(zip(surviving, map(float, final))) if len(kept) >= 2 else ()

    ones = np.ones((N, 1))
    reduced_names = [INTERCEPT, *surviving]
    reduced = fit_ols(np.hstack([ones, X_kept]), y, reduced_names, model=ModelKind.OLS)
    full = fit_ccmnetr(np.hstack([ones, X_kept]), Z, y, column_names=[*reduced_names, Z_COLUMN])
    f_test = added_variable_f_test(reduced, full)
    diagnostics = assumption_diagnostics(B, X_kept, centrality.V, bundle.communities, a_n)
    logger.info(
        "Real-data fit: kept %s, R^2 %.4f -> %.4f, F=%.3f (p=%.3g)",
        list(surviving),
        reduced.r_squared,
        full.r_squared,
        f_test.f_stat,
        f_test.p_value,
    )
    return WiodResult(
        reduced_fit=reduced,
        full_fit=full,
        f_test=f_test,
        initial_vif=tuple(zip(names, map(float, initial))) if len(names) >= 2 else (),
        final_vif=final_pairs,
        vif_steps=steps,
        surviving=surviving,
        centrality=centrality,
        Z=Z,
        diagnostics=diagnostics,
        sector_ranking=sector_ranking(centrality.C),
        scale=scale,
    )
