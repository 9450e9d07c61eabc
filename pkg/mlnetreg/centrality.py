"""Eigenvector-like centrality on supra matrices and its community aggregation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from mlnetreg.exceptions import (
    DataError,
    DimensionMismatch,
    EmptyCommunity,
    NegativeEntries,
    SpectralGapTooSmall,
)
from mlnetreg.linalg import (
    as_matrix,
    face_splitting,
    leading_eigenpair,
    require_symmetric,
    second_eigenvalue,
    smallest_singular_value_residual,
)

logger = logging.getLogger(__name__)

NEGATIVE_ENTRY_TOL = 1e-6
GAP_RTOL = 1e-8


@dataclass(frozen=True)
class CommunityStructure:
    """Node-to-community labels (1-based) with derived S, H and sizes."""

    labels: np.ndarray
    n_communities: int

    @classmethod
    def from_labels(cls, labels: Sequence[int], n_communities: Optional[int] = None) -> "CommunityStructure":
        values = np.asarray(labels)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch("labels must be a non-empty one-dimensional sequence")
        if not np.issubdtype(values.dtype, np.integer):
            rounded = np.rint(values)
            if not np.array_equal(rounded, values):
                raise DataError("community labels must be integers")
            values = rounded
        values = values.astype(np.int64)
        count = int(values.max()) if n_communities is None else int(n_communities)
        if values.min() < 1 or values.max() > count:
            raise DataError(f"community labels must lie in 1..{count}")
        return cls(labels=values, n_communities=count)

    @property
    def n_nodes(self) -> int:
        return int(self.labels.shape[0])

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels - 1, minlength=self.n_communities)

    @property
    def S(self) -> np.ndarray:
        indicator = np.zeros((self.n_nodes, self.n_communities))
        indicator[np.arange(self.n_nodes), self.labels - 1] = 1.0
        return indicator

    @property
    def H(self) -> np.ndarray:
        sizes = self.sizes
        if (sizes == 0).any():
            empty = [int(r) + 1 for r in np.flatnonzero(sizes == 0)]
            raise EmptyCommunity(f"communities {empty} have no members")
        return 1.0 / sizes

    def min_share(self) -> float:
        return float(self.sizes.min() / self.n_nodes)


@dataclass(frozen=True)
class CentralityBundle:
    lambda1: float
    lambda2: float
    gap: float
    V: np.ndarray
    C: np.ndarray
    a_n: float

    @property
    def n_nodes(self) -> int:
        return int(self.V.shape[0])

    @property
    def n_layers(self) -> int:
        return int(self.V.shape[1])

    def vec(self) -> np.ndarray:
        """Layer-major stacking of ``V`` (the supra eigenvector)."""

        return self.V.T.reshape(-1)


@dataclass(frozen=True)
class AssumptionDiagnostics:
    sigma_min: float
    min_community_share: Optional[float]
    centrality_l1_ratio: float
    lambda1: float
    lambda2: float
    spectral_gap: float
    a_n_over_gap: float

    def as_dict(self) -> dict:
        return {
            "sigma_min": self.sigma_min,
            "min_community_share": self.min_community_share,
            "centrality_l1_ratio": self.centrality_l1_ratio,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "spectral_gap": self.spectral_gap,
            "a_n_over_gap": self.a_n_over_gap,
        }


def _spectrum(B: np.ndarray, tol: Optional[float], max_iter: Optional[int]):
    lead = leading_eigenpair(B, tol=tol, max_iter=max_iter)
    lambda2 = second_eigenvalue(B, lead, tol=tol, max_iter=max_iter)
    return lead, lambda2


def eigenvector_centrality(
    supra,
    n_nodes: int,
    n_layers: int,
    a_n: float,
    gap_tol: Optional[float] = None,
    *,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    check_nonnegative: bool = True,
) -> CentralityBundle:
    """Leading eigenvector of the supra matrix reshaped to ``N x L``.

    Column ``l`` of ``V`` is the ``l``-th length-``N`` block of the
    eigenvector.  ``gap_tol`` defaults to ``1e-8 * |lambda_1|``.

    Pass ``check_nonnegative=False`` for an observed matrix ``B0 + E0``:
    its entries may be negative, so its leading eigenvector is returned
    as computed (sign-resolved, not clipped).
    """

    B = require_symmetric(supra, "supra")
    if B.shape[0] != n_nodes * n_layers:
        raise DimensionMismatch(
            f"supra matrix is {B.shape[0]}x{B.shape[0]} but N*L = {n_nodes * n_layers}"
        )
    if B.shape[0] < 2:
        raise DimensionMismatch(
            "eigenvector centrality needs N*L >= 2; a 1x1 supra matrix has no spectral gap"
        )
    if a_n <= 0:
        raise ValueError(f"a_n must be positive, got {a_n}")

    lead, lambda2 = _spectrum(B, tol, max_iter)
    gap = lead.value - lambda2
    threshold = GAP_RTOL * abs(lead.value) if gap_tol is None else gap_tol
    if gap < threshold or gap <= 0:
        raise SpectralGapTooSmall(
            f"spectral gap {gap:.3e} below tolerance {threshold:.3e} (lambda1={lead.value:.6g})"
        )

    vector = lead.vector.copy()
    if check_nonnegative:
        if vector.min() < -NEGATIVE_ENTRY_TOL:
            raise NegativeEntries(
                f"leading eigenvector has entry {vector.min():.3e}; the supra graph is likely disconnected"
            )
        vector[vector < 0] = 0.0
        vector /= np.linalg.norm(vector)

    V = vector.reshape(n_layers, n_nodes).T.copy()
    logger.debug(
        "centrality N=%s L=%s lambda1=%.6g lambda2=%.6g gap=%.6g",
        n_nodes,
        n_layers,
        lead.value,
        lambda2,
        gap,
    )
    return CentralityBundle(
        lambda1=lead.value,
        lambda2=lambda2,
        gap=gap,
        V=V,
        C=a_n * V,
        a_n=float(a_n),
    )


def community_centrality(centrality, comm: CommunityStructure):
    """Return ``(U, Z)`` with ``U = S (H . S^T C)`` and ``Z`` its row means."""

    C = as_matrix(centrality, "C")
    if C.shape[0] != comm.n_nodes:
        raise DimensionMismatch(f"C has {C.shape[0]} rows but {comm.n_nodes} nodes are labelled")
    S = comm.S
    H = comm.H.reshape(-1, 1)
    U = S @ face_splitting(H, S.T @ C)
    Z = U.mean(axis=1)
    return U, Z


def assumption_diagnostics(
    supra,
    covariates,
    V,
    comm: Optional[CommunityStructure],
    a_n: float,
    *,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> AssumptionDiagnostics:
    """Measured counterparts of the identifiability and spectral-gap conditions."""

    B0 = require_symmetric(supra, "B0")
    block = as_matrix(V, "V")
    if B0.shape[0] != block.size:
        raise DimensionMismatch(f"B0 is {B0.shape[0]}x{B0.shape[0]} but V has {block.size} entries")
    if comm is not None and block.shape[0] != comm.n_nodes:
        raise DimensionMismatch("V and the community labels disagree on N")

    sigma_min = smallest_singular_value_residual(covariates, block)
    lead, lambda2 = _spectrum(B0, tol, max_iter)
    gap = lead.value - lambda2
    l1_norms = np.abs(block).sum(axis=1)
    # ||C_i||_1^2 * N / a_n^2 with C = a_n V
    l1_ratio = float(l1_norms.min() ** 2 * block.shape[0])
    return AssumptionDiagnostics(
        sigma_min=sigma_min,
        min_community_share=None if comm is None else comm.min_share(),
        centrality_l1_ratio=l1_ratio,
        lambda1=lead.value,
        lambda2=lambda2,
        spectral_gap=gap,
        a_n_over_gap=float(a_n / gap) if gap > 0 else float("inf"),
    )
