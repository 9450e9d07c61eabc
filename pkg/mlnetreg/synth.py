"""Stochastic block model layers, covariates and responses for the simulations."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np

from mlnetreg.centrality import CommunityStructure
from mlnetreg.exceptions import DataError, DegenerateRange, DimensionMismatch
from mlnetreg.linalg import as_matrix, is_symmetric
from mlnetreg.rng import SeedLike, make_rng, stream

logger = logging.getLogger(__name__)

BASE_CONN_PROB = np.array(
    [
        [0.8, 0.1, 0.1],
        [0.1, 0.8, 0.1],
        [0.1, 0.1, 0.8],
    ]
)
ALT_CONN_PROB = np.array(
    [
        [0.5, 0.25, 0.25],
        [0.25, 0.5, 0.25],
        [0.25, 0.25, 0.5],
    ]
)


class WeightDist(Enum):
    UNIFORM_1_2 = "uniform12"
    EXP_RESCALED = "exp-rescaled"


@dataclass(frozen=True)
class SbmSpec:
    n_nodes: int
    labels: CommunityStructure
    conn_prob: np.ndarray
    weight_dist: WeightDist = WeightDist.UNIFORM_1_2
    seed: SeedLike = 0

    def __post_init__(self) -> None:
        probs = as_matrix(self.conn_prob, "conn_prob")
        R = self.labels.n_communities
        if probs.shape != (R, R):
            raise DimensionMismatch(f"conn_prob must be {R}x{R}, got {probs.shape}")
        if (probs < 0).any() or (probs > 1).any():
            raise DataError("connection probabilities must lie in [0, 1]")
        if not is_symmetric(probs):
            raise DataError("connection probability matrix must be symmetric")
        if self.labels.n_nodes != self.n_nodes:
            raise DimensionMismatch(f"{self.labels.n_nodes} labels for {self.n_nodes} nodes")


def balanced_labels(n_nodes: int, n_communities: int) -> CommunityStructure:
    """Contiguous blocks; the first ``N mod R`` communities get one extra node."""

    if not 1 <= n_communities <= n_nodes:
        raise ValueError(f"need 1 <= R <= N, got R={n_communities}, N={n_nodes}")
    base, extra = divmod(n_nodes, n_communities)
    sizes = [base + (1 if community < extra else 0) for community in range(n_communities)]
    labels = np.repeat(np.arange(1, n_communities + 1), sizes)
    return CommunityStructure.from_labels(labels, n_communities)


def rescale_to_unit_band(matrix) -> np.ndarray:
    """Affinely map the nonzero entries onto ``[1, 2]``; zeros stay zero."""

    A = as_matrix(matrix, "matrix")
    nonzero = A != 0
    values = A[nonzero]
    if values.size == 0:
        raise DegenerateRange("matrix has no nonzero entries to rescale")
    low, high = float(values.min()), float(values.max())
    if high == low:
        raise DegenerateRange(f"all nonzero entries equal {low}")
    rescaled = np.zeros_like(A)
    rescaled[nonzero] = 1.0 + (values - low) / (high - low)
    return rescaled


def sample_sbm_layer(spec: SbmSpec) -> np.ndarray:
    """One weighted SBM layer: no self-loops, Bernoulli edges, symmetric."""

    rng = make_rng(spec.seed)
    n = spec.n_nodes
    rows, cols = np.triu_indices(n, 1)
    community = spec.labels.labels - 1
    probs = np.asarray(spec.conn_prob, dtype=np.float64)[community[rows], community[cols]]
    edges = rng.random(rows.shape[0]) < probs
    if spec.weight_dist is WeightDist.UNIFORM_1_2:
        weights = rng.uniform(1.0, 2.0, size=rows.shape[0])
    else:
        weights = rng.exponential(1.0, size=rows.shape[0])

    layer = np.zeros((n, n))
    layer[rows, cols] = np.where(edges, weights, 0.0)
    layer = layer + layer.T
    if spec.weight_dist is WeightDist.EXP_RESCALED and edges.any():
        layer = rescale_to_unit_band(layer)
    return layer


def build_multiplex_layers(
    labels: CommunityStructure,
    conn_probs: Sequence,
    weight_dists: Sequence[WeightDist],
    seed: SeedLike,
) -> List[np.ndarray]:
    """Independent SBM layers; layer ``l`` draws from stream ``(*seed, l)``."""

    if len(conn_probs) != len(weight_dists):
        raise DimensionMismatch("one connection matrix and one weight law per layer are required")
    return [
        sample_sbm_layer(
            SbmSpec(
                n_nodes=labels.n_nodes,
                labels=labels,
                conn_prob=np.asarray(probs, dtype=np.float64),
                weight_dist=dist,
                seed=stream(seed, layer),
            )
        )
        for layer, (probs, dist) in enumerate(zip(conn_probs, weight_dists))
    ]


def sample_covariates(n_nodes: int, n_covariates: int, seed: SeedLike) -> np.ndarray:
    return make_rng(seed).standard_normal((n_nodes, n_covariates))


def sample_response(
    covariates,
    net_covariate,
    beta_x: Sequence[float],
    beta_net: Sequence[float],
    sigma_y: float,
    seed: SeedLike,
) -> np.ndarray:
    """``y = X beta_x + net beta_net + eps`` with ``eps ~ N(0, sigma_y^2 I)``."""

    net = as_matrix(net_covariate, "network covariate")
    n = net.shape[0]
    X = np.asarray(covariates, dtype=np.float64)
    X = np.zeros((n, 0)) if X.size == 0 else as_matrix(X, "X")
    bx = np.asarray(beta_x, dtype=np.float64).reshape(-1)
    bn = np.asarray(beta_net, dtype=np.float64).reshape(-1)
    if X.shape[0] != n or X.shape[1] != bx.shape[0] or net.shape[1] != bn.shape[0]:
        raise DimensionMismatch(
            f"shapes disagree: X {X.shape}, beta_x {bx.shape}, network {net.shape}, beta_net {bn.shape}"
        )
    if sigma_y < 0:
        raise ValueError("sigma_y must be nonnegative")
    noise = make_rng(seed).normal(0.0, sigma_y, size=n)
    return X @ bx + net @ bn + noise
