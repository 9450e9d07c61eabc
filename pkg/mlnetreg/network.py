"""Multilayer network data model and supra-adjacency assembly.

Supra indices are layer-major: node ``i`` of layer ``l`` (both 0-based here,
1-based in files) sits at position ``l * N + i``.  Only interlayer blocks with
``l < l2`` are stored; the ``(l2, l)`` block is the transpose.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from mlnetreg.exceptions import AsymmetricInput, DataError, DimensionMismatch
from mlnetreg.linalg import as_matrix, is_symmetric, require_symmetric
from mlnetreg.rng import SeedLike, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultilayerNetwork:
    n_nodes: int
    n_layers: int
    intralayer: Tuple[np.ndarray, ...]
    interlayer: Mapping[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_layers < 1 or self.n_nodes < 1:
            raise DimensionMismatch("a network needs at least one node and one layer")
        if len(self.intralayer) != self.n_layers:
            raise DimensionMismatch(
                f"expected {self.n_layers} layer matrices, got {len(self.intralayer)}"
            )
        shape = (self.n_nodes, self.n_nodes)
        for index, layer in enumerate(self.intralayer):
            if layer.shape != shape:
                raise DimensionMismatch(f"layer {index + 1} has shape {layer.shape}, expected {shape}")
            if not is_symmetric(layer):
                raise AsymmetricInput(f"layer {index + 1} is not symmetric")
            if (layer < 0).any():
                raise DataError(f"layer {index + 1} has negative entries")
        for (first, second), block in self.interlayer.items():
            if not 0 <= first < second < self.n_layers:
                raise DimensionMismatch(
                    f"interlayer key ({first}, {second}) must satisfy 0 <= l < l2 < {self.n_layers}"
                )
            if block.shape != shape:
                raise DimensionMismatch(
                    f"interlayer block ({first}, {second}) has shape {block.shape}, expected {shape}"
                )

    @classmethod
    def from_arrays(
        cls,
        layers: Sequence,
        interlayer: Optional[Mapping[Tuple[int, int], object]] = None,
    ) -> "MultilayerNetwork":
        matrices = tuple(as_matrix(layer, "layer") for layer in layers)
        if not matrices:
            raise DimensionMismatch("at least one layer is required")
        blocks: Dict[Tuple[int, int], np.ndarray] = {
            key: as_matrix(value, "interlayer block") for key, value in (interlayer or {}).items()
        }
        return cls(
            n_nodes=matrices[0].shape[0],
            n_layers=len(matrices),
            intralayer=matrices,
            interlayer=blocks,
        )

    @property
    def size(self) -> int:
        return self.n_nodes * self.n_layers


class NoiseStructure(Enum):
    FULL_SYMMETRIC = "full"
    BLOCK_DIAGONAL = "block"


@dataclass(frozen=True)
class NoiseSpec:
    sigma_b: float
    structure: NoiseStructure = NoiseStructure.FULL_SYMMETRIC
    seed: SeedLike = 0

    def __post_init__(self) -> None:
        if self.sigma_b < 0:
            raise ValueError(f"sigma_b must be nonnegative, got {self.sigma_b}")


def assemble_supra(net: MultilayerNetwork) -> np.ndarray:
    N, L = net.n_nodes, net.n_layers
    supra = np.zeros((N * L, N * L))
    for layer, matrix in enumerate(net.intralayer):
        supra[layer * N:(layer + 1) * N, layer * N:(layer + 1) * N] = matrix
    for (first, second), block in net.interlayer.items():
        supra[first * N:(first + 1) * N, second * N:(second + 1) * N] = block
        supra[second * N:(second + 1) * N, first * N:(first + 1) * N] = block.T
    if not is_symmetric(supra):
        raise AsymmetricInput("assembled supra-adjacency matrix is not symmetric")
    return supra


def make_multiplex(layers: Sequence) -> MultilayerNetwork:
    """Multiplex: every node is coupled to its own copies with weight 1."""

    matrices = [as_matrix(layer, "layer") for layer in layers]
    if not matrices:
        raise DimensionMismatch("at least one layer is required")
    n = matrices[0].shape[0]
    for index, matrix in enumerate(matrices):
        if matrix.shape != (n, n):
            raise DimensionMismatch(f"layer {index + 1} has shape {matrix.shape}, expected {(n, n)}")
    identity = np.eye(n)
    coupling = {
        (first, second): identity
        for first in range(len(matrices))
        for second in range(first + 1, len(matrices))
    }
    return MultilayerNetwork.from_arrays(matrices, coupling)


def extract_block(supra, n_nodes: int, layer: int, other: int) -> np.ndarray:
    B = as_matrix(supra, "supra")
    return B[layer * n_nodes:(layer + 1) * n_nodes, other * n_nodes:(other + 1) * n_nodes].copy()


def block_diagonal_permutation(permutation: Sequence[int], n_layers: int) -> np.ndarray:
    """Supra index array applying the node permutation inside every layer."""

    perm = np.asarray(permutation, dtype=int)
    n = perm.shape[0]
    return np.concatenate([layer * n + perm for layer in range(n_layers)])


def perturb(
    supra,
    spec: NoiseSpec,
    *,
    n_nodes: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(B, E0)`` with ``B = B0 + E0`` and symmetric Gaussian ``E0``.

    ``FULL_SYMMETRIC`` draws every entry on and above the diagonal;
    ``BLOCK_DIAGONAL`` only those inside the diagonal ``N x N`` layer blocks
    and therefore needs ``n_nodes``.
    """

    B0 = require_symmetric(supra, "B0")
    size = B0.shape[0]
    noise = np.zeros_like(B0)
    rng = make_rng(spec.seed)

    if spec.structure is NoiseStructure.FULL_SYMMETRIC:
        rows, cols = np.triu_indices(size)
        noise[rows, cols] = rng.normal(0.0, spec.sigma_b, size=rows.shape[0])
    else:
        if n_nodes is None or n_nodes < 1 or size % n_nodes:
            raise DimensionMismatch(
                f"block-diagonal noise needs n_nodes dividing the supra size {size}"
            )
        rows, cols = np.triu_indices(n_nodes)
        for layer in range(size // n_nodes):
            offset = layer * n_nodes
            noise[offset + rows, offset + cols] = rng.normal(0.0, spec.sigma_b, size=rows.shape[0])

    upper = np.triu(noise, 1)
    noise = upper + upper.T + np.diag(np.diag(noise))
    logger.debug("perturbed %sx%s supra with sigma_b=%s (%s)", size, size, spec.sigma_b, spec.structure.value)
    return B0 + noise, noise
