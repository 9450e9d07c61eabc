"""Dense symmetric linear algebra used throughout the package.

Eigenpairs come from shifted power iteration so that the returned eigenvalue
is always the algebraically largest one, even for indefinite adjacency-like
matrices.  Least squares goes through a Householder QR factorisation
(``numpy.linalg.qr``) and flags rank deficiency instead of regularising it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_triangular

from mlnetreg.exceptions import (
    AsymmetricInput,
    DimensionMismatch,
    EmptyMatrix,
    NonConvergence,
    RankDeficient,
)
from mlnetreg.settings import get_eig_tol, get_max_iter

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class LeastSquaresResult:
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    sigma2_hat: float
    xtx_inverse_diag: np.ndarray


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {matrix.shape}")
    return matrix


def is_symmetric(matrix: np.ndarray) -> bool:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if matrix.size == 0:
        return True
    scale = max(1.0, float(np.abs(matrix).max()))
    return bool(np.abs(matrix - matrix.T).max() <= SYMMETRY_RTOL * scale)


def require_symmetric(matrix: np.ndarray, name: str = "matrix") -> np.ndarray:
    matrix = as_matrix(matrix, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {matrix.shape}")
    if not is_symmetric(matrix):
        raise AsymmetricInput(f"{name} is not symmetric")
    return matrix


def gershgorin_shift(matrix: np.ndarray) -> float:
    """Largest absolute row sum; ``M + sI`` is then positive semi-definite."""

    return float(np.abs(matrix).sum(axis=1).max())


def _start_vector(n: int, *, uniform: bool) -> np.ndarray:
    if uniform:
        start = np.ones(n)
    else:
        # fixed stream so repeated calls are bit-identical
        start = np.random.default_rng(0x5EED).standard_normal(n)
    return start / np.linalg.norm(start)


def _power_iterate(
    matvec: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    *,
    shift: float,
    tol: float,
    max_iter: int,
    track_vector: bool,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> EigenResult:
    v = start
    value = 0.0
    residual = float("inf")
    for iteration in range(1, max_iter + 1):
        w = matvec(v)
        value = float(v @ w)
        defect = w - value * v
        if project is not None:
            # residual of the deflated operator, restricted to the complement of v1
            defect = project(defect)
        residual = float(np.linalg.norm(defect))
        shifted = w + shift * v
        if project is not None:
            shifted = project(shifted)
        norm = float(np.linalg.norm(shifted))
        if norm == 0.0:
            # v lies in the null space of the shifted operator
            return EigenResult(value, v, iteration, residual)
        following = shifted / norm
        done = residual <= tol
        if track_vector:
            done = done and float(np.linalg.norm(following - v)) < tol
        if done:
            return EigenResult(value, v, iteration, residual)
        v = following

    if residual <= tol:
        return EigenResult(value, v, max_iter, residual)
    raise NonConvergence(
        f"power iteration did not converge in {max_iter} iterations (residual={residual:.3e})"
    )


def _resolve_sign(vector: np.ndarray) -> np.ndarray:
    if vector.sum() < 0:
        return -vector
    return vector


def leading_eigenpair(
    matrix,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> EigenResult:
    """Return the algebraically largest eigenpair of a symmetric matrix.

    Power iteration runs on ``M + sI`` with the Gershgorin shift ``s`` and
    starts from the normalised all-ones vector.  Convergence requires both a
    successive-iterate distance below ``tol`` and a residual
    ``||Mv - lambda v||`` no larger than ``tol``.
    """

    M = require_symmetric(matrix)
    n = M.shape[0]
    if n == 0:
        raise EmptyMatrix("cannot compute an eigenpair of an empty matrix")
    tol = get_eig_tol() if tol is None else tol
    max_iter = get_max_iter() if max_iter is None else max_iter
    if tol <= 0:
        raise ValueError("tol must be positive")

    shift = gershgorin_shift(M)
    result = _power_iterate(
        lambda v: M @ v,
        _start_vector(n, uniform=True),
        shift=shift,
        tol=tol,
        max_iter=max_iter,
        track_vector=True,
    )
    if n > 1 and np.linalg.norm(M @ result.vector + shift * result.vector) == 0.0:
        # all-ones start fell into the null space of M + sI; retry off-axis
        result = _power_iterate(
            lambda v: M @ v,
            _start_vector(n, uniform=False),
            shift=shift,
            tol=tol,
            max_iter=max_iter,
            track_vector=True,
        )
    vector = _resolve_sign(result.vector)
    logger.debug(
        "leading eigenpair n=%s value=%.6g iterations=%s residual=%.3e",
        n,
        result.value,
        result.iterations,
        result.residual,
    )
    return EigenResult(result.value, vector, result.iterations, result.residual)


def second_eigenvalue(
    matrix,
    lead: EigenResult,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> float:
    """Second-largest algebraic eigenvalue via deflation of ``lead``.

    Iterates on ``(M + sI) - (lambda_1 + s) v_1 v_1^T``, whose spectrum is
    nonnegative, so its dominant eigenvalue is ``lambda_2 + s``.  Iteration
    stops once the residual of the deflated operator is at most ``tol``.
    """

    M = require_symmetric(matrix)
    n = M.shape[0]
    if n == 0:
        raise EmptyMatrix("cannot compute an eigenvalue of an empty matrix")
    if n == 1:
        raise DimensionMismatch("a 1x1 matrix has no second eigenvalue")
    tol = get_eig_tol() if tol is None else tol
    max_iter = get_max_iter() if max_iter is None else max_iter

    shift = gershgorin_shift(M)
    v1 = lead.vector
    weight = lead.value + shift

    def deflated(v: np.ndarray) -> np.ndarray:
        return M @ v - weight * float(v1 @ v) * v1

    def orthogonalise(v: np.ndarray) -> np.ndarray:
        return v - float(v1 @ v) * v1

    start = orthogonalise(_start_vector(n, uniform=False))
    start /= np.linalg.norm(start)
    result = _power_iterate(
        deflated,
        start,
        shift=shift,
        tol=tol,
        max_iter=max_iter,
        track_vector=False,
        project=orthogonalise,
    )
    return min(result.value, lead.value)


def least_squares(design, response) -> LeastSquaresResult:
    """Ordinary least squares by Householder QR.

    Raises :class:`RankDeficient` when the smallest ``|R_ii|`` falls below
    ``1e-12`` times the largest, i.e. the design is not of full column rank.
    """

    W = as_matrix(design, "design")
    y = np.asarray(response, dtype=np.float64).reshape(-1)
    n, q = W.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"design has {n} rows but response has {y.shape[0]} entries")
    if q < 1 or n <= q:
        raise DimensionMismatch(f"least squares needs n > q >= 1, got n={n}, q={q}")

    Q, R = np.linalg.qr(W, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() < RANK_RTOL * diag.max():
        raise RankDeficient(
            f"design matrix is not of full column rank (min |R_ii|={diag.min():.3e}, max={diag.max():.3e})"
        )
    coefficients = solve_triangular(R, Q.T @ y)
    residuals = y - W @ coefficients
    rss = float(residuals @ residuals)
    r_inverse = solve_triangular(R, np.eye(q))
    xtx_inverse_diag = np.einsum("ij,ij->i", r_inverse, r_inverse)
    return LeastSquaresResult(
        coefficients=coefficients,
        residuals=residuals,
        rss=rss,
        sigma2_hat=rss / (n - q),
        xtx_inverse_diag=xtx_inverse_diag,
    )


def face_splitting(left, right) -> np.ndarray:
    """Row-wise Kronecker product (transposed Khatri-Rao)."""

    A = as_matrix(left, "left")
    B = as_matrix(right, "right")
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch(
            f"face-splitting needs equal row counts, got {A.shape[0]} and {B.shape[0]}"
        )
    rows = A.shape[0]
    return (A[:, :, None] * B[:, None, :]).reshape(rows, A.shape[1] * B.shape[1])


def projection_residual(covariates, block) -> np.ndarray:
    """Return ``(I - P_X) V`` where ``P_X`` projects onto the columns of ``X``."""

    V = as_matrix(block, "V")
    X = np.asarray(covariates, dtype=np.float64)
    if X.size == 0:
        return V.copy()
    X = as_matrix(X, "X")
    if X.shape[0] != V.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows but V has {V.shape[0]}")
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() < RANK_RTOL * diag.max():
        raise RankDeficient("covariate matrix X is not of full column rank")
    return V - Q @ (Q.T @ V)


def smallest_singular_value_residual(covariates, block) -> float:
    """``sigma_min((I - P_X) V)`` from the smallest eigenvalue of the L x L Gram matrix."""

    V = as_matrix(block, "V")
    X = np.asarray(covariates, dtype=np.float64)
    n_cov = 0 if X.size == 0 else as_matrix(X, "X").shape[1]
    if V.shape[0] <= n_cov + V.shape[1]:
        raise DimensionMismatch(
            f"need n > P + L, got n={V.shape[0]}, P={n_cov}, L={V.shape[1]}"
        )
    residual = projection_residual(X, V)
    gram = residual.T @ residual
    smallest = float(np.linalg.eigvalsh(gram)[0])
    return float(np.sqrt(max(smallest, 0.0)))


def spectral_norm(matrix) -> float:
    M = as_matrix(matrix)
    if is_symmetric(M):
        return float(np.abs(np.linalg.eigvalsh(M)).max())
    return float(np.linalg.norm(M, 2))
