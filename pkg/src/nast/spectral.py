"""Bias-adjusted spectral community detection.

Detection pipeline: debiased aggregation of squared adjacency matrices
M = sum_ell (A_ell^2 - D_ell), top-K0 eigenvectors of M, and k-means on
the eigenvector rows.  Subtracting the degree diagonal D_ell cancels the
self-path bias that A_ell^2 puts on the diagonal, so M has exactly zero
diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CommunityLabels, MultiLayerNetwork
from .rng import generator
from .symeig import EigenConvergenceError, symmetric_eigh

__all__ = [
    "EigenPairs",
    "EigenConvergenceError",
    "bias_adjusted_aggregate",
    "top_eigenvectors",
    "kmeans_rows",
    "detect_communities",
]

KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100
_RESIDUAL_TOL = 1e-8
_ASYMMETRY_TOL = 1e-10
_SIGN_TOL = 1e-8


@dataclass
class EigenPairs:
    """Descending eigenvalues with orthonormal eigenvector columns."""

    values: np.ndarray  # (K0,)
    vectors: np.ndarray  # (n, K0)


def bias_adjusted_aggregate(net: MultiLayerNetwork) -> np.ndarray:
    """Debiased sum of squared adjacency matrices.

    (A_ell^2)[i][i] equals the degree of node i in layer ell, so the
    degree subtraction leaves an exactly zero diagonal.
    """
    n = net.n
    M = np.zeros((n, n))
    for A in net.layers:
        Af = A.astype(np.float64)
        M += Af @ Af
    np.fill_diagonal(M, 0.0)
    return M


def top_eigenvectors(M: np.ndarray, K0: int) -> EigenPairs:
    """K0 algebraically largest eigenpairs of a symmetric matrix.

    Sign convention: the first component of each vector larger than
    1e-8 in magnitude is made positive.  Raises ValueError for
    asymmetric input and EigenConvergenceError if the solver's accuracy
    contract (residual <= 1e-8 * ||M||_F, orthonormal columns) fails.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if M.ndim != 2 or M.shape != (n, n):
        raise ValueError("M must be a square matrix")
    if not 1 <= K0 <= n:
        raise ValueError(f"need 1 <= K0 <= n, got K0={K0}, n={n}")
    scale = float(np.abs(M).max())
    if scale > 0.0:
        asym = float(np.abs(M - M.T).max()) / scale
        if asym > _ASYMMETRY_TOL:
            raise ValueError(f"matrix asymmetry {asym:.3e} exceeds {_ASYMMETRY_TOL:.0e}")
    values, vectors = symmetric_eigh(M, K0)
    for j in range(K0):
        col = vectors[:, j]
        lead = col[np.abs(col) > _SIGN_TOL]
        if lead.size and lead[0] < 0:
            vectors[:, j] = -col
    fnorm = float(np.linalg.norm(M))
    resid = np.linalg.norm(M @ vectors - vectors * values, axis=0)
    gram = vectors.T @ vectors
    ortho_err = float(np.abs(gram - np.eye(K0)).max())
    if (fnorm > 0 and resid.max() > _RESIDUAL_TOL * fnorm) or ortho_err > _RESIDUAL_TOL:
        raise EigenConvergenceError(
            f"eigenpair accuracy check failed (max residual {resid.max():.3e}, "
            f"orthonormality error {ortho_err:.3e}, ||M||_F {fnorm:.3e})"
        )
    return EigenPairs(values=values, vectors=vectors)


def _kmeans_once(X: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[j] = X[rng.integers(n)]
        else:
            centers[j] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    labels = None
    for _ in range(KMEANS_MAX_ITER):
        D = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = D.argmin(axis=1)
        for j in range(k):
            if not (assign == j).any():
                # Reseed an empty cluster with the point farthest from
                # its current center, then refresh the distances.
                far = int(D[np.arange(n), assign].argmax())
                centers[j] = X[far]
                assign[far] = j
                D = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        if labels is not None and (assign == labels).all():
            break
        labels = assign
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
    obj = float(((X - centers[labels]) ** 2).sum())
    return labels, obj


def kmeans_rows(U: np.ndarray, K0: int, seed: int) -> CommunityLabels:
    """Cluster matrix rows: k-means++ seeding, Lloyd iterations.

    10 restarts of at most 100 iterations each (stopping once the
    assignment stabilizes); the restart with the lowest within-cluster
    sum of squares wins.  Empty clusters are reseeded with the farthest
    point.  Deterministic given seed (stream (seed, 2)).
    """
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2:
        raise ValueError("U must be 2-d (one row per node)")
    n = U.shape[0]
    if K0 < 1:
        raise ValueError("K0 must be >= 1")
    if K0 > n:
        raise ValueError(f"K0={K0} exceeds number of rows n={n}")
    if K0 == 1:
        return CommunityLabels(np.ones(n, dtype=np.int64), 1)
    rng = generator(seed, 2)
    best_labels = None
    best_obj = np.inf
    for _ in range(KMEANS_RESTARTS):
        labels, obj = _kmeans_once(U, K0, rng)
        if obj < best_obj:
            best_obj = obj
            best_labels = labels
    return CommunityLabels(best_labels + 1, K0)


def detect_communities(net: MultiLayerNetwork, K0: int, seed: int) -> CommunityLabels:
    """Bias-adjusted SoS detection: aggregate, eigenvectors, k-means."""
    if not 1 <= K0 <= net.n:
        raise ValueError(f"need 1 <= K0 <= n, got K0={K0}, n={net.n}")
    M = bias_adjusted_aggregate(net)
    pairs = top_eigenvectors(M, K0)
    return kmeans_rows(pairs.vectors, K0, seed)
