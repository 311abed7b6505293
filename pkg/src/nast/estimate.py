"""Plug-in estimation of block and node-pair edge probabilities.

Given a network and a label vector with K0 clusters, each layer's block
matrix is estimated by empirical edge frequencies: off-diagonal blocks
average over all cross pairs, diagonal blocks over unordered within-
cluster pairs, and degenerate denominators (empty or singleton
clusters) yield 0.  Node-pair probabilities are the block lookups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CommunityLabels, MultiLayerNetwork
from .spectral import detect_communities

__all__ = [
    "BlockEstimates",
    "ProbabilityMatrices",
    "estimate_connectivity",
    "expand_probabilities",
    "estimate_parameters",
]


@dataclass
class BlockEstimates:
    """Per-layer K0 x K0 empirical block probabilities."""

    K0: int
    Bhat: list[np.ndarray]


@dataclass
class ProbabilityMatrices:
    """Per-layer n x n block-constant probability matrices.

    The diagonal is stored (plain block lookup) but never consumed:
    the aggregation matrices zero it explicitly.
    """

    Phat: list[np.ndarray]

    @property
    def L(self) -> int:
        return len(self.Phat)

    @property
    def n(self) -> int:
        return int(self.Phat[0].shape[0])


def estimate_connectivity(net: MultiLayerNetwork, labels: CommunityLabels) -> BlockEstimates:
    """Empirical block edge frequencies for every layer.

    Off-diagonal block (k, l): mean of A over pairs in C_k x C_l.
    Diagonal block (k, k) with at least two members: edge count over
    unordered pairs divided by n_k (n_k - 1) / 2.  Anything with a
    degenerate denominator is 0.
    """
    if labels.n != net.n:
        raise ValueError(f"labels length {labels.n} does not match n={net.n}")
    K0 = labels.K
    theta0 = labels.zero_based()
    membership = np.zeros((net.n, K0))
    membership[np.arange(net.n), theta0] = 1.0
    sizes = membership.sum(axis=0)
    denom = np.outer(sizes, sizes)
    # Diagonal blocks sum A over ordered within-cluster pairs; dividing
    # by n_k (n_k - 1) matches the unordered-pair mean exactly.
    np.fill_diagonal(denom, sizes * (sizes - 1.0))
    Bhat = []
    for A in net.layers:
        counts = membership.T @ A.astype(np.float64) @ membership
        counts = 0.5 * (counts + counts.T)  # BLAS order can differ by an ulp across the diagonal
        B = np.where(denom > 0.0, counts / np.where(denom > 0.0, denom, 1.0), 0.0)
        Bhat.append(B)
    return BlockEstimates(K0=K0, Bhat=Bhat)


def expand_probabilities(est: BlockEstimates, labels: CommunityLabels) -> ProbabilityMatrices:
    """Node-pair probabilities by block lookup: P[i, j] = B[theta_i, theta_j]."""
    if labels.K != est.K0:
        raise ValueError(f"label space {labels.K} does not match estimates K0={est.K0}")
    theta0 = labels.zero_based()
    return ProbabilityMatrices(Phat=[B[np.ix_(theta0, theta0)] for B in est.Bhat])


def estimate_parameters(
    net: MultiLayerNetwork, K0: int, seed: int
) -> tuple[CommunityLabels, ProbabilityMatrices]:
    """Detect K0 communities, then plug in block and pair probabilities."""
    labels = detect_communities(net, K0, seed)
    est = estimate_connectivity(net, labels)
    return labels, expand_probabilities(est, labels)
