"""Multi-layer stochastic block model: domain types, generator, diagnostics.

A multi-layer SBM shares one community assignment across L layers while
each layer carries its own symmetric connectivity matrix.  This module
holds the network/label/connectivity value types, the seeded generator,
the connectivity recipes used by the simulation experiments, the
misclustering metric, and soft assumption diagnostics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .rng import generator

__all__ = [
    "MultiLayerNetwork",
    "ConnectivityModel",
    "CommunityLabels",
    "GeneratorConfig",
    "MisclusterReport",
    "AssumptionReport",
    "generate_msbm",
    "make_experiment_connectivity",
    "misclustering_error",
    "check_assumptions",
]

# Exact permutation search is cheap up to this label-space size; beyond it
# misclustering_error switches to minimum-cost assignment matching.
EXACT_PERMUTATION_LIMIT = 8


@dataclass
class MultiLayerNetwork:
    """n nodes observed across L layers of simple undirected graphs.

    Each layer is a dense symmetric 0/1 matrix with a zero diagonal.
    """

    n: int
    L: int
    layers: list[np.ndarray]

    def __post_init__(self) -> None:
        if self.n <= 0 or self.L <= 0:
            raise ValueError("n and L must be positive")
        if len(self.layers) != self.L:
            raise ValueError(f"expected {self.L} layers, got {len(self.layers)}")
        layers = []
        for idx, A in enumerate(self.layers):
            A = np.asarray(A, dtype=np.uint8)
            if A.shape != (self.n, self.n):
                raise ValueError(f"layer {idx}: shape {A.shape} != ({self.n}, {self.n})")
            if not (A <= 1).all():
                raise ValueError(f"layer {idx}: entries must be 0 or 1")
            if (A != A.T).any():
                raise ValueError(f"layer {idx}: adjacency matrix not symmetric")
            if np.diagonal(A).any():
                raise ValueError(f"layer {idx}: diagonal must be zero")
            layers.append(A)
        self.layers = layers

    def edge_counts(self) -> list[int]:
        """Number of undirected edges per layer."""
        return [int(A.sum()) // 2 for A in self.layers]


@dataclass
class ConnectivityModel:
    """Layer-wise K x K symmetric edge-probability matrices.

    ``rho`` (sparsity scale) and ``delta`` (declared margin from the 0/1
    boundary) are optional metadata; when ``delta`` is declared every
    entry must lie in [delta, 1 - delta].
    """

    K: int
    L: int
    B: list[np.ndarray]
    rho: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self) -> None:
        if self.K <= 0 or self.L <= 0:
            raise ValueError("K and L must be positive")
        if len(self.B) != self.L:
            raise ValueError(f"expected {self.L} connectivity matrices, got {len(self.B)}")
        mats = []
        for idx, B in enumerate(self.B):
            B = np.asarray(B, dtype=np.float64)
            if B.shape != (self.K, self.K):
                raise ValueError(f"layer {idx}: shape {B.shape} != ({self.K}, {self.K})")
            if not np.allclose(B, B.T, rtol=0.0, atol=1e-12):
                raise ValueError(f"layer {idx}: connectivity matrix not symmetric")
            if (B < 0).any() or (B > 1).any():
                raise ValueError(f"layer {idx}: probabilities outside [0, 1]")
            mats.append(B)
        self.B = mats
        if self.delta is not None:
            lo = min(float(B.min()) for B in self.B)
            hi = max(float(B.max()) for B in self.B)
            if lo < self.delta or hi > 1.0 - self.delta:
                raise ValueError(
                    f"entries in [{lo:.6g}, {hi:.6g}] violate declared margin delta={self.delta}"
                )


@dataclass
class CommunityLabels:
    """Length-n assignment vector with values in {1..K}."""

    labels: np.ndarray
    K: int

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ValueError("labels must be a 1-d vector")
        if self.K <= 0:
            raise ValueError("K must be positive")
        if self.labels.size and ((self.labels < 1).any() or (self.labels > self.K).any()):
            raise ValueError(f"labels must lie in 1..{self.K}")

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def sizes(self) -> np.ndarray:
        """Cluster sizes n_k for k = 1..K (zeros for empty clusters)."""
        return np.bincount(self.labels - 1, minlength=self.K).astype(np.int64)

    def clusters(self) -> list[np.ndarray]:
        """Node index sets (0-based) per cluster, partitioning 0..n-1."""
        return [np.flatnonzero(self.labels == k + 1) for k in range(self.K)]

    def zero_based(self) -> np.ndarray:
        return self.labels - 1


@dataclass
class GeneratorConfig:
    """Inputs for one synthetic multi-layer SBM draw."""

    n: int
    L: int
    K: int
    connectivity: Union[ConnectivityModel, str]
    seed: int
    membership: Optional[np.ndarray] = None  # explicit 1-based labels, else uniform
    rho: Optional[float] = None  # only used when connectivity is a recipe name

    def __post_init__(self) -> None:
        if not (self.n >= self.K >= 1):
            raise ValueError("need n >= K >= 1")
        if self.L < 1:
            raise ValueError("need L >= 1")
        if isinstance(self.connectivity, ConnectivityModel):
            if self.connectivity.K != self.K or self.connectivity.L != self.L:
                raise ValueError("connectivity dimensions do not match K, L")
        if self.membership is not None:
            self.membership = np.asarray(self.membership, dtype=np.int64)
            if self.membership.shape != (self.n,):
                raise ValueError("explicit membership must have length n")
            if (self.membership < 1).any() or (self.membership > self.K).any():
                raise ValueError(f"explicit membership must lie in 1..{self.K}")


@dataclass
class MisclusterReport:
    """Minimum misclassification count over label relabelings.

    ``mapping`` sends labels of the first vector to labels of the second
    under the optimal matching.
    """

    m: int
    mapping: dict[int, int]


@dataclass
class AssumptionReport:
    """Soft diagnostics: probability margin and community balance."""

    delta: float
    balance_ratio: float
    warnings: list[str] = field(default_factory=list)


def generate_msbm(config: GeneratorConfig) -> tuple[MultiLayerNetwork, CommunityLabels]:
    """Draw one multi-layer SBM network.

    Node memberships are iid uniform over {1..K} unless explicit labels
    are supplied.  For i < j, layer ell has an edge with probability
    B_ell[theta_i, theta_j], drawn independently; matrices are
    symmetrized and the diagonal is zero.  Bit-identical output for a
    fixed seed: the (seed, 0) stream draws the labels first, then the
    strict upper triangle of each layer in layer order.
    """
    conn = config.connectivity
    if isinstance(conn, str):
        conn = make_experiment_connectivity(
            conn, config.K, config.L, rho=config.rho, seed=config.seed
        )
    rng = generator(config.seed, 0)
    if config.membership is not None:
        labels = CommunityLabels(config.membership.copy(), config.K)
    else:
        labels = CommunityLabels(rng.integers(1, config.K + 1, size=config.n), config.K)

    theta0 = labels.zero_based()
    n = config.n
    iu = np.triu_indices(n, 1)
    layers = []
    for ell in range(config.L):
        P_upper = conn.B[ell][theta0[iu[0]], theta0[iu[1]]]
        draws = rng.random(P_upper.size)
        A = np.zeros((n, n), dtype=np.uint8)
        A[iu] = draws < P_upper
        A |= A.T
        layers.append(A)
    return MultiLayerNetwork(n=n, L=config.L, layers=layers), labels


def make_experiment_connectivity(
    recipe: str,
    K: int,
    L: int,
    rho: Optional[float] = None,
    seed: int = 0,
    epsilons: Optional[Sequence[float]] = None,
) -> ConnectivityModel:
    """Connectivity matrices for the two simulation designs.

    ``exp1``: per layer and entry, diagonal ~ Uniform(0.65, 0.75) and
    off-diagonal ~ Uniform(0.25, 0.35), symmetric fill; ``rho`` unused.

    ``exp2or3``: B_ell[k, l] = rho * (0.3 + eps_ell + 0.4 * [k == l])
    with one eps_ell ~ Uniform(-0.1, 0.1) per layer.  ``epsilons``
    overrides the draws (test hook).

    Deterministic given seed; draws come from the (seed, 1) stream.
    """
    if K < 1 or L < 1:
        raise ValueError("need K >= 1 and L >= 1")
    rng = generator(seed, 1)
    mats = []
    if recipe == "exp1":
        for _ in range(L):
            B = np.empty((K, K))
            iu = np.triu_indices(K, 1)
            off = rng.uniform(0.25, 0.35, size=iu[0].size)
            B[iu] = off
            B.T[iu] = off
            np.fill_diagonal(B, rng.uniform(0.65, 0.75, size=K))
            mats.append(B)
        return ConnectivityModel(K=K, L=L, B=mats, delta=0.25)
    if recipe == "exp2or3":
        if rho is None:
            raise ValueError("recipe 'exp2or3' requires rho")
        if rho * 0.8 > 1.0:
            raise ValueError(f"rho={rho} puts diagonal entries above 1")
        if epsilons is not None and len(epsilons) != L:
            raise ValueError("need one epsilon per layer")
        for ell in range(L):
            eps = rng.uniform(-0.1, 0.1)
            if epsilons is not None:
                eps = float(epsilons[ell])
            B = rho * (0.3 + eps + 0.4 * np.eye(K))
            if (B < 0).any() or (B > 1).any():
                raise ValueError(f"layer {ell}: entry outside [0, 1] (rho={rho}, eps={eps})")
            mats.append(B)
        return ConnectivityModel(K=K, L=L, B=mats, rho=rho)
    raise ValueError(f"unknown recipe {recipe!r} (expected 'exp1' or 'exp2or3')")


def _confusion(a: CommunityLabels, b: CommunityLabels) -> np.ndarray:
    C = np.zeros((a.K, b.K), dtype=np.int64)
    np.add.at(C, (a.labels - 1, b.labels - 1), 1)
    return C


def misclustering_error(a: CommunityLabels, b: CommunityLabels) -> MisclusterReport:
    """Minimum number of disagreeing nodes over relabelings of ``a``.

    m = min_pi |{i : pi(a_i) != b_i}|.  Exact permutation search for
    K <= 8, minimum-cost assignment matching for larger (or unequal)
    label spaces; both return the exact optimum.
    """
    if a.n != b.n:
        raise ValueError(f"label vectors differ in length ({a.n} vs {b.n})")
    C = _confusion(a, b)
    if a.K == b.K and a.K <= EXACT_PERMUTATION_LIMIT:
        best_hits = -1
        best_perm: tuple[int, ...] = tuple(range(a.K))
        for perm in permutations(range(b.K)):
            hits = int(C[np.arange(a.K), perm].sum())
            if hits > best_hits:
                best_hits = hits
                best_perm = perm
        mapping = {k + 1: best_perm[k] + 1 for k in range(a.K)}
        return MisclusterReport(m=a.n - best_hits, mapping=mapping)
    # Rectangular / large case: maximize matched agreement.
    rows, cols = linear_sum_assignment(C, maximize=True)
    hits = int(C[rows, cols].sum())
    mapping = {int(r) + 1: int(c) + 1 for r, c in zip(rows, cols)}
    return MisclusterReport(m=a.n - hits, mapping=mapping)


def check_assumptions(model: ConnectivityModel, labels: CommunityLabels) -> AssumptionReport:
    """Report the achievable probability margin and community balance.

    delta = min(min entry, 1 - max entry) over all layers; balance is
    min_k n_k / (n / K).  Emits warnings only, never raises.
    """
    lo = min(float(B.min()) for B in model.B)
    hi = max(float(B.max()) for B in model.B)
    delta = min(lo, 1.0 - hi)
    notes = []
    if delta <= 0.0:
        notes.append(
            f"edge probabilities touch the 0/1 boundary (min={lo:.6g}, max={hi:.6g}); "
            "the normalized aggregation variance can degenerate"
        )
    sizes = labels.sizes()
    balance = float(sizes.min() / (labels.n / labels.K)) if labels.n else 0.0
    if balance == 0.0:
        notes.append("at least one community is empty")
    elif balance < 0.5:
        notes.append(f"communities are unbalanced (min size ratio {balance:.3f})")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return AssumptionReport(delta=delta, balance_ratio=balance, warnings=notes)
