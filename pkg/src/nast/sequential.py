"""Sequential community-count testing and the eta-ratio estimator.

For a candidate count K0 the single test fits K0 communities, builds
the plug-in normalized aggregation matrix, computes the cubic-trace
statistic T, and rejects when |T| >= z_{1-alpha/2}.  The sequential
procedure accepts the first K0 that survives; the eta estimator instead
locates the largest relative drop |T(K0-1)| / |T(K0)|, which is robust
on real networks where |T| never enters the acceptance band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .estimate import estimate_parameters
from .gof import normalized_aggregation, trace_cubed_statistic
from .model import CommunityLabels, MultiLayerNetwork
from .rng import derive_seed

__all__ = [
    "TestOutcome",
    "NastResult",
    "EtaResult",
    "normal_quantile",
    "statistic_at_k0",
    "test_at_k0",
    "nast",
    "eta_estimate",
    "eta_from_values",
    "default_k_max",
]

ETA_FLOOR = 1e-12  # |T| can be arbitrarily small at the correct K0

# Acklam's rational approximation to the standard normal quantile
# (|relative error| < 1.15e-9), refined below by one Newton step.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF, accurate to well below 1e-8.

    Rational approximation plus one Newton step on the CDF.  Requires
    0 < p < 1.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        x -= (_norm_cdf(x) - p) / pdf
    return x


@dataclass
class TestOutcome:
    """Single goodness-of-fit test at one candidate count."""

    K0: int
    T: float
    z_crit: float
    reject: bool
    labels: CommunityLabels


@dataclass
class NastResult:
    """Sequential test trace: first accepted K0, or exhaustion."""

    K_hat: Optional[int]
    trace: list[TestOutcome]
    terminated_by: str  # "accepted" | "k_max_exhausted"


@dataclass
class EtaResult:
    """Largest-relative-drop estimate over K0 = 2..k_max."""

    K_hat: int
    etas: np.ndarray  # eta at K0 = 2..k_max
    T_values: np.ndarray  # |T(K0)| for K0 = 1..k_max


def default_k_max(n: int) -> int:
    """Search bound ceil(sqrt(n)) used when none is given."""
    return int(math.ceil(math.sqrt(n)))


def statistic_at_k0(net: MultiLayerNetwork, K0: int, seed: int) -> tuple[float, CommunityLabels]:
    """Plug-in statistic at K0: fit, aggregate, cubic trace.

    The detection seed is derived by hashing (seed, K0), so evaluating
    more candidates never perturbs earlier ones.
    """
    labels, Phat = estimate_parameters(net, K0, derive_seed(seed, K0))
    agg = normalized_aggregation(net, Phat)
    return trace_cubed_statistic(agg), labels


def test_at_k0(net: MultiLayerNetwork, K0: int, alpha: float, seed: int) -> TestOutcome:
    """Test whether K0 communities fit, at significance level alpha."""
    if not 1 <= K0 <= net.n:
        raise ValueError(f"need 1 <= K0 <= n, got K0={K0}, n={net.n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    T, labels = statistic_at_k0(net, K0, seed)
    z = normal_quantile(1.0 - alpha / 2.0)
    return TestOutcome(K0=K0, T=T, z_crit=z, reject=bool(abs(T) >= z), labels=labels)


def nast(
    net: MultiLayerNetwork, alpha: float = 0.05, k_max: Optional[int] = None, seed: int = 0
) -> NastResult:
    """Sequential test: accept the first K0 with |T| below the critical value.

    Walks K0 = 1, 2, ... up to k_max (default ceil(sqrt(n))).  If no
    candidate is accepted the result reports exhaustion with the full
    trace rather than silently returning k_max.
    """
    if k_max is None:
        k_max = default_k_max(net.n)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    trace = []
    for K0 in range(1, min(k_max, net.n) + 1):
        outcome = test_at_k0(net, K0, alpha, seed)
        trace.append(outcome)
        if not outcome.reject:
            return NastResult(K_hat=K0, trace=trace, terminated_by="accepted")
    return NastResult(K_hat=None, trace=trace, terminated_by="k_max_exhausted")


def eta_from_values(t_values: Sequence[float]) -> EtaResult:
    """Eta ratios and argmax for a precomputed statistic sequence.

    t_values[k] is T(K0 = k + 1).  eta_{K0} = |T(K0-1)| / |T(K0)| with
    the denominator floored at 1e-12; the argmax runs over K0 >= 2 and
    ties break toward the smallest index.
    """
    absT = np.abs(np.asarray(t_values, dtype=np.float64))
    if absT.size < 2:
        raise ValueError("need statistics for at least K0 = 1 and 2")
    etas = absT[:-1] / np.maximum(absT[1:], ETA_FLOOR)
    K_hat = int(np.argmax(etas)) + 2
    return EtaResult(K_hat=K_hat, etas=etas, T_values=absT)


def eta_estimate(net: MultiLayerNetwork, k_max: Optional[int] = None, seed: int = 0) -> EtaResult:
    """Estimate the community count from the largest relative drop in |T|.

    Computes T(K0) for K0 = 1..k_max (default ceil(sqrt(n))) and picks
    the K0 >= 2 maximizing |T(K0-1)| / |T(K0)|.
    """
    if k_max is None:
        k_max = default_k_max(net.n)
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    k_max = min(k_max, net.n)
    if k_max < 2:
        raise ValueError(f"network too small for the eta estimator (n={net.n})")
    t_values = [statistic_at_k0(net, K0, seed)[0] for K0 in range(1, k_max + 1)]
    return eta_from_values(t_values)
