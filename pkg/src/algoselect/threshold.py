"""Threshold learning from runtime log-ratios.

The decision threshold is the empirical median of ``ln T_sys - ln T_ran``,
banded by the DKW inequality.  For hypothesis selection under corrupted data
the median-of-means ERM estimator is provided.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from algoselect.comb import SeedingFunction

# zero timings from a coarse clock are lifted to this floor before taking logs
RUNTIME_FLOOR = 1e-7


@dataclass(frozen=True)
class LogRatioSample:
    r: float
    instance: Hashable = None


def clamp_runtime(seconds: float, floor: float = RUNTIME_FLOOR) -> float:
    return max(float(seconds), floor)


def log_ratio(t_sys: float, t_ran: float, instance: Hashable = None) -> LogRatioSample:
    """``ln(t_sys) - ln(t_ran)``; negative when the systematic solver is faster."""
    for name, v in (("t_sys", t_sys), ("t_ran", t_ran)):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be a positive finite runtime, got {v}")
    return LogRatioSample(math.log(t_sys) - math.log(t_ran), instance)


def dkw_epsilon(k: int, delta: float) -> float:
    """Half-width ``eps`` solving ``2 exp(-2 k eps^2) = delta``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * k))


def dkw_tail(k: int, eps: float) -> float:
    return 2.0 * math.exp(-2.0 * k * eps * eps)


@dataclass(frozen=True)
class ThresholdEstimate:
    theta_k: float
    k: int

    def epsilon_band(self, delta: float) -> float:
        return dkw_epsilon(self.k, delta)

    def to_dict(self, delta: float = 0.05) -> dict[str, Any]:
        return {"theta_k": self.theta_k, "k": self.k, "delta": delta, "epsilon_band": self.epsilon_band(delta)}


def sample_median(values: Sequence[float] | np.ndarray) -> float:
    """Middle order statistic; mean of the two middle ones for even counts."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("median of an empty sample")
    mid = n // 2
    if n % 2:
        return float(x[mid])
    return float((x[mid - 1] + x[mid]) / 2.0)


def empirical_median(samples: Sequence[LogRatioSample | float]) -> ThresholdEstimate:
    if len(samples) == 0:
        raise ValueError("empirical_median needs at least one sample")
    values = [s.r if isinstance(s, LogRatioSample) else float(s) for s in samples]
    return ThresholdEstimate(sample_median(values), len(values))


def threshold_to_seeding(
    theta: ThresholdEstimate | float, ratio_feature_index: int, slope: float, dim: int
) -> SeedingFunction:
    """Seeding function whose output crosses 0.5 exactly where the predicted ratio equals theta.

    ``t = sigmoid(slope * (phi[i] - theta))``, so a predicted ratio above the
    threshold (systematic slower) pushes mass to the random endpoint.
    """
    if not slope > 0:
        raise ValueError(f"slope must be positive, got {slope}")
    if not 0 <= ratio_feature_index < dim:
        raise ValueError(f"ratio_feature_index {ratio_feature_index} outside dimension {dim}")
    theta_k = theta.theta_k if isinstance(theta, ThresholdEstimate) else float(theta)
    weights = [0.0] * dim
    weights[ratio_feature_index] = float(slope)
    return SeedingFunction(tuple(weights), -slope * theta_k)


@dataclass(frozen=True)
class HypothesisClass:
    """Finite hypothesis class with a bounded loss ``loss(h, z) in [0, 1]``."""

    hypotheses: tuple[Any, ...]
    loss: Callable[[Any, Any], float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        if not self.hypotheses:
            raise ValueError("hypothesis class must be nonempty")

    def __len__(self) -> int:
        return len(self.hypotheses)

    def loss_matrix(self, data: Sequence[Any]) -> np.ndarray:
        """``L[j, i] = loss(h_j, z_i)``, validated to lie in [0, 1]."""
        out = np.array([[self.loss(h, z) for z in data] for h in self.hypotheses], dtype=float)
        if out.size and (np.any(out < 0) or np.any(out > 1) or not np.all(np.isfinite(out))):
            raise ValueError("loss evaluations must lie in [0, 1]")
        return out


@dataclass(frozen=True)
class MoMEstimate:
    chosen: int
    mom_risk: tuple[float, ...]
    k_blocks: int
    block_size: int

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["mom_risk"] = list(self.mom_risk)
        return d


def mom_block_count(n: int, n_hypotheses: int, delta: float) -> int:
    k = math.ceil(8.0 * math.log(2.0 * n_hypotheses / delta))
    return max(1, min(k, n // 2))


def mom_risks(losses: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Median of block means per row of ``losses`` after one shared random permutation."""
    n = losses.shape[1]
    m = n // k
    perm = rng.permutation(n)[: k * m]
    blocks = losses[:, perm].reshape(losses.shape[0], k, m)
    means = blocks.mean(axis=2)
    return np.array([sample_median(row) for row in means]), m


def mom_erm(data: Sequence[Any], H: HypothesisClass, delta: float, rng: np.random.Generator) -> MoMEstimate:
    """Median-of-means empirical risk minimisation over a finite class.

    The block count is ``ceil(8 ln(2|H|/delta))`` capped at ``n // 2``; the
    data are permuted once, the ``n mod k`` remainder is dropped, and ties
    in the argmin go to the lowest hypothesis index.
    """
    n = len(data)
    if n < 2:
        raise ValueError("mom_erm needs at least two data points")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    losses = H.loss_matrix(data)
    k = mom_block_count(n, len(H), delta)
    risks, m = mom_risks(losses, k, rng)
    return MoMEstimate(int(np.argmin(risks)), tuple(float(r) for r in risks), k, m)


def mean_erm(data: Sequence[Any], H: HypothesisClass) -> int:
    """Plain empirical-risk argmin; the non-robust baseline."""
    losses = H.loss_matrix(data)
    return int(np.argmin(losses.mean(axis=1)))
