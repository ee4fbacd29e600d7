"""The comb operator: feature-driven choice between a systematic and a random solver.

A seeding function maps a feature vector to a comb parameter ``t`` in (0, 1);
``comb_select`` then dispatches to the random endpoint with probability ``t``.
The N-path variant replaces the two endpoints by a softmax distribution over
N algorithms.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# logit inputs beyond this magnitude are clamped before exponentiation
SIGMOID_CLAMP = 40.0
# largest float64 strictly below 1; keeps t inside the open interval
_T_MAX = math.nextafter(1.0, 0.0)


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Return an explicit PCG64 generator; the library never touches global RNG state."""
    return np.random.Generator(np.random.PCG64(seed))


def sigmoid(x: float) -> float:
    x = min(max(float(x), -SIGMOID_CLAMP), SIGMOID_CLAMP)
    if x >= 0:
        value = 1.0 / (1.0 + math.exp(-x))
    else:
        z = math.exp(x)
        value = z / (1.0 + z)
    return min(value, _T_MAX)


def logit(t: float) -> float:
    if not 0.0 < t < 1.0:
        raise ValueError(f"logit requires t in (0, 1), got {t}")
    return math.log(t) - math.log1p(-t)


def as_features(phi: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate and convert a feature vector to a 1-d float array."""
    arr = np.asarray(phi, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"feature vector must be 1-d and nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature vector contains non-finite entries")
    return arr


class Endpoint(str, enum.Enum):
    SYSTEMATIC = "systematic"
    RANDOM = "random"


@dataclass(frozen=True)
class SeedingFunction:
    """Logistic seeding ``t = sigmoid(weights . phi + bias)``."""

    weights: tuple[float, ...]
    bias: float = 0.0

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValueError("seeding weights must have dimension >= 1")
        if not all(math.isfinite(v) for v in w) or not math.isfinite(self.bias):
            raise ValueError("seeding parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return len(self.weights)

    def __call__(self, phi: Sequence[float] | np.ndarray) -> float:
        return seed(self, phi)

    def to_dict(self) -> dict:
        return {"weights": list(self.weights), "bias": self.bias}

    @classmethod
    def from_dict(cls, data: dict) -> SeedingFunction:
        try:
            return cls(tuple(data["weights"]), data["bias"])
        except KeyError as exc:
            raise ValueError(f"seeding function JSON missing key {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> SeedingFunction:
        return cls.from_dict(json.loads(text))

    @classmethod
    def constant(cls, dim: int, t: float) -> SeedingFunction:
        """A seeding function that ignores features and always yields ``t``."""
        return cls((0.0,) * dim, logit(t))


def seed(s: SeedingFunction, phi: Sequence[float] | np.ndarray) -> float:
    """Evaluate the comb parameter for features ``phi``.

    Raises ValueError on a dimension mismatch or non-finite features.
    """
    x = as_features(phi)
    if x.size != s.dim:
        raise ValueError(f"feature dimension {x.size} does not match seeding dimension {s.dim}")
    score = math.fsum(w * v for w, v in zip(s.weights, x.tolist())) + s.bias
    return sigmoid(score)


def comb_select(t: float, rng: np.random.Generator) -> Endpoint:
    """Pick the systematic endpoint with probability ``1 - t``.

    Exactly one uniform draw is consumed per call.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"comb parameter must lie in [0, 1], got {t}")
    draw = rng.random()
    return Endpoint.SYSTEMATIC if draw < 1.0 - t else Endpoint.RANDOM


def n_path_distribution(scores: Sequence[float] | np.ndarray) -> np.ndarray:
    """Softmax over per-algorithm scores, computed with max subtraction."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a nonempty 1-d vector")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    z = np.exp(s - s.max())
    return z / z.sum()


def validate_distribution(p: Sequence[float] | np.ndarray, atol: float = 1e-9) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("path distribution must be a nonempty 1-d vector")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("path probabilities must be finite and nonnegative")
    if abs(arr.sum() - 1.0) > atol:
        raise ValueError(f"path probabilities sum to {arr.sum()}, expected 1")
    return arr


def sample_path(p: Sequence[float] | np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of an algorithm index; one uniform draw per call."""
    arr = validate_distribution(p)
    cdf = np.cumsum(arr)
    u = rng.random()
    # side="right" never lands on a zero-mass slot
    idx = int(np.searchsorted(cdf, u, side="right"))
    if idx >= arr.size:
        # rounding left cdf[-1] a hair below u
        idx = int(np.flatnonzero(arr)[-1])
    return idx
