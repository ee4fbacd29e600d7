"""Shared types for the benchmark problem suite: specs, instances, solvers, timing."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

CATEGORIES = ("sorting", "graphs", "linear-opt", "nonconvex-opt", "integer-opt", "search-sat", "numerical")
FEATURE_NAMES = (
    *(f"cat_{c}" for c in CATEGORIES),
    "log2_size",
    "density",
    "sortedness",
    "condition_proxy",
    "constraint_ratio",
)
FEATURE_DIM = len(FEATURE_NAMES)  # 12
DEFAULT_BUDGET = 2.0
STYLES = ("systematic", "randomized")


class BudgetExceeded(Exception):
    """Raised by a solver that notices its deadline has passed."""


class Deadline:
    """Cooperative time budget checked inside solver loops."""

    def __init__(self, budget: float | None):
        self.budget = budget
        self.expires = math.inf if budget is None else time.perf_counter() + budget

    def check(self) -> None:
        if time.perf_counter() > self.expires:
            raise BudgetExceeded


@dataclass(frozen=True)
class ProblemSpec:
    problem: str
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"problem": self.problem, "seed": self.seed, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> ProblemSpec:
        return cls(data["problem"], int(data.get("seed", 0)), dict(data.get("params", {})))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype), "shape": list(obj.shape)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def payload_bytes(payload: Mapping[str, Any]) -> bytes:
    """Canonical byte encoding of a payload, used for determinism checks."""
    return json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":")).encode()


@dataclass(frozen=True)
class ProblemInstance:
    problem: str
    payload: Mapping[str, Any]
    features: np.ndarray
    spec: ProblemSpec

    def payload_bytes(self) -> bytes:
        return payload_bytes(self.payload)


@dataclass(frozen=True)
class SolveOutcome:
    runtime: float
    quality: float
    summary: Mapping[str, Any] = field(default_factory=dict)
    timed_out: bool = False


SolveFn = Callable[[Mapping[str, Any], np.random.Generator, Deadline], Any]


@dataclass(frozen=True)
class AlgorithmEntry:
    algorithm_id: str  # "problem/style"
    problem: str
    style: str
    name: str
    solve_fn: SolveFn = field(repr=False, compare=False)


@dataclass(frozen=True)
class Problem:
    """One problem type: generator, feature slots, quality checker, solver pair.

    ``features`` returns the problem-specific slots (``size`` plus any of
    ``density``, ``sortedness``, ``condition_proxy``, ``constraint_ratio``);
    ``quality`` scores a solver result in [0, 1] without trusting the solver.
    """

    id: str
    category: str
    defaults: Mapping[str, Any]
    generate_fn: Callable[[np.random.Generator, Mapping[str, Any]], dict]
    features_fn: Callable[[Mapping[str, Any]], Mapping[str, float]]
    quality_fn: Callable[[Mapping[str, Any], Any], float]
    systematic: tuple[str, SolveFn]
    randomized: tuple[str, SolveFn]
    notes: str = ""

    def entries(self) -> tuple[AlgorithmEntry, AlgorithmEntry]:
        return (
            AlgorithmEntry(f"{self.id}/systematic", self.id, "systematic", *self.systematic),
            AlgorithmEntry(f"{self.id}/randomized", self.id, "randomized", *self.randomized),
        )

    def template(self) -> ProblemSpec:
        return ProblemSpec(self.id, 0, dict(self.defaults))


def sortedness(values: np.ndarray) -> float:
    """Fraction of adjacent pairs that are not inversions (1.0 for n < 2)."""
    a = np.asarray(values)
    if a.size < 2:
        return 1.0
    return float(np.mean(a[:-1] <= a[1:]))


def feature_vector(category: str, slots: Mapping[str, float]) -> np.ndarray:
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    size = float(slots["size"])
    if size < 1:
        raise ValueError("instance size must be >= 1")
    vec = np.zeros(FEATURE_DIM)
    vec[CATEGORIES.index(category)] = 1.0
    vec[7] = math.log2(size)
    vec[8] = slots.get("density", 0.0)
    vec[9] = slots.get("sortedness", 0.0)
    vec[10] = slots.get("condition_proxy", 0.0)
    vec[11] = slots.get("constraint_ratio", 0.0)
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"non-finite features {vec}")
    return vec
