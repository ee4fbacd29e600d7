"""Desk-scale problem suite: ten problem types, each with a systematic and a randomized solver."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from algoselect.problems.base import (
    CATEGORIES,
    DEFAULT_BUDGET,
    FEATURE_DIM,
    FEATURE_NAMES,
    AlgorithmEntry,
    BudgetExceeded,
    Deadline,
    Problem,
    ProblemInstance,
    ProblemSpec,
    SolveOutcome,
    feature_vector,
    payload_bytes,
    sortedness,
)
from algoselect.problems.graphs import MST, SHORTEST_PATH
from algoselect.problems.linear import LINEAR_PROGRAM, LINEAR_SYSTEM
from algoselect.problems.numerical import INTEGRATION
from algoselect.problems.optimization import KNAPSACK, NONCONVEX
from algoselect.problems.ordering import SELECTION, SORTING
from algoselect.problems.sat import SAT

PROBLEMS: dict[str, Problem] = {
    p.id: p
    for p in (
        SORTING,
        SELECTION,
        SHORTEST_PATH,
        MST,
        LINEAR_SYSTEM,
        LINEAR_PROGRAM,
        NONCONVEX,
        KNAPSACK,
        SAT,
        INTEGRATION,
    )
}

ALGORITHMS: dict[str, AlgorithmEntry] = {e.algorithm_id: e for p in PROBLEMS.values() for e in p.entries()}


def get_problem(problem_id: str) -> Problem:
    try:
        return PROBLEMS[problem_id]
    except KeyError:
        raise ValueError(f"unknown problem id {problem_id!r}; known: {sorted(PROBLEMS)}") from None


def get_algorithm(algorithm_id: str) -> AlgorithmEntry:
    try:
        return ALGORITHMS[algorithm_id]
    except KeyError:
        raise ValueError(f"unknown algorithm id {algorithm_id!r}") from None


def generate(spec: ProblemSpec) -> ProblemInstance:
    """Build an instance deterministically from ``spec`` (including its seed)."""
    problem = get_problem(spec.problem)
    params = {**problem.defaults, **spec.params}
    payload = problem.generate_fn(np.random.default_rng(spec.seed), params)
    features = feature_vector(problem.category, problem.features_fn(payload))
    return ProblemInstance(problem.id, payload, features, ProblemSpec(spec.problem, spec.seed, params))


def extract_features(instance: ProblemInstance) -> np.ndarray:
    """Fixed 12-slot layout: category one-hot, log2(size), density, sortedness, condition proxy, constraint ratio."""
    problem = get_problem(instance.problem)
    return feature_vector(problem.category, problem.features_fn(instance.payload))


def quality(instance: ProblemInstance, result) -> float:
    return float(get_problem(instance.problem).quality_fn(instance.payload, result))


def solve(
    entry: AlgorithmEntry,
    instance: ProblemInstance,
    rng: np.random.Generator,
    budget: float = DEFAULT_BUDGET,
) -> SolveOutcome:
    """Time ``entry`` on ``instance`` with a monotonic clock around the solve call only.

    A run that exceeds ``budget`` seconds scores quality 0 with runtime equal
    to the budget.  Solver exceptions other than the budget propagate.
    """
    if entry.problem != instance.problem:
        raise ValueError(f"{entry.algorithm_id} targets {entry.problem!r}, instance is {instance.problem!r}")
    deadline = Deadline(budget)
    start = time.perf_counter()
    try:
        result = entry.solve_fn(instance.payload, rng, deadline)
    except BudgetExceeded:
        return SolveOutcome(float(budget), 0.0, {"status": "budget exceeded"}, timed_out=True)
    runtime = time.perf_counter() - start
    if budget is not None and runtime > budget:
        return SolveOutcome(float(budget), 0.0, {"status": "budget exceeded"}, timed_out=True)
    q = quality(instance, result)
    return SolveOutcome(runtime, q, {"status": "ok", "algorithm": entry.name})


def cross_solve(entry: AlgorithmEntry, instance: ProblemInstance) -> SolveOutcome:
    """Adapter for the cross-problem mode: a solver applied to a foreign problem type scores 0."""
    if entry.problem == instance.problem:
        raise ValueError("cross_solve is only for mismatched problem types")
    return SolveOutcome(0.0, 0.0, {"status": "type mismatch"})


@dataclass(frozen=True)
class ManifestEntry:
    template: ProblemSpec
    systematic: AlgorithmEntry
    randomized: AlgorithmEntry

    @property
    def problem(self) -> str:
        return self.template.problem

    def to_dict(self) -> dict:
        problem = get_problem(self.problem)
        return {
            "problem": self.problem,
            "category": problem.category,
            "params": dict(self.template.params),
            "systematic": {"id": self.systematic.algorithm_id, "name": self.systematic.name},
            "randomized": {"id": self.randomized.algorithm_id, "name": self.randomized.name},
            "quality": problem.notes,
        }


def suite_manifest(problems: Iterable[str] | None = None) -> list[ManifestEntry]:
    """The fixed roster, optionally restricted to the given problem ids (roster order kept)."""
    wanted = None if problems is None else set(problems)
    if wanted is not None:
        for pid in wanted:
            get_problem(pid)
    out = []
    for pid, problem in PROBLEMS.items():
        if wanted is None or pid in wanted:
            sys_entry, ran_entry = problem.entries()
            out.append(ManifestEntry(problem.template(), sys_entry, ran_entry))
    return out


__all__ = [
    "ALGORITHMS",
    "CATEGORIES",
    "DEFAULT_BUDGET",
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "PROBLEMS",
    "AlgorithmEntry",
    "ManifestEntry",
    "Problem",
    "ProblemInstance",
    "ProblemSpec",
    "SolveOutcome",
    "cross_solve",
    "extract_features",
    "generate",
    "get_algorithm",
    "get_problem",
    "payload_bytes",
    "quality",
    "solve",
    "sortedness",
    "suite_manifest",
]
