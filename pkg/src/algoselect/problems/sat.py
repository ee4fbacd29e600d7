"""Planted random 3-SAT with DPLL and WalkSAT solvers.

Literals are signed 1-based variable indices; an assignment is a list of
booleans indexed by variable - 1.  A solver returns ``None`` to claim the
formula is unsatisfiable.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from algoselect.problems.base import Deadline, Problem

BRUTE_FORCE_MAX_VARS = 20


def _planted_instance(rng: np.random.Generator, params) -> dict:
    n = int(params["n"])
    m = int(round(float(params.get("ratio", 4.0)) * n))
    if n < 3:
        raise ValueError("planted 3-SAT needs at least 3 variables")
    planted = rng.random(n) < 0.5
    clauses = []
    while len(clauses) < m:
        vars_ = rng.choice(n, size=3, replace=False)
        signs = rng.random(3) < 0.5
        # keep only clauses the planted assignment satisfies
        if any(planted[v] == s for v, s in zip(vars_, signs)):
            clauses.append([int(v + 1) if s else -int(v + 1) for v, s in zip(vars_, signs)])
    return {"n_vars": n, "clauses": clauses, "planted": True}


def _sat_features(payload) -> dict:
    n = int(payload["n_vars"])
    return {"size": n, "constraint_ratio": len(payload["clauses"]) / n}


def satisfied_count(clauses: Sequence[Sequence[int]], assignment: Sequence[bool]) -> int:
    return sum(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in clauses)


# -- DPLL ---------------------------------------------------------------------------------


def _propagate(clauses, assign: dict[int, bool]) -> bool:
    """Unit propagation in place; False on conflict."""
    changed = True
    while changed:
        changed = False
        for c in clauses:
            unassigned = None
            n_unassigned = 0
            sat = False
            for lit in c:
                val = assign.get(abs(lit))
                if val is None:
                    n_unassigned += 1
                    unassigned = lit
                elif val == (lit > 0):
                    sat = True
                    break
            if sat:
                continue
            if n_unassigned == 0:
                return False
            if n_unassigned == 1:
                assign[abs(unassigned)] = unassigned > 0
                changed = True
    return True


def _dpll(clauses, assign: dict[int, bool], n: int, deadline: Deadline) -> dict[int, bool] | None:
    deadline.check()
    assign = dict(assign)
    if not _propagate(clauses, assign):
        return None
    counts: dict[int, int] = {}
    for c in clauses:
        if any(assign.get(abs(l)) == (l > 0) for l in c):
            continue
        for l in c:
            if abs(l) not in assign:
                counts[l] = counts.get(l, 0) + 1
    if not counts:
        return assign
    lit = max(sorted(counts), key=lambda l: counts[l] + counts.get(-l, 0))
    for value in (lit > 0, lit <= 0):
        assign[abs(lit)] = value
        found = _dpll(clauses, assign, n, deadline)
        if found is not None:
            return found
    return None


def dpll(payload, rng: np.random.Generator, deadline: Deadline) -> list[bool] | None:
    """DPLL with unit propagation and a most-occurrences branching rule."""
    n = int(payload["n_vars"])
    model = _dpll(payload["clauses"], {}, n, deadline)
    if model is None:
        return None
    return [model.get(v, False) for v in range(1, n + 1)]


# -- WalkSAT ----------------------------------------------------------------------------


def walksat(payload, rng: np.random.Generator, deadline: Deadline) -> list[bool]:
    """WalkSAT with noise ``p``; returns the best assignment seen if no model is found."""
    n = int(payload["n_vars"])
    clauses = payload["clauses"]
    max_flips = int(payload.get("max_flips", 20000))
    noise = float(payload.get("noise", 0.5))
    assign = (rng.random(n) < 0.5).tolist()
    occurs: list[list[int]] = [[] for _ in range(n)]
    for ci, c in enumerate(clauses):
        for l in c:
            occurs[abs(l) - 1].append(ci)
    true_count = [sum(assign[abs(l) - 1] == (l > 0) for l in c) for c in clauses]
    unsat = {ci for ci, k in enumerate(true_count) if k == 0}
    best, best_unsat = list(assign), len(unsat)

    def flip(v: int) -> None:
        assign[v] = not assign[v]
        for ci in occurs[v]:
            lit = next(l for l in clauses[ci] if abs(l) - 1 == v)
            if assign[v] == (lit > 0):
                true_count[ci] += 1
                unsat.discard(ci)
            else:
                true_count[ci] -= 1
                if true_count[ci] == 0:
                    unsat.add(ci)

    def breaks(v: int) -> int:
        # clauses currently satisfied only by v's literal
        return sum(
            1
            for ci in occurs[v]
            if true_count[ci] == 1 and any(abs(l) - 1 == v and assign[v] == (l > 0) for l in clauses[ci])
        )

    for step in range(max_flips):
        if not unsat:
            return assign
        if step % 512 == 0:
            deadline.check()
        ci = sorted(unsat)[int(rng.integers(len(unsat)))]
        vars_ = [abs(l) - 1 for l in clauses[ci]]
        if rng.random() < noise:
            v = vars_[int(rng.integers(len(vars_)))]
        else:
            v = min(vars_, key=breaks)
        flip(v)
        if len(unsat) < best_unsat:
            best, best_unsat = list(assign), len(unsat)
    return assign if not unsat else best


def brute_force_satisfiable(n: int, clauses) -> bool:
    for bits in itertools.product((False, True), repeat=n):
        if satisfied_count(clauses, bits) == len(clauses):
            return True
    return False


def sat_quality(payload, result) -> float:
    """Fraction of clauses satisfied by the returned assignment.

    An unsatisfiability claim scores 1 only if it can be confirmed (brute force
    on small formulas); planted formulas are satisfiable, so the claim scores 0.
    """
    clauses = payload["clauses"]
    n = int(payload["n_vars"])
    if result is None:
        if payload.get("planted"):
            return 0.0
        if n <= BRUTE_FORCE_MAX_VARS:
            return 0.0 if brute_force_satisfiable(n, clauses) else 1.0
        return 0.0
    if len(result) != n:
        return 0.0
    return satisfied_count(clauses, result) / len(clauses) if clauses else 1.0


SAT = Problem(
    id="sat",
    category="search-sat",
    defaults={"n": 50, "ratio": 4.0},
    generate_fn=_planted_instance,
    features_fn=_sat_features,
    quality_fn=sat_quality,
    systematic=("dpll", dpll),
    randomized=("walksat", walksat),
    notes="planted 3-SAT; quality: fraction of clauses satisfied",
)
