"""Nonconvex continuous minimisation and 0/1 knapsack."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from algoselect.problems.base import Deadline, Problem

# -- shifted Rastrigin -----------------------------------------------------------------

DOMAIN = 5.12


def rastrigin(x: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Shifted Rastrigin; global minimum 0 at ``x = shift``.  Accepts (..., d) arrays."""
    y = np.asarray(x) - shift
    return 10.0 * y.shape[-1] + np.sum(y * y - 10.0 * np.cos(2 * np.pi * y), axis=-1)


def _rastrigin_grad(x: np.ndarray, shift: np.ndarray) -> np.ndarray:
    y = x - shift
    return 2 * y + 20 * np.pi * np.sin(2 * np.pi * y)


def _nonconvex_instance(rng: np.random.Generator, params) -> dict:
    d = int(params["d"])
    if not 1 <= d <= 10:
        raise ValueError("dimension must be between 1 and 10")
    return {"d": d, "shift": rng.uniform(-2.0, 2.0, size=d)}


def _nonconvex_features(payload) -> dict:
    return {"size": int(payload["d"])}


def grid_descent(payload, rng: np.random.Generator, deadline: Deadline) -> np.ndarray:
    """Gradient descent started from every point of a regular grid; best end point wins.

    With at least three points per axis the grid spacing stays below the
    unit basin width, so every basin near the optimum holds a start point.
    """
    d, shift = int(payload["d"]), np.asarray(payload["shift"])
    points = int(payload.get("grid_points", 6000))
    iterations = int(payload.get("descent_steps", 200))
    g = max(3, int(math.floor(points ** (1.0 / d))))
    axis = np.linspace(-DOMAIN, DOMAIN, g)
    x = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    # step below 1 / max curvature (2 + 40 pi^2) keeps every start inside its basin
    step = 1.0 / (2.0 + 40.0 * np.pi**2)
    for i in range(iterations):
        if i % 50 == 0:
            deadline.check()
        x = np.clip(x - step * _rastrigin_grad(x, shift), -DOMAIN, DOMAIN)
    return x[int(np.argmin(rastrigin(x, shift)))]


def simulated_annealing(payload, rng: np.random.Generator, deadline: Deadline) -> np.ndarray:
    """Gaussian-proposal annealing with geometric cooling; returns the best point visited."""
    d, shift = int(payload["d"]), np.asarray(payload["shift"])
    iters = int(payload.get("iterations", 4000))
    t0, t1 = 10.0, 1e-3
    cool = (t1 / t0) ** (1.0 / max(iters - 1, 1))
    x = rng.uniform(-DOMAIN, DOMAIN, size=d)
    fx = float(rastrigin(x, shift))
    best, fbest = x.copy(), fx
    temp = t0
    steps = rng.standard_normal((iters, d))
    accept = rng.random(iters)
    for i in range(iters):
        if i % 256 == 0:
            deadline.check()
        cand = np.clip(x + steps[i] * 0.5 * math.sqrt(temp / t0 + 1e-3), -DOMAIN, DOMAIN)
        fc = float(rastrigin(cand, shift))
        if fc <= fx or accept[i] < math.exp(-(fc - fx) / temp):
            x, fx = cand, fc
            if fx < fbest:
                best, fbest = x.copy(), fx
        temp *= cool
    return best


def nonconvex_quality(payload, result) -> float:
    """``1 / (1 + f(x))`` with the known global minimum f = 0."""
    if result is None:
        return 0.0
    x = np.asarray(result, dtype=float)
    if x.shape != (int(payload["d"]),) or not np.all(np.isfinite(x)) or np.any(np.abs(x) > DOMAIN + 1e-12):
        return 0.0
    f = max(0.0, float(rastrigin(x, np.asarray(payload["shift"]))))
    return 1.0 / (1.0 + f)


NONCONVEX = Problem(
    id="nonconvex-min",
    category="nonconvex-opt",
    defaults={"d": 3},
    generate_fn=_nonconvex_instance,
    features_fn=_nonconvex_features,
    quality_fn=nonconvex_quality,
    systematic=("grid_local_descent", grid_descent),
    randomized=("simulated_annealing", simulated_annealing),
    notes="shifted Rastrigin on [-5.12, 5.12]^d; quality: 1 / (1 + f(x)), global minimum 0",
)


# -- knapsack -------------------------------------------------------------------------


def _knapsack_instance(rng: np.random.Generator, params) -> dict:
    n = int(params["n"])
    if n < 1:
        raise ValueError("knapsack needs at least one item")
    weights = rng.integers(1, 101, size=n).astype(np.int64)
    values = rng.integers(1, 101, size=n).astype(np.int64)
    capacity = int(weights.sum() * float(params.get("capacity_fraction", 0.35)))
    return {"weights": weights, "values": values, "capacity": capacity}


def _knapsack_features(payload) -> dict:
    w = payload["weights"]
    return {"size": len(w), "constraint_ratio": payload["capacity"] / float(w.sum())}


def knapsack_dp(payload, rng: np.random.Generator, deadline: Deadline) -> list[int]:
    """Exact dynamic programme over capacities with a take-table for reconstruction."""
    w = [int(v) for v in payload["weights"]]
    v = [int(x) for x in payload["values"]]
    cap = int(payload["capacity"])
    best = np.zeros(cap + 1, dtype=np.int64)
    take = np.zeros((len(w), cap + 1), dtype=bool)
    for i, (wi, vi) in enumerate(zip(w, v)):
        deadline.check()
        if wi > cap:
            continue
        cand = best[: cap + 1 - wi] + vi
        better = cand > best[wi:]
        take[i, wi:] = better
        best[wi:] = np.where(better, cand, best[wi:])
    chosen, c = [], cap
    for i in range(len(w) - 1, -1, -1):
        if take[i, c]:
            chosen.append(i)
            c -= w[i]
    return sorted(chosen)


def randomized_greedy(payload, rng: np.random.Generator, deadline: Deadline) -> list[int]:
    """Greedy by value density with log-normal noise on the ordering; best of several restarts."""
    w = np.asarray(payload["weights"], dtype=float)
    v = np.asarray(payload["values"], dtype=float)
    cap = int(payload["capacity"])
    restarts = int(payload.get("restarts", 30))
    density = v / w
    best, best_val = [], -1.0
    for r in range(restarts):
        deadline.check()
        noise = np.zeros_like(density) if r == 0 else rng.normal(0.0, 0.3, size=density.size)
        order = np.argsort(-density * np.exp(noise), kind="stable")
        load, val, chosen = 0, 0.0, []
        for i in order.tolist():
            if load + w[i] <= cap:
                load += int(w[i])
                val += v[i]
                chosen.append(i)
        if val > best_val:
            best, best_val = sorted(chosen), val
    return best


def knapsack_optimum(payload) -> float:
    w = np.asarray(payload["weights"], dtype=float)
    v = np.asarray(payload["values"], dtype=float)
    n = len(w)
    res = milp(
        -v,
        constraints=LinearConstraint(w[None, :], -np.inf, payload["capacity"]),
        integrality=np.ones(n),
        bounds=Bounds(0, 1),
    )
    if not res.success:
        raise ArithmeticError(f"reference knapsack solve failed: {res.message}")
    return float(round(-res.fun))


def knapsack_quality(payload, result, optimum: float | None = None) -> float:
    """Achieved value over the optimum (scipy MILP by default); 0 if over capacity."""
    if result is None:
        return 0.0
    idx = list(result)
    n = len(payload["weights"])
    if len(set(idx)) != len(idx) or any(not 0 <= i < n for i in idx):
        return 0.0
    if int(payload["weights"][idx].sum()) > int(payload["capacity"]):
        return 0.0
    opt = knapsack_optimum(payload) if optimum is None else optimum
    got = float(payload["values"][idx].sum()) if idx else 0.0
    return 1.0 if opt == 0 else min(1.0, got / opt)


KNAPSACK = Problem(
    id="knapsack",
    category="integer-opt",
    defaults={"n": 40},
    generate_fn=_knapsack_instance,
    features_fn=_knapsack_features,
    quality_fn=knapsack_quality,
    systematic=("knapsack_dp", knapsack_dp),
    randomized=("randomized_greedy", randomized_greedy),
    notes="quality: achieved value / optimum from scipy MILP; overweight selections score 0",
)
