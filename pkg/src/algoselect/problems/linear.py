"""Dense linear systems and small packing LPs."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from algoselect.problems.base import Deadline, Problem

# -- linear systems -------------------------------------------------------------------


def _system_instance(rng: np.random.Generator, params) -> dict:
    n = int(params["n"])
    if n < 1:
        raise ValueError("system size must be >= 1")
    shift = float(params.get("diagonal_shift", 3.0))
    A = rng.standard_normal((n, n)) / np.sqrt(n) + shift * np.eye(n)
    b = rng.standard_normal(n)
    return {"A": A, "b": b}


def _system_features(payload) -> dict:
    A = payload["A"]
    return {"size": A.shape[0], "condition_proxy": float(np.log10(np.linalg.cond(A)))}


def gaussian_elimination(payload, rng: np.random.Generator, deadline: Deadline) -> np.ndarray:
    """Row-reduction with partial pivoting followed by back substitution."""
    A = np.array(payload["A"], dtype=float)
    b = np.array(payload["b"], dtype=float)
    n = len(b)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0.0:
            raise np.linalg.LinAlgError("matrix is singular")
        if p != k:
            A[[k, p]] = A[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = A[k + 1 :, k] / A[k, k]
        A[k + 1 :, k:] -= np.outer(factors, A[k, k:])
        b[k + 1 :] -= factors * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - A[i, i + 1 :] @ x[i + 1 :]) / A[i, i]
    return x


def randomized_kaczmarz(payload, rng: np.random.Generator, deadline: Deadline) -> np.ndarray:
    """Row-action solver with rows sampled proportionally to their squared norms.

    Stops once the relative residual drops below ``tol`` (checked every n
    iterations) or after ``max_sweeps * n`` iterations.
    """
    A = np.asarray(payload["A"], dtype=float)
    b = np.asarray(payload["b"], dtype=float)
    n_rows, n = A.shape
    tol = float(payload.get("tol", 1e-10))
    max_sweeps = int(payload.get("max_sweeps", 400))
    row_sq = np.einsum("ij,ij->i", A, A)
    probs = row_sq / row_sq.sum()
    b_norm = np.linalg.norm(b) or 1.0
    x = np.zeros(n)
    for _ in range(max_sweeps):
        deadline.check()
        for i in rng.choice(n_rows, size=n_rows, p=probs).tolist():
            a = A[i]
            x += (b[i] - a @ x) / row_sq[i] * a
        if np.linalg.norm(A @ x - b) <= tol * b_norm:
            break
    return x


def system_quality(payload, result) -> float:
    """``1 - ||Ax - b|| / ||b||`` clipped to [0, 1]."""
    if result is None:
        return 0.0
    x = np.asarray(result, dtype=float)
    A, b = payload["A"], payload["b"]
    if x.shape != b.shape or not np.all(np.isfinite(x)):
        return 0.0
    rel = np.linalg.norm(A @ x - b) / (np.linalg.norm(b) or 1.0)
    return float(np.clip(1.0 - rel, 0.0, 1.0))


LINEAR_SYSTEM = Problem(
    id="linear-system",
    category="numerical",
    defaults={"n": 80},
    generate_fn=_system_instance,
    features_fn=_system_features,
    quality_fn=system_quality,
    systematic=("gaussian_elimination", gaussian_elimination),
    randomized=("randomized_kaczmarz", randomized_kaczmarz),
    notes="quality: 1 - relative residual, clipped to [0, 1]",
)


# -- linear programs ------------------------------------------------------------------
# maximise c.x subject to A x <= b, x >= 0 with A, b, c > 0, so the origin is
# feasible and the optimum is bounded.


def _lp_instance(rng: np.random.Generator, params) -> dict:
    n, m = int(params["n"]), int(params["m"])
    if n < 1 or m < 1:
        raise ValueError("LP needs n >= 1 variables and m >= 1 constraints")
    A = rng.uniform(0.1, 1.0, size=(m, n))
    b = rng.uniform(1.0, 2.0, size=m) * n / 2
    c = rng.uniform(0.5, 1.5, size=n)
    return {"A": A, "b": b, "c": c}


def _lp_features(payload) -> dict:
    A = payload["A"]
    m, n = A.shape
    return {"size": n, "density": float(np.count_nonzero(A)) / A.size, "constraint_ratio": m / n}


def simplex(payload, rng: np.random.Generator, deadline: Deadline) -> np.ndarray:
    """Dense tableau simplex from the slack basis, Bland's rule against cycling."""
    A, b, c = (np.asarray(payload[k], dtype=float) for k in ("A", "b", "c"))
    m, n = A.shape
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -c
    basis = list(range(n, n + m))
    eps = 1e-12
    while True:
        deadline.check()
        entering = next((j for j in range(n + m) if tab[m, j] < -eps), None)
        if entering is None:
            break
        col = tab[:m, entering]
        rows = [i for i in range(m) if col[i] > eps]
        if not rows:
            raise ArithmeticError("LP is unbounded")
        ratios = [(tab[i, -1] / col[i], basis[i], i) for i in rows]
        _, _, leave = min(ratios)
        tab[leave] /= tab[leave, entering]
        for i in range(m + 1):
            if i != leave and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[leave]
        basis[leave] = entering
    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = tab[i, -1]
    return x[:n]


def random_sampling_lp(payload, rng: np.random.Generator, deadline: Deadline) -> np.ndarray:
    """Random points in the bounding box, scaled back into the feasible set, then greedily pushed outward."""
    A, b, c = (np.asarray(payload[k], dtype=float) for k in ("A", "b", "c"))
    m, n = A.shape
    samples = int(payload.get("samples", 200))
    upper = (b[:, None] / A).min(axis=0)
    best_x, best_val = np.zeros(n), 0.0
    for _ in range(samples):
        deadline.check()
        x = rng.random(n) * upper
        load = A @ x
        x *= min(1.0, float(np.min(b / load)))
        # repair: raise coordinates one at a time until some row binds
        for j in rng.permutation(n).tolist():
            slack = b - A @ x
            x[j] += max(0.0, float(np.min(slack / A[:, j])))
        val = float(c @ x)
        if val > best_val:
            best_x, best_val = x.copy(), val
    return best_x


def lp_optimum(payload) -> float:
    res = linprog(-payload["c"], A_ub=payload["A"], b_ub=payload["b"], bounds=(0, None), method="highs")
    if not res.success:
        raise ArithmeticError(f"reference LP solve failed: {res.message}")
    return float(-res.fun)


def lp_quality(payload, result, tol: float = 1e-7) -> float:
    """Objective over the HiGHS optimum; 0 for an infeasible point."""
    if result is None:
        return 0.0
    x = np.asarray(result, dtype=float)
    A, b, c = payload["A"], payload["b"], payload["c"]
    if x.shape != c.shape or not np.all(np.isfinite(x)):
        return 0.0
    if np.any(x < -tol) or np.any(A @ x > b + tol * np.maximum(1.0, np.abs(b))):
        return 0.0
    opt = lp_optimum(payload)
    return float(np.clip(c @ x / opt, 0.0, 1.0)) if opt > 0 else 1.0


LINEAR_PROGRAM = Problem(
    id="linear-program",
    category="linear-opt",
    defaults={"n": 12, "m": 18},
    generate_fn=_lp_instance,
    features_fn=_lp_features,
    quality_fn=lp_quality,
    systematic=("tableau_simplex", simplex),
    randomized=("random_sampling_with_repair", random_sampling_lp),
    notes="quality: objective / optimum from scipy HiGHS; infeasible points score 0",
)
