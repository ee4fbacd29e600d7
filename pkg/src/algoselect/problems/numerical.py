"""Definite integrals of random trigonometric sums on [0, 1]."""

from __future__ import annotations

import numpy as np

from algoselect.problems.base import Deadline, Problem


def _integrand_instance(rng: np.random.Generator, params) -> dict:
    k = int(params["terms"])
    if k < 1:
        raise ValueError("integrand needs at least one term")
    return {
        "offset": float(rng.uniform(1.0, 2.0)),
        "amplitude": rng.uniform(-0.3, 0.3, size=k),
        "frequency": rng.uniform(1.0, 20.0, size=k),
        "phase": rng.uniform(0.0, 2 * np.pi, size=k),
        "intervals": int(params.get("intervals", 2000)),
        "samples": int(params.get("samples", 400_000)),
    }


def _integrand_features(payload) -> dict:
    return {"size": len(payload["amplitude"])}


def integrand(payload, x: np.ndarray) -> np.ndarray:
    a, w, p = payload["amplitude"], payload["frequency"], payload["phase"]
    return payload["offset"] + np.sin(np.multiply.outer(x, w) + p) @ a


def exact_integral(payload) -> float:
    a, w, p = payload["amplitude"], payload["frequency"], payload["phase"]
    return float(payload["offset"] + np.sum(a * (np.cos(p) - np.cos(w + p)) / w))


def composite_simpson(payload, rng: np.random.Generator, deadline: Deadline) -> float:
    n = int(payload["intervals"])
    n += n % 2
    x = np.linspace(0.0, 1.0, n + 1)
    f = integrand(payload, x)
    h = 1.0 / n
    return float(h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum()))


def monte_carlo(payload, rng: np.random.Generator, deadline: Deadline) -> float:
    total, remaining, chunk = 0.0, int(payload["samples"]), 50_000
    count = remaining
    while remaining > 0:
        deadline.check()
        size = min(chunk, remaining)
        total += float(integrand(payload, rng.random(size)).sum())
        remaining -= size
    return total / count


def integration_quality(payload, result) -> float:
    """``1 - |error| / |exact|`` clipped to [0, 1]."""
    if result is None or not np.isfinite(result):
        return 0.0
    exact = exact_integral(payload)
    return float(np.clip(1.0 - abs(float(result) - exact) / abs(exact), 0.0, 1.0))


INTEGRATION = Problem(
    id="integration",
    category="numerical",
    defaults={"terms": 6},
    generate_fn=_integrand_instance,
    features_fn=_integrand_features,
    quality_fn=integration_quality,
    systematic=("composite_simpson", composite_simpson),
    randomized=("monte_carlo", monte_carlo),
    notes="quality: 1 - relative error against the closed-form integral",
)
