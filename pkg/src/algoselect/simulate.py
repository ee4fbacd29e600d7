"""Loss-stream environments and simulation drivers for the online selectors.

Each driver splits its seed into an environment stream and a learner stream
so that paired comparisons (same environment, different learner) share the
exact same losses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from algoselect.threshold import HypothesisClass, dkw_tail, empirical_median, mean_erm, mom_erm
from algoselect.online import (
    RegretLedger,
    UCBArmState,
    UCBTree,
    adaptive_window_run,
    cascade_choose,
    fpl_run,
    ucb_tree_route,
)

SIMULATIONS = ("fpl", "cascade", "adaptive-window", "ucb-tree")


def split_seed(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    env_ss, learner_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(learner_ss)


# -- environments ---------------------------------------------------------------


def near_tie_stream(T: int, K: int, rng: np.random.Generator, gap: float = 0.05) -> np.ndarray:
    """Fair-coin binary losses; arm 0 has a slight edge of ``gap``.

    The identity of the empirical leader keeps alternating among the near-tied
    arms, which is the classical hard case for experts algorithms.
    """
    p = np.full(K, 0.5)
    p[0] = 0.5 - gap
    return (rng.random((T, K)) < p).astype(float)


def alternating_stream(T: int, K: int) -> np.ndarray:
    """Deterministic alternation between arms 0 and 1; other arms always lose."""
    out = np.ones((T, K))
    out[0::2, 0] = 1.0
    out[0::2, 1] = 0.0
    out[1::2, 0] = 0.0
    if K > 1:
        out[1::2, 1] = 1.0
    return out


def switch_stream(T: int, K: int, switch_at: int | None = None) -> tuple[np.ndarray, tuple[int, ...]]:
    """Arm 0 is perfect before the switch, arm 1 after; all other arms lose 1."""
    if K < 2:
        raise ValueError("switch stream needs K >= 2")
    s = T // 2 if switch_at is None else switch_at
    out = np.ones((T, K))
    out[:s, 0] = 0.0
    out[s:, 1] = 0.0
    return out, ((s,) if 0 < s < T else ())


def constant_stream(T: int, K: int) -> np.ndarray:
    out = np.ones((T, K))
    out[:, 0] = 0.0
    return out


# -- drivers ------------------------------------------------------------------------


def run_fpl(T: int, K: int, seed: int, env: str = "near_tie", gap: float = 0.05) -> RegretLedger:
    env_rng, learner_rng = split_seed(seed)
    if env == "near_tie":
        stream = near_tie_stream(T, K, env_rng, gap)
    elif env == "alternating":
        stream = alternating_stream(T, K)
    elif env == "constant":
        stream = constant_stream(T, K)
    else:
        raise ValueError(f"unknown FPL environment {env!r}")
    return RegretLedger(stream, fpl_run(stream, learner_rng))


def fpl_bound_ratio(ledger: RegretLedger) -> float:
    T, K = ledger.losses.shape
    return ledger.regret() / math.sqrt(T * math.log(K))


@dataclass(frozen=True)
class CascadeResult:
    ledger: RegretLedger
    optimal: float  # min_j (mu_j + c_j)

    @property
    def average_cost_plus_loss(self) -> float:
        return float(self.ledger.incurred.mean())

    @property
    def excess(self) -> float:
        return self.average_cost_plus_loss - self.optimal


def run_cascade(
    T: int, arms: Sequence[tuple[float, float]], seed: int
) -> CascadeResult:
    """Cost-aware cascade on Bernoulli losses; ``arms`` is ``[(cost, mean_loss), ...]`` sorted by cost."""
    env_rng, _ = split_seed(seed)
    costs = np.array([c for c, _ in arms], dtype=float)
    means = np.array([m for _, m in arms], dtype=float)
    losses = (env_rng.random((T, len(arms))) < means).astype(float)
    state = [UCBArmState(cost=c) for c in costs]
    chosen = np.empty(T, dtype=int)
    for t in range(T):
        j = cascade_choose(state, t + 1, T)
        state[j].update(losses[t, j])
        chosen[t] = j
    ledger = RegretLedger(losses + costs, chosen)
    return CascadeResult(ledger, float((means + costs).min()))


def run_adaptive(T: int, K: int, seed: int, switch_at: int | None = None, stationary: bool = False):
    """Adaptive-window learner and plain FPL on the same stream.

    Returns ``(adaptive_ledger, fpl_ledger)``; both carry the segment schedule.
    """
    _, learner_rng = split_seed(seed)
    if stationary:
        stream, segments = constant_stream(T, K), ()
    else:
        stream, segments = switch_stream(T, K, switch_at)
    fpl_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(3)[2])
    adaptive = adaptive_window_run(stream, segments, learner_rng)
    plain = RegretLedger(stream, fpl_run(stream, fpl_rng), segments)
    return adaptive, plain


def run_ucb_tree(T: int, depth: int, seed: int, leaf_losses: Sequence[float] | None = None) -> RegretLedger:
    """UCB1-gated tree against fixed leaf losses (default: leaf 0 loses 0, all others 1).

    ``seed`` only matters for stochastic leaf losses; each leaf loss is used
    as a Bernoulli mean.
    """
    n_leaves = 2**depth
    if leaf_losses is None:
        leaf_losses = [0.0] + [1.0] * (n_leaves - 1)
    means = np.asarray(leaf_losses, dtype=float)
    if means.size != n_leaves:
        raise ValueError(f"need {n_leaves} leaf losses, got {means.size}")
    env_rng, _ = split_seed(seed)
    losses = (env_rng.random((T, n_leaves)) < means).astype(float)
    tree = UCBTree(depth)
    chosen = np.empty(T, dtype=int)
    for t in range(T):
        chosen[t] = ucb_tree_route(tree, lambda leaf: losses[t, leaf])
    return RegretLedger(losses, chosen)


def ucb_tree_bound(T: int, depth: int, c: float = 3.0) -> float:
    return c * depth * math.sqrt(T * math.log(T))


# -- threshold experiments ---------------------------------------------------------------


def dkw_violation_rate(k: int, eps: float, trials: int, seed: int) -> tuple[float, float]:
    """Fraction of trials with ``|theta_k - 0| > eps`` for k standard-normal log-ratios.

    Returns ``(rate, dkw_tail(k, eps))``.
    """
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((trials, k))
    thetas = np.array([empirical_median(row).theta_k for row in draws])
    return float(np.mean(np.abs(thetas) > eps)), dkw_tail(k, eps)


def _bit_loss(h: int, z: tuple[int, int]) -> float:
    return float(z[h])


TWO_HYPOTHESES = HypothesisClass((0, 1), _bit_loss)


def corruption_trial(
    seed: int,
    n: int = 400,
    risks: tuple[float, float] = (0.2, 0.4),
    alpha: float = 0.25,
    delta: float = 0.05,
) -> tuple[bool, bool]:
    """One corrupted-sample trial; returns (mom picked h0, mean-ERM picked h0).

    Each datum carries independent Bernoulli loss bits for h0 and h1.  An
    oblivious adversary picks ``alpha * n`` points at random and flips h0's
    bit on them; h1 is left alone.
    """
    data_rng, mom_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    bits = (data_rng.random((n, 2)) < np.asarray(risks)).astype(int)
    bad = data_rng.choice(n, size=int(round(alpha * n)), replace=False)
    bits[bad, 0] = 1 - bits[bad, 0]
    data = [tuple(row) for row in bits.tolist()]
    return mom_erm(data, TWO_HYPOTHESES, delta, mom_rng).chosen == 0, mean_erm(data, TWO_HYPOTHESES) == 0
