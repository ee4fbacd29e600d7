"""Online selectors in loss orientation.

Follow-the-Perturbed-Leader with Gumbel noise, UCB1 arms and UCB1-gated
trees, a cost-aware cascade, and a doubling-window wrapper for piecewise
stationary streams.  Every selector takes an explicit ``numpy`` generator.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# shifts uniform draws from [0, 1 - 2^-53] into the open interval (0, 1)
_HALF_ULP = 2.0**-54


def gumbel(rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
    u = rng.random(size) + _HALF_ULP
    return -np.log(-np.log(u))


def check_losses(losses: Sequence[float] | np.ndarray, k: int | None = None) -> np.ndarray:
    arr = np.asarray(losses, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("loss vector must be 1-d and nonempty")
    if k is not None and arr.size != k:
        raise ValueError(f"loss vector has length {arr.size}, expected {k}")
    if np.any(arr < 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
        raise ValueError("losses must lie in [0, 1]")
    return arr


# -- FPL --------------------------------------------------------------------


@dataclass(frozen=True)
class FPLState:
    cumulative_losses: tuple[float, ...]
    round: int = 0
    scale: float = 1.0

    @classmethod
    def start(cls, k: int) -> FPLState:
        if k < 1:
            raise ValueError("FPL needs at least one action")
        return cls((0.0,) * k)

    @property
    def k(self) -> int:
        return len(self.cumulative_losses)


def fpl_choose(state: FPLState, rng: np.random.Generator) -> int:
    """argmin of cumulative loss minus a fresh Gumbel(0, 1) draw per action.

    Consumes exactly ``K`` uniforms; ties go to the lowest index.
    """
    perturbed = np.asarray(state.cumulative_losses) - state.scale * gumbel(rng, state.k)
    return int(np.argmin(perturbed))


def fpl_update(state: FPLState, losses: Sequence[float] | np.ndarray) -> FPLState:
    arr = check_losses(losses, state.k)
    cum = tuple(c + v for c, v in zip(state.cumulative_losses, arr.tolist()))
    return FPLState(cum, state.round + 1, state.scale)


def fpl_run(stream: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorised FPL over a full-information oblivious stream.

    Returns the chosen action per round.  The draw order matches calling
    ``fpl_choose`` then ``fpl_update`` once per round with the same rng.
    """
    stream = np.asarray(stream, dtype=float)
    T, K = stream.shape
    before = np.vstack([np.zeros(K), np.cumsum(stream, axis=0)[:-1]])
    return np.argmin(before - gumbel(rng, (T, K)), axis=1)


# -- regret accounting --------------------------------------------------------


@dataclass
class RegretLedger:
    """Per-round record of the stream, the choice, and the incurred loss.

    ``losses[t, a]`` is the loss action ``a`` would have incurred in round ``t``
    (for cost-aware selectors: loss plus cost), so every derived quantity can
    be recomputed from the stored history.
    """

    losses: np.ndarray
    chosen: np.ndarray
    segments: tuple[int, ...] = ()  # start rounds of stationary segments after the first

    def __post_init__(self) -> None:
        self.losses = np.asarray(self.losses, dtype=float)
        self.chosen = np.asarray(self.chosen, dtype=int)
        if self.losses.ndim != 2 or self.losses.shape[0] != self.chosen.size:
            raise ValueError("ledger needs a (T, K) loss history and T choices")

    @property
    def horizon(self) -> int:
        return int(self.chosen.size)

    @property
    def incurred(self) -> np.ndarray:
        return self.losses[np.arange(self.horizon), self.chosen]

    def best_fixed_cumloss(self) -> np.ndarray:
        """Running ``min_a sum_{s<=t} l_s(a)``."""
        return np.cumsum(self.losses, axis=0).min(axis=1)

    def regret_curve(self) -> np.ndarray:
        return np.cumsum(self.incurred) - self.best_fixed_cumloss()

    def regret(self) -> float:
        return float(self.incurred.sum() - self.losses.sum(axis=0).min())

    def segment_bounds(self) -> list[tuple[int, int]]:
        edges = [0, *sorted(self.segments), self.horizon]
        return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]

    def segment_best(self) -> list[float]:
        return [float(self.losses[a:b].sum(axis=0).min()) for a, b in self.segment_bounds()]

    def segment_regret(self) -> float:
        """Regret against the best fixed action chosen separately per segment."""
        return float(self.incurred.sum() - sum(self.segment_best()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "chosen", "incurred_loss", "best_fixed_cumloss", "regret"])
        inc = self.incurred
        best = self.best_fixed_cumloss()
        reg = np.cumsum(inc) - best
        for t in range(self.horizon):
            w.writerow([t + 1, int(self.chosen[t]), repr(float(inc[t])), repr(float(best[t])), repr(float(reg[t]))])
        return buf.getvalue()


# -- UCB ----------------------------------------------------------------------


@dataclass
class UCBArmState:
    pulls: int = 0
    mean: float = 0.0
    cost: float = 0.0

    def update(self, loss: float) -> None:
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must lie in [0, 1], got {loss}")
        self.pulls += 1
        self.mean += (loss - self.mean) / self.pulls


def ucb1_choose(arms: Sequence[UCBArmState], t: int) -> int:
    """Lower-confidence pick on losses: argmin of ``mean - sqrt(2 ln t / N)``.

    Unpulled arms go first, lowest index first.
    """
    if not arms:
        raise ValueError("ucb1_choose needs at least one arm")
    if t < 1:
        raise ValueError("round index must be >= 1")
    for j, arm in enumerate(arms):
        if arm.pulls == 0:
            return j
    log_t = math.log(t)
    index = [a.mean - math.sqrt(2.0 * log_t / a.pulls) for a in arms]
    return int(np.argmin(index))


def cascade_choose(arms: Sequence[UCBArmState], t: int, horizon: int) -> int:
    """Racing UCB with known costs, cheapest arm first.

    Arm ``j`` is taken when its pessimistic total ``mean + beta + cost`` is
    below every more expensive arm's optimistic total ``mean - beta + cost``.
    If no arm wins the race the optimistic cost-plus-loss index decides.
    Unpulled arms are tried first, cheapest first.
    """
    if not arms:
        raise ValueError("cascade_choose needs at least one arm")
    costs = [a.cost for a in arms]
    if any(b < a for a, b in zip(costs, costs[1:])):
        raise ValueError("arms must be sorted by nondecreasing cost")
    if t < 1:
        raise ValueError("round index must be >= 1")
    for j, arm in enumerate(arms):
        if arm.pulls == 0:
            return j
    log_h = math.log(max(horizon, 2))
    beta = [math.sqrt(log_h / a.pulls) for a in arms]
    optimistic = [a.mean - b + a.cost for a, b in zip(arms, beta)]
    for j in range(len(arms) - 1):
        pessimistic = arms[j].mean + beta[j] + arms[j].cost
        if pessimistic < min(optimistic[j + 1 :]):
            return j
    return int(np.argmin(optimistic))


class UCBTree:
    """Complete binary tree of two-armed UCB1 gates; arm 0 is the left child.

    Gates are stored heap-style: gate ``g`` has children ``2g+1`` and ``2g+2``;
    leaves are numbered ``0 .. 2^D - 1`` left to right.
    """

    def __init__(self, depth: int):
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.depth = depth
        self.gates = [[UCBArmState(), UCBArmState()] for _ in range(2**depth - 1)]

    def select(self) -> tuple[int, list[tuple[int, int]]]:
        g, path = 0, []
        for _ in range(self.depth):
            arms = self.gates[g]
            arm = ucb1_choose(arms, arms[0].pulls + arms[1].pulls + 1)
            path.append((g, arm))
            g = 2 * g + 1 + arm
        leaf = g - (2**self.depth - 1)
        return leaf, path

    def update(self, path: Sequence[tuple[int, int]], loss: float) -> None:
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"leaf loss must lie in [0, 1], got {loss}")
        for g, arm in path:
            self.gates[g][arm].update(loss)


def ucb_tree_route(tree: UCBTree, feedback: Callable[[int], float]) -> int:
    """One round: route by UCB1 at each gate, then credit the leaf loss to every gate on the path."""
    leaf, path = tree.select()
    loss = float(feedback(leaf))
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"leaf loss must lie in [0, 1], got {loss}")
    tree.update(path, loss)
    return leaf


# -- adaptive windows -----------------------------------------------------------


class AdaptiveWindowFPL:
    """FPL learners on windows of length 1, 2, 4, ... combined by a meta FPL.

    The learner with window ``2^j`` restarts whenever ``round % 2^j == 0``.
    The meta-learner treats each window learner as an expert whose loss is the
    loss of that learner's recommendation, and never restarts.  Learner state
    is kept as one ``(n_windows, K)`` array of cumulative losses.
    """

    def __init__(self, k: int, horizon: int):
        if k < 1:
            raise ValueError("need at least one action")
        n_windows = max(1, math.ceil(math.log2(max(horizon, 1))) + 1)
        self.k = k
        self.windows = np.array([2**j for j in range(n_windows)])
        self.cum = np.zeros((n_windows, k))
        self.meta = np.zeros(n_windows)
        self.round = 0

    def step(self, losses: np.ndarray, rng: np.random.Generator) -> int:
        self.cum[self.round % self.windows == 0] = 0.0
        recs = np.argmin(self.cum - gumbel(rng, self.cum.shape), axis=1)
        expert = int(np.argmin(self.meta - gumbel(rng, self.meta.size)))
        self.cum += losses
        self.meta += losses[recs]
        self.round += 1
        return int(recs[expert])


def adaptive_window_run(
    stream: np.ndarray, segments: Sequence[int], rng: np.random.Generator
) -> RegretLedger:
    """Run the doubling-window learner over a full-information stream.

    ``segments`` lists the rounds at which a new stationary segment begins;
    the ledger's ``segment_regret`` compares against the best action per segment.
    """
    stream = np.asarray(stream, dtype=float)
    if stream.ndim != 2 or stream.shape[0] == 0:
        raise ValueError("stream must be a nonempty (T, K) array")
    T, K = stream.shape
    learner = AdaptiveWindowFPL(K, T)
    chosen = np.empty(T, dtype=int)
    for t in range(T):
        row = check_losses(stream[t], K)
        chosen[t] = learner.step(row, rng)
    return RegretLedger(stream, chosen, tuple(segments))
