"""Tree comb networks: binary trees of comb gates with algorithm leaves.

Node identifiers are binary path strings from the root: ``""`` is the root,
``"L"`` its left child, ``"LR"`` the right child of that, and so on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from algoselect.comb import SeedingFunction, as_features, seed


@dataclass(frozen=True)
class Leaf:
    algorithm: str


@dataclass(frozen=True)
class Gate:
    seeding: SeedingFunction
    left: "Node"
    right: "Node"

    def __post_init__(self) -> None:
        for child in (self.left, self.right):
            if not isinstance(child, (Gate, Leaf)):
                raise TypeError(f"gate children must be Gate or Leaf, got {type(child).__name__}")


Node = Union[Gate, Leaf]


@dataclass(frozen=True)
class TraceStep:
    node: str
    t: float
    decision: str  # "left" | "right"


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[TraceStep, ...] = field(default_factory=tuple)
    terminal: str = ""

    @property
    def path(self) -> str:
        return "".join("L" if s.decision == "left" else "R" for s in self.steps)


def _go_left(t: float, rng: np.random.Generator | None) -> bool:
    if rng is None:
        # deterministic mode: threshold at 0.5, ties go left
        return t <= 0.5
    return rng.random() < 1.0 - t


def _walk(tree: Node, phi: np.ndarray, rng: np.random.Generator | None) -> Iterator[tuple[str, float, bool] | str]:
    node, node_id = tree, ""
    while isinstance(node, Gate):
        t = seed(node.seeding, phi)
        left = _go_left(t, rng)
        yield node_id, t, left
        node, node_id = (node.left, node_id + "L") if left else (node.right, node_id + "R")
    yield node.algorithm


def route(tree: Node, phi: Sequence[float] | np.ndarray, rng: np.random.Generator | None = None) -> str:
    """Descend from the root to a leaf and return its algorithm id.

    At each gate the left child is taken with probability ``1 - t``.  With
    ``rng=None`` routing is deterministic (left iff ``t <= 0.5``).
    """
    x = as_features(phi)
    *_, terminal = _walk(tree, x, rng)
    return terminal


def trace(tree: Node, phi: Sequence[float] | np.ndarray, rng: np.random.Generator | None = None) -> ExecutionTrace:
    """Like :func:`route` but records every gate decision.

    Consumes the rng in exactly the same order as ``route``.
    """
    x = as_features(phi)
    *steps, terminal = _walk(tree, x, rng)
    return ExecutionTrace(
        tuple(TraceStep(nid, t, "left" if left else "right") for nid, t, left in steps),
        terminal,
    )


def replay(tree: Node, decisions: Sequence[str]) -> str:
    """Follow a recorded decision sequence and return the leaf reached."""
    node = tree
    for d in decisions:
        if not isinstance(node, Gate):
            raise ValueError("decision sequence is longer than the branch depth")
        node = node.left if d == "left" else node.right
    if not isinstance(node, Leaf):
        raise ValueError("decision sequence stops before a leaf")
    return node.algorithm


def leaf_count(tree: Node) -> int:
    if isinstance(tree, Leaf):
        return 1
    return leaf_count(tree.left) + leaf_count(tree.right)


def depth(tree: Node) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.left), depth(tree.right))


def leaves(tree: Node) -> list[str]:
    if isinstance(tree, Leaf):
        return [tree.algorithm]
    return leaves(tree.left) + leaves(tree.right)


def gates(tree: Node, node_id: str = "") -> Iterator[tuple[str, Gate]]:
    if isinstance(tree, Gate):
        yield node_id, tree
        yield from gates(tree.left, node_id + "L")
        yield from gates(tree.right, node_id + "R")


def complete_tree(depth: int, seeding: SeedingFunction, leaf_names: Sequence[str] | None = None) -> Node:
    """Complete tree of the given depth with every gate sharing ``seeding``.

    Leaves are named ``leaf0 .. leaf{2^D - 1}`` left to right unless given.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = 2**depth
    names = list(leaf_names) if leaf_names is not None else [f"leaf{i}" for i in range(n)]
    if len(names) != n:
        raise ValueError(f"need {n} leaf names, got {len(names)}")

    def build(lo: int, hi: int) -> Node:
        if hi - lo == 1:
            return Leaf(names[lo])
        mid = (lo + hi) // 2
        return Gate(seeding, build(lo, mid), build(mid, hi))

    return build(0, n)


def to_dict(tree: Node) -> dict:
    if isinstance(tree, Leaf):
        return {"leaf": tree.algorithm}
    return {"gate": tree.seeding.to_dict(), "left": to_dict(tree.left), "right": to_dict(tree.right)}


def from_dict(data: dict) -> Node:
    if "leaf" in data:
        return Leaf(str(data["leaf"]))
    try:
        return Gate(SeedingFunction.from_dict(data["gate"]), from_dict(data["left"]), from_dict(data["right"]))
    except KeyError as exc:
        raise ValueError(f"malformed tree node, missing {exc}") from None


def to_json(tree: Node) -> str:
    return json.dumps(to_dict(tree))


def from_json(text: str) -> Node:
    return from_dict(json.loads(text))
