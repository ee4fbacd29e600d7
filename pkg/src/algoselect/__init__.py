"""Comb-based algorithm selection with online selectors and a benchmark harness."""

from algoselect.comb import (
    Endpoint,
    SeedingFunction,
    comb_select,
    make_rng,
    n_path_distribution,
    sample_path,
    seed,
)
from algoselect.tree import Gate, Leaf, leaf_count, route, trace

__all__ = [
    "Endpoint",
    "Gate",
    "Leaf",
    "SeedingFunction",
    "comb_select",
    "leaf_count",
    "make_rng",
    "n_path_distribution",
    "route",
    "sample_path",
    "seed",
    "trace",
]

__version__ = "0.1.0"
