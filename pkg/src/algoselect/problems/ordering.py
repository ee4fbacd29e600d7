"""Sorting and order-statistic problems."""

from __future__ import annotations

import numpy as np

from algoselect.problems.base import Deadline, Problem, sortedness


def _random_array(rng: np.random.Generator, params) -> dict:
    n = int(params["n"])
    if n < 1:
        raise ValueError("array size must be >= 1")
    values = rng.integers(0, 10 * n, size=n)
    return {"values": values.astype(np.int64)}


def _array_features(payload) -> dict:
    v = payload["values"]
    return {"size": len(v), "sortedness": sortedness(v)}


# -- sorting ------------------------------------------------------------------------


def merge_sort(payload, rng: np.random.Generator, deadline: Deadline) -> list[int]:
    a = [int(v) for v in payload["values"]]
    width, n = 1, len(a)
    # bottom-up: no recursion limit to worry about
    while width < n:
        deadline.check()
        out = []
        for lo in range(0, n, 2 * width):
            left, right = a[lo : lo + width], a[lo + width : lo + 2 * width]
            i = j = 0
            while i < len(left) and j < len(right):
                if left[i] <= right[j]:
                    out.append(left[i])
                    i += 1
                else:
                    out.append(right[j])
                    j += 1
            out.extend(left[i:])
            out.extend(right[j:])
        a = out
        width *= 2
    return a


def quicksort(payload, rng: np.random.Generator, deadline: Deadline) -> list[int]:
    """Random-pivot three-way quicksort with an explicit stack."""
    out: list[int] = []
    # (is_final, items): final runs are already in place and emitted as-is
    stack: list[tuple[bool, list[int]]] = [(False, [int(v) for v in payload["values"]])]
    while stack:
        final, part = stack.pop()
        if final or len(part) <= 1:
            out.extend(part)
            continue
        deadline.check()
        pivot = part[int(rng.integers(len(part)))]
        less = [x for x in part if x < pivot]
        equal = [x for x in part if x == pivot]
        greater = [x for x in part if x > pivot]
        # pushed in reverse so ``less`` is emitted first
        stack.append((False, greater))
        stack.append((True, equal))
        stack.append((False, less))
    return out


def sorting_quality(payload, result) -> float:
    """1 if the result is the sorted input, else 0."""
    if result is None:
        return 0.0
    expected = np.sort(payload["values"])
    got = np.asarray(result)
    return float(got.shape == expected.shape and bool(np.array_equal(got, expected)))


SORTING = Problem(
    id="sorting",
    category="sorting",
    defaults={"n": 3000},
    generate_fn=_random_array,
    features_fn=_array_features,
    quality_fn=sorting_quality,
    systematic=("merge_sort", merge_sort),
    randomized=("random_pivot_quicksort", quicksort),
    notes="quality: 1 iff the output equals the sorted input",
)


# -- order statistics -----------------------------------------------------------------


def _selection_instance(rng: np.random.Generator, params) -> dict:
    payload = _random_array(rng, params)
    payload["rank"] = len(payload["values"]) // 2
    return payload


def _mom_select(a: list[int], k: int, deadline: Deadline) -> int:
    while True:
        if len(a) <= 10:
            return sorted(a)[k]
        deadline.check()
        medians = [sorted(a[i : i + 5])[len(a[i : i + 5]) // 2] for i in range(0, len(a), 5)]
        pivot = _mom_select(medians, len(medians) // 2, deadline)
        less = [x for x in a if x < pivot]
        n_equal = sum(1 for x in a if x == pivot)
        if k < len(less):
            a = less
        elif k < len(less) + n_equal:
            return pivot
        else:
            k -= len(less) + n_equal
            a = [x for x in a if x > pivot]


def median_of_medians(payload, rng: np.random.Generator, deadline: Deadline) -> int:
    """Deterministic linear-time selection (groups of five)."""
    return _mom_select([int(v) for v in payload["values"]], int(payload["rank"]), deadline)


def quickselect(payload, rng: np.random.Generator, deadline: Deadline) -> int:
    a = [int(v) for v in payload["values"]]
    k = int(payload["rank"])
    while True:
        if len(a) == 1:
            return a[0]
        deadline.check()
        pivot = a[int(rng.integers(len(a)))]
        less = [x for x in a if x < pivot]
        n_equal = sum(1 for x in a if x == pivot)
        if k < len(less):
            a = less
        elif k < len(less) + n_equal:
            return pivot
        else:
            k -= len(less) + n_equal
            a = [x for x in a if x > pivot]


def selection_quality(payload, result) -> float:
    if result is None:
        return 0.0
    k = int(payload["rank"])
    return float(int(result) == int(np.partition(payload["values"], k)[k]))


SELECTION = Problem(
    id="order-statistics",
    category="sorting",
    defaults={"n": 20000},
    generate_fn=_selection_instance,
    features_fn=_array_features,
    quality_fn=selection_quality,
    systematic=("median_of_medians_select", median_of_medians),
    randomized=("quickselect", quickselect),
    notes="quality: 1 iff the returned value is the rank-k order statistic",
)
