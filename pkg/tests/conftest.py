from __future__ import annotations

from typing import Mapping, Sequence

import pytest

from algoselect.harness import RunRecord


def synthetic_records(
    runtimes: Mapping[tuple[str, str], Sequence[float]],
    qualities: Mapping[tuple[str, str], float] | None = None,
    flagged: set[tuple[str, str]] = frozenset(),
) -> list[RunRecord]:
    """Records from ``{(problem, algorithm): [runtime per rep]}``; quality defaults to 1."""
    qualities = qualities or {}
    out = []
    for (p, a), rts in runtimes.items():
        for rep, rt in enumerate(rts):
            out.append(RunRecord(p, a, rep, 1000 + rep, float(rt), qualities.get((p, a), 1.0), (0.0,), (p, a) in flagged))
    return out


@pytest.fixture
def records_factory():
    return synthetic_records


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number].line())
