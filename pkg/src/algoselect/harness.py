"""Run matrix execution and JSONL persistence of run records."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from algoselect.problems import (
    DEFAULT_BUDGET,
    ManifestEntry,
    ProblemSpec,
    cross_solve,
    generate,
    get_algorithm,
    solve,
    suite_manifest,
)

log = logging.getLogger(__name__)

RECORD_KEYS = ("problem", "algorithm", "rep", "seed", "runtime_s", "quality", "features", "flagged")


class DataError(ValueError):
    """A run-record file that cannot be parsed; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class RunRecord:
    problem: str
    algorithm: str
    rep: int
    seed: int
    runtime_s: float
    quality: float
    features: tuple[float, ...] = field(default_factory=tuple)
    flagged: bool = False

    def to_json(self) -> str:
        d = asdict(self)
        d["features"] = list(self.features)
        return json.dumps(d)

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        missing = [k for k in RECORD_KEYS if k not in d]
        if missing:
            raise ValueError(f"missing keys {missing}")
        rec = cls(
            str(d["problem"]),
            str(d["algorithm"]),
            int(d["rep"]),
            int(d["seed"]),
            float(d["runtime_s"]),
            float(d["quality"]),
            tuple(float(v) for v in d["features"]),
            bool(d["flagged"]),
        )
        if not (math.isfinite(rec.runtime_s) and rec.runtime_s >= 0):
            raise ValueError(f"runtime_s must be finite and >= 0, got {rec.runtime_s}")
        if not 0.0 <= rec.quality <= 1.0:
            raise ValueError(f"quality must lie in [0, 1], got {rec.quality}")
        return rec


def cell_seed(base_seed: int, problem: str, algorithm: str, rep: int) -> int:
    """Stable 64-bit seed for one (problem, algorithm, repetition) cell."""
    digest = hashlib.blake2b(f"{base_seed}|{problem}|{algorithm}|{rep}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class Cell:
    problem: str
    algorithm: str
    rep: int
    seed: int
    params: tuple[tuple[str, object], ...]
    budget: float


def run_cell(cell: Cell) -> RunRecord:
    """Generate a fresh instance, solve it, and never raise: failures become flagged records."""
    try:
        instance = generate(ProblemSpec(cell.problem, cell.seed, dict(cell.params)))
    except Exception:
        log.exception("instance generation failed for %s rep %d", cell.problem, cell.rep)
        return RunRecord(cell.problem, cell.algorithm, cell.rep, cell.seed, cell.budget, 0.0, (), True)
    features = tuple(float(v) for v in instance.features)
    entry = get_algorithm(cell.algorithm)
    if entry.problem != cell.problem:
        outcome = cross_solve(entry, instance)
        return RunRecord(cell.problem, cell.algorithm, cell.rep, cell.seed, outcome.runtime, 0.0, features, False)
    solver_rng = np.random.default_rng(np.random.SeedSequence(cell.seed, spawn_key=(1,)))
    try:
        outcome = solve(entry, instance, solver_rng, cell.budget)
    except Exception:
        log.exception("solver %s failed on %s rep %d", cell.algorithm, cell.problem, cell.rep)
        return RunRecord(cell.problem, cell.algorithm, cell.rep, cell.seed, cell.budget, 0.0, features, True)
    return RunRecord(
        cell.problem,
        cell.algorithm,
        cell.rep,
        cell.seed,
        outcome.runtime,
        outcome.quality,
        features,
        outcome.timed_out,
    )


def plan_cells(
    manifest: Sequence[ManifestEntry],
    repetitions: int,
    base_seed: int,
    budget: float = DEFAULT_BUDGET,
    extended: bool = False,
) -> list[Cell]:
    """Grid of cells in problem, algorithm, repetition order.

    In extended mode every roster algorithm is run against every problem.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    all_algorithms = [a for m in manifest for a in (m.systematic.algorithm_id, m.randomized.algorithm_id)]
    cells = []
    for m in manifest:
        algorithms = all_algorithms if extended else [m.systematic.algorithm_id, m.randomized.algorithm_id]
        params = tuple(sorted(m.template.params.items()))
        for alg in algorithms:
            for rep in range(repetitions):
                cells.append(Cell(m.problem, alg, rep, cell_seed(base_seed, m.problem, alg, rep), params, budget))
    return cells


def run_matrix(
    manifest: Sequence[ManifestEntry] | None = None,
    repetitions: int = 7,
    base_seed: int = 0,
    *,
    budget: float = DEFAULT_BUDGET,
    workers: int = 1,
    extended: bool = False,
    sink: IO[str] | None = None,
) -> list[RunRecord]:
    """Execute the (problem x algorithm x repetition) grid.

    Records are written to ``sink`` as JSONL in grid order as they complete.
    ``workers > 1`` runs cells in worker processes; timing-sensitive studies
    should keep the default of 1.
    """
    manifest = suite_manifest() if manifest is None else manifest
    cells = plan_cells(manifest, repetitions, base_seed, budget, extended)
    records: list[RunRecord] = []

    def emit(results: Iterable[RunRecord]) -> None:
        for rec in results:
            records.append(rec)
            if sink is not None:
                sink.write(rec.to_json() + "\n")
                sink.flush()

    if workers <= 1:
        emit(run_cell(c) for c in cells)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            emit(pool.map(run_cell, cells))
    return records


def iter_records(lines: Iterable[str]) -> Iterator[RunRecord]:
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield RunRecord.from_dict(json.loads(line))
        except (ValueError, TypeError, KeyError) as exc:
            raise DataError(str(exc), i) from None


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, encoding="utf-8") as fh:
        records = list(iter_records(fh))
    if not records:
        raise DataError(f"{path} contains no run records")
    return records


def write_records(records: Iterable[RunRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
