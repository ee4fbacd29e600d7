"""Cross-validation and information analysis over a run matrix.

All functions are pure over a list of :class:`~algoselect.harness.RunRecord`.
Runtimes are lifted to ``RUNTIME_FLOOR`` before any ratio or logarithm.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from algoselect.harness import RunRecord
from algoselect.problems import ALGORITHMS, PROBLEMS
from algoselect.threshold import RUNTIME_FLOOR, empirical_median, log_ratio

log = logging.getLogger(__name__)

COMPATIBILITY_THRESHOLD = 0.5
RATIO_BUCKETS = (1, 1.5, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000)

SUMMARY_METRICS = (
    "Total Problems Analyzed",
    "Total Algorithms Tested",
    "Total Experiments Run (Observations)",
    "Mean Absolute CV Gap (Median Predictor)",
    "Median Relative Improvement Potential",
    "Geometric Mean Performance Ratio (Predicted vs. Best)",
    "Problem Difficulty Range (Mean Runtime)",
    "Algorithm Speed Range (Mean Runtime)",
    "95% CI for Absolute CV Gap (Bootstrap)",
)


def _rt(seconds: float) -> float:
    return max(float(seconds), RUNTIME_FLOOR)


def _problem_order(problems) -> list[str]:
    known = [p for p in PROBLEMS if p in problems]
    return known + sorted(set(problems) - set(known))


def _algorithm_order(algorithms) -> list[str]:
    known = [a for a in ALGORITHMS if a in algorithms]
    return known + sorted(set(algorithms) - set(known))


def group(records: Sequence[RunRecord]) -> dict[str, dict[str, dict[int, RunRecord]]]:
    """``out[problem][algorithm][rep] -> record``."""
    out: dict[str, dict[str, dict[int, RunRecord]]] = defaultdict(lambda: defaultdict(dict))
    for r in records:
        out[r.problem][r.algorithm][r.rep] = r
    return out


def _summary(values: Sequence[float]) -> dict[str, float]:
    x = np.asarray(values, dtype=float)
    return {
        "mean": float(x.mean()),
        "median": float(np.median(x)),
        "std": float(x.std()),
        "min": float(x.min()),
        "max": float(x.max()),
        "count": int(x.size),
    }


def problem_stats(records: Sequence[RunRecord]) -> dict[str, dict[str, float]]:
    by = defaultdict(list)
    for r in records:
        by[r.problem].append(r.runtime_s)
    return {p: _summary(by[p]) for p in _problem_order(by)}


def algorithm_stats(records: Sequence[RunRecord]) -> dict[str, dict[str, float]]:
    """Per algorithm over its own problem's runs (cross-problem adapter rows excluded)."""
    by = defaultdict(list)
    for r in records:
        entry = ALGORITHMS.get(r.algorithm)
        if entry is None or entry.problem == r.problem:
            by[r.algorithm].append(r.runtime_s)
    return {a: _summary(by[a]) for a in _algorithm_order(by)}


def mean_quality(records: Sequence[RunRecord]) -> dict[str, dict[str, float]]:
    g = group(records)
    return {
        p: {a: float(np.mean([r.quality for r in reps.values()])) for a, reps in g[p].items()}
        for p in _problem_order(g)
    }


def compatible_algorithms(records: Sequence[RunRecord]) -> dict[str, list[str]]:
    """Algorithms whose mean quality on the problem exceeds 0.5."""
    return {
        p: [a for a in _algorithm_order(qs) if qs[a] > COMPATIBILITY_THRESHOLD]
        for p, qs in mean_quality(records).items()
    }


# -- CV gaps -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Fold:
    held_out: int
    predicted: str
    best: str
    gap_abs: float
    gap_relative: float  # fraction of the best runtime
    ratio: float


@dataclass(frozen=True)
class ProblemGap:
    problem: str
    folds: tuple[Fold, ...]
    gap_abs: float  # mean over folds, seconds
    gap_relative_pct: float  # median over folds, percent
    ratio: float  # geometric mean over folds


@dataclass(frozen=True)
class CVResult:
    problems: dict[str, ProblemGap]
    excluded: tuple[str, ...]
    cv_gap_abs: float
    cv_gap_relative: float
    geometric_mean_ratio: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "problems": {p: asdict(g) for p, g in self.problems.items()},
            "excluded": list(self.excluded),
            "cv_gap_abs": self.cv_gap_abs,
            "cv_gap_relative": self.cv_gap_relative,
            "geometric_mean_ratio": self.geometric_mean_ratio,
        }


def _shared_reps(reps_by_alg: dict[str, dict[int, RunRecord]], algorithms: Sequence[str]) -> list[int]:
    shared = set.intersection(*(set(reps_by_alg[a]) for a in algorithms))
    return sorted(shared)


def cv_gap_analysis(records: Sequence[RunRecord]) -> CVResult:
    """Leave-one-repetition-out evaluation of the median-runtime predictor.

    In each fold the predictor picks, among compatible algorithms, the one with
    the lowest median training runtime (ties to the earlier roster id); the gap
    is measured against the fastest compatible algorithm on the held-out
    repetition, so it is never negative.  Problems without a compatible
    algorithm are excluded.  Summary: mean absolute gap over problems, median
    over problems of the per-problem median relative gap (percent), and the
    geometric mean over problems of the per-problem geometric-mean ratio.
    """
    g = group(records)
    compat = compatible_algorithms(records)
    results: dict[str, ProblemGap] = {}
    excluded = []
    for p in _problem_order(g):
        algs = compat[p]
        if not algs:
            excluded.append(p)
            continue
        reps = _shared_reps(g[p], algs)
        if len(reps) < 2 or any(len(g[p][a]) < 2 for a in algs):
            raise ValueError(f"problem {p!r} needs at least 2 repetitions per algorithm for cross-validation")
        folds = []
        for r in reps:
            train = {a: [_rt(rec.runtime_s) for k, rec in g[p][a].items() if k != r] for a in algs}
            predicted = min(algs, key=lambda a: (float(np.median(train[a])), algs.index(a)))
            held = {a: _rt(g[p][a][r].runtime_s) for a in algs}
            best = min(algs, key=lambda a: (held[a], algs.index(a)))
            gap = held[predicted] - held[best]
            folds.append(Fold(r, predicted, best, gap, gap / held[best], held[predicted] / held[best]))
        results[p] = ProblemGap(
            p,
            tuple(folds),
            float(np.mean([f.gap_abs for f in folds])),
            100.0 * float(np.median([f.gap_relative for f in folds])),
            float(np.exp(np.mean([math.log(f.ratio) for f in folds]))),
        )
    if results:
        gaps = [x.gap_abs for x in results.values()]
        rel = [x.gap_relative_pct for x in results.values()]
        ratios = [x.ratio for x in results.values()]
        summary = (float(np.mean(gaps)), float(np.median(rel)), float(np.exp(np.mean(np.log(ratios)))))
    else:
        summary = (float("nan"),) * 3
    return CVResult(results, tuple(excluded), *summary)


def bootstrap_ci(
    gaps: Sequence[float], resamples: int, confidence: float, rng: np.random.Generator
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``gaps``."""
    x = np.asarray(gaps, dtype=float)
    if x.size < 2:
        raise ValueError("bootstrap needs at least two gap values")
    if resamples < 1000:
        raise ValueError("use at least 1000 bootstrap resamples")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    idx = rng.integers(0, x.size, size=(resamples, x.size))
    means = x[idx].mean(axis=1)
    alpha = (1.0 - confidence) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


# -- entropy ---------------------------------------------------------------------------------


def entropy_bits(probabilities: Sequence[float]) -> float:
    p = np.asarray(probabilities, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def winner_distribution(records: Sequence[RunRecord]) -> dict[str, dict[str, float]]:
    """Per problem, the fraction of repetitions each compatible algorithm wins on runtime."""
    g = group(records)
    compat = compatible_algorithms(records)
    out = {}
    for p in _problem_order(g):
        algs = compat[p]
        if not algs:
            continue
        reps = _shared_reps(g[p], algs)
        if not reps:
            continue
        wins = dict.fromkeys(algs, 0)
        for r in reps:
            winner = min(algs, key=lambda a: (_rt(g[p][a][r].runtime_s), algs.index(a)))
            wins[winner] += 1
        out[p] = {a: wins[a] / len(reps) for a in algs}
    return out


@dataclass(frozen=True)
class EntropyResult:
    bits: float
    per_problem: dict[str, float]
    excluded: tuple[str, ...]


def conditional_entropy(records: Sequence[RunRecord]) -> EntropyResult:
    """Mean over problems (uniform weight) of the winner entropy in bits."""
    g = group(records)
    dist = winner_distribution(records)
    for p in g:
        if len(g[p]) and any(len(reps) < 2 for reps in g[p].values()):
            raise ValueError(f"problem {p!r} needs at least 2 repetitions per algorithm")
    per = {p: entropy_bits(list(d.values())) for p, d in dist.items()}
    excluded = tuple(p for p in _problem_order(g) if p not in dist)
    if excluded:
        log.warning("no compatible algorithm, excluded from entropy: %s", ", ".join(excluded))
    bits = float(np.mean(list(per.values()))) if per else float("nan")
    return EntropyResult(bits, per, excluded)


# -- compatibility and ratios -------------------------------------------------------------------


@dataclass(frozen=True)
class CompatibilityResult:
    counts: dict[str, int]
    ratios: dict[str, dict[str, float]]
    histogram: list[dict[str, Any]]

    @property
    def mean_compatible(self) -> float:
        return float(np.mean(list(self.counts.values()))) if self.counts else 0.0


def ratio_histogram(ratios: Sequence[float]) -> list[dict[str, Any]]:
    edges = list(RATIO_BUCKETS) + [math.inf]
    counts = [0] * len(RATIO_BUCKETS)
    for r in ratios:
        for i in range(len(RATIO_BUCKETS)):
            if edges[i] <= r < edges[i + 1]:
                counts[i] += 1
                break
    return [{"lo": edges[i], "hi": edges[i + 1], "count": counts[i]} for i in range(len(counts))]


def compatibility_and_ratios(records: Sequence[RunRecord]) -> CompatibilityResult:
    """Compatible-algorithm counts and mean-runtime / best-mean-runtime ratios per problem."""
    if not records:
        raise ValueError("empty run matrix")
    g = group(records)
    compat = compatible_algorithms(records)
    ratios: dict[str, dict[str, float]] = {}
    for p in _problem_order(g):
        means = {a: _rt(np.mean([r.runtime_s for r in g[p][a].values()])) for a in compat[p]}
        if means:
            best = min(means.values())
            ratios[p] = {a: m / best for a, m in means.items()}
    flat = [v for d in ratios.values() for v in d.values()]
    return CompatibilityResult({p: len(compat[p]) for p in _problem_order(g)}, ratios, ratio_histogram(flat))


# -- threshold view ---------------------------------------------------------------------------


def threshold_estimates(records: Sequence[RunRecord], delta: float = 0.05) -> dict[str, dict[str, Any]]:
    """Empirical median of ``ln T_sys - ln T_ran`` per problem, paired by repetition."""
    g = group(records)
    out = {}
    for p in _problem_order(g):
        sys_id, ran_id = f"{p}/systematic", f"{p}/randomized"
        if sys_id not in g[p] or ran_id not in g[p]:
            continue
        reps = sorted(set(g[p][sys_id]) & set(g[p][ran_id]))
        if not reps:
            continue
        samples = [
            log_ratio(_rt(g[p][sys_id][r].runtime_s), _rt(g[p][ran_id][r].runtime_s), instance=r) for r in reps
        ]
        out[p] = empirical_median(samples).to_dict(delta)
    return out


# -- heatmap --------------------------------------------------------------------------------------


def heatmap_rows(records: Sequence[RunRecord]) -> tuple[list[str], list[str], list[list[float | None]]]:
    """Mean log10 runtime per (problem, algorithm); None where nothing usable ran.

    A cell is blank when the pair was not run, when it is a cross-problem
    adapter row, or when every run of it was flagged.
    """
    g = group(records)
    problems = _problem_order(g)
    algorithms = _algorithm_order({r.algorithm for r in records})
    rows = []
    for p in problems:
        row: list[float | None] = []
        for a in algorithms:
            entry = ALGORITHMS.get(a)
            recs = [r for r in g[p].get(a, {}).values() if not r.flagged]
            if not recs or (entry is not None and entry.problem != p):
                row.append(None)
            else:
                row.append(math.log10(_rt(np.mean([r.runtime_s for r in recs]))))
        rows.append(row)
    return problems, algorithms, rows


def export_heatmap(records: Sequence[RunRecord]) -> str:
    problems, algorithms, rows = heatmap_rows(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem", *algorithms])
    for p, row in zip(problems, rows):
        w.writerow([p, *("" if v is None else repr(v) for v in row)])
    return buf.getvalue()


def export_ratios(result: CompatibilityResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem", "algorithm", "ratio"])
    for p, d in result.ratios.items():
        for a, v in d.items():
            w.writerow([p, a, repr(v)])
    w.writerow([])
    w.writerow(["bucket_lo", "bucket_hi", "count"])
    for b in result.histogram:
        w.writerow([b["lo"], b["hi"], b["count"]])
    return buf.getvalue()


# -- report -----------------------------------------------------------------------------------


@dataclass
class AnalysisReport:
    n_records: int
    problems: list[str]
    algorithms: list[str]
    problem_stats: dict[str, dict[str, float]]
    algorithm_stats: dict[str, dict[str, float]]
    cv: dict[str, Any]
    cv_gap_abs: float
    cv_gap_relative: float
    geometric_mean_ratio: float
    bootstrap_ci: tuple[float, float] | None
    bootstrap: dict[str, Any]
    compatibility_counts: dict[str, int]
    mean_compatible: float
    ratios: dict[str, dict[str, float]]
    ratio_histogram: list[dict[str, Any]]
    conditional_entropy_bits: float
    entropy_per_problem: dict[str, float]
    excluded_problems: list[str]
    thresholds: dict[str, dict[str, Any]]
    flagged_records: int
    nonfinite_runtimes: int
    summary_table: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if self.bootstrap_ci is not None:
            d["bootstrap_ci"] = list(self.bootstrap_ci)
        return d

    def to_json(self) -> str:
        return json.dumps(_finite(self.to_dict()), indent=2, sort_keys=True)


def _finite(obj: Any) -> Any:
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def build_report(
    records: Sequence[RunRecord],
    bootstrap_resamples: int = 10_000,
    confidence: float = 0.95,
    bootstrap_seed: int = 0,
) -> AnalysisReport:
    if not records:
        raise ValueError("cannot analyse an empty run matrix")
    notes = []
    try:
        cv = cv_gap_analysis(records)
    except ValueError as exc:
        # too few repetitions: descriptive statistics only
        notes.append(f"cross-validation skipped: {exc}")
        cv = CVResult({}, (), float("nan"), float("nan"), float("nan"))
    gaps = [g.gap_abs for g in cv.problems.values()]
    ci = None
    if len(gaps) >= 2:
        ci = bootstrap_ci(gaps, bootstrap_resamples, confidence, np.random.default_rng(bootstrap_seed))
    compat = compatibility_and_ratios(records)
    try:
        ent = conditional_entropy(records)
    except ValueError as exc:
        notes.append(f"entropy skipped: {exc}")
        ent = EntropyResult(float("nan"), {}, ())
    pstats = problem_stats(records)
    astats = algorithm_stats(records)
    problems = list(pstats)
    algorithms = _algorithm_order({r.algorithm for r in records})
    nonfinite = sum(1 for r in records if not math.isfinite(r.runtime_s))
    excluded = sorted(set(cv.excluded) | set(ent.excluded), key=problems.index)

    p_means = [s["mean"] for s in pstats.values()]
    a_means = [s["mean"] for s in astats.values()]
    summary_table = {
        "Total Problems Analyzed": len(problems),
        "Total Algorithms Tested": len(algorithms),
        "Total Experiments Run (Observations)": len(records),
        "Mean Absolute CV Gap (Median Predictor)": cv.cv_gap_abs,
        "Median Relative Improvement Potential": cv.cv_gap_relative,
        "Geometric Mean Performance Ratio (Predicted vs. Best)": cv.geometric_mean_ratio,
        "Problem Difficulty Range (Mean Runtime)": [min(p_means), max(p_means)],
        "Algorithm Speed Range (Mean Runtime)": [min(a_means), max(a_means)] if a_means else None,
        "95% CI for Absolute CV Gap (Bootstrap)": list(ci) if ci else None,
    }
    return AnalysisReport(
        n_records=len(records),
        problems=problems,
        algorithms=algorithms,
        problem_stats=pstats,
        algorithm_stats=astats,
        cv=cv.to_dict(),
        cv_gap_abs=cv.cv_gap_abs,
        cv_gap_relative=cv.cv_gap_relative,
        geometric_mean_ratio=cv.geometric_mean_ratio,
        bootstrap_ci=ci,
        bootstrap={"resamples": bootstrap_resamples, "confidence": confidence, "seed": bootstrap_seed},
        compatibility_counts=compat.counts,
        mean_compatible=compat.mean_compatible,
        ratios=compat.ratios,
        ratio_histogram=compat.histogram,
        conditional_entropy_bits=ent.bits,
        entropy_per_problem=ent.per_problem,
        excluded_problems=excluded,
        thresholds=threshold_estimates(records),
        flagged_records=sum(1 for r in records if r.flagged),
        nonfinite_runtimes=nonfinite,
        summary_table=summary_table,
        notes=notes
        + [
            "cv_gap_abs: mean over problems of the per-problem mean held-out gap (seconds)",
            "cv_gap_relative: median over problems of the per-problem median relative gap (percent)",
            "geometric_mean_ratio: geometric mean over problems of per-problem geometric-mean fold ratios",
            "folds: leave-one-repetition-out; compatibility: mean quality > 0.5",
            f"runtimes below {RUNTIME_FLOOR} s are lifted to that floor before ratios and logs",
        ],
    )


def format_summary(report: AnalysisReport) -> str:
    """Human-readable summary table."""

    def fmt(v: Any, unit: str = "") -> str:
        if v is None:
            return "n/a"
        if isinstance(v, (list, tuple)):
            return "[" + ", ".join(f"{x:.4f}" for x in v) + "]" + unit
        if isinstance(v, float):
            return f"{v:.4f}{unit}" if math.isfinite(v) else "n/a"
        return str(v)

    t = report.summary_table
    units = {
        "Mean Absolute CV Gap (Median Predictor)": "s",
        "Median Relative Improvement Potential": "%",
        "Geometric Mean Performance Ratio (Predicted vs. Best)": "x",
        "Problem Difficulty Range (Mean Runtime)": "s",
        "Algorithm Speed Range (Mean Runtime)": "s",
        "95% CI for Absolute CV Gap (Bootstrap)": "s",
    }
    width = max(len(k) for k in SUMMARY_METRICS)
    lines = [f"{k:<{width}}  {fmt(t.get(k), units.get(k, ''))}" for k in SUMMARY_METRICS]
    lines.append(f"{'Conditional entropy H(A|P)':<{width}}  {fmt(report.conditional_entropy_bits, ' bits')}")
    lines.append(f"{'Mean compatible algorithms per problem':<{width}}  {report.mean_compatible:.2f}")
    if report.excluded_problems:
        lines.append(f"{'Excluded (no compatible algorithm)':<{width}}  {', '.join(report.excluded_problems)}")
    return "\n".join(lines)
