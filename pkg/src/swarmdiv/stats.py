"""Rank correlation, unequal-variance tests, and campaign summaries.

The Spearman coefficient uses midranks for ties and returns ``None`` (never
a silent zero) when the correlation is undefined: fewer than two pairs or a
constant input. The two-sample test is Welch's t with the Welch-Satterthwaite
degrees of freedom; p values come from the regularized incomplete beta
function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

__all__ = [
    "StatsError",
    "spearman",
    "TTestResult",
    "unpaired_t_test",
    "AlgorithmSummary",
    "ComparisonReport",
    "summarize",
    "rank_algorithms",
    "CheckpointSeries",
    "CorrelationRecord",
    "fitness_diversity_correlations",
]


class StatsError(ValueError):
    """Invalid statistical input."""


def spearman(xs, ys) -> float | None:
    """Spearman rank correlation, or ``None`` when undefined.

    Both vectors are ranked with midranks for ties, then scored as
    1 - 6 sum d_j^2 / (J^3 - J) with d_j the rank differences.

    Returns:
        A value in [-1, 1], or ``None`` for fewer than two pairs or a
        constant input vector.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise StatsError(f"expected two equal-length vectors, got {xs.shape} and {ys.shape}")
    j = xs.size
    if j < 2:
        return None
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        return None
    d = rankdata(xs, method="average") - rankdata(ys, method="average")
    return float(1.0 - 6.0 * np.sum(d * d) / (j ** 3 - j))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    se: float
    df: float


def unpaired_t_test(a, b) -> TTestResult:
    """Welch's unequal-variance two-sample t test (two-sided).

    Degenerate samples with zero variance on both sides give t = 0, p = 1
    when the means agree and p = 0 otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise StatsError("each sample needs at least two observations")
    na, nb = a.size, b.size
    va, vb = a.var(ddof=1), b.var(ddof=1)
    se2 = va / na + vb / nb
    se = float(np.sqrt(se2))
    diff = float(a.mean() - b.mean())
    if se == 0.0:
        if diff == 0.0:
            return TTestResult(t=0.0, p=1.0, se=0.0, df=float("nan"))
        return TTestResult(t=float(np.copysign(np.inf, diff)), p=0.0, se=0.0, df=float("nan"))
    t = diff / se
    df = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    # two-sided tail probability via the regularized incomplete beta function
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(t=float(t), p=p, se=se, df=float(df))


@dataclass(frozen=True)
class AlgorithmSummary:
    tag: str
    n_runs: int
    mean: float
    std: float


@dataclass
class ComparisonReport:
    """Per-algorithm summaries plus all pairwise Welch tests.

    ``tests`` is keyed by sorted tag pairs; ``ranks`` is filled in by
    :func:`rank_algorithms`.
    """

    summaries: list[AlgorithmSummary]
    tests: dict[tuple[str, str], TTestResult]
    ranks: dict[str, int] = field(default_factory=dict)

    def p_value(self, tag_a: str, tag_b: str) -> float:
        return self.tests[tuple(sorted((tag_a, tag_b)))].p


def summarize(results: Mapping[str, Sequence[float]]) -> ComparisonReport:
    """Mean/sample-std summaries and pairwise Welch tests for final fitness sets."""
    if not results:
        raise StatsError("no algorithms to summarize")
    summaries = []
    for tag in results:
        vals = np.asarray(results[tag], dtype=float)
        if vals.size < 2:
            raise StatsError(f"algorithm {tag!r} needs at least two runs, got {vals.size}")
        summaries.append(AlgorithmSummary(tag, vals.size, float(vals.mean()),
                                          float(vals.std(ddof=1))))
    tests = {}
    tags = list(results)
    for i, ta in enumerate(tags):
        for tb in tags[i + 1:]:
            key = tuple(sorted((ta, tb)))
            tests[key] = unpaired_t_test(results[key[0]], results[key[1]])
    return ComparisonReport(summaries=summaries, tests=tests)


def rank_algorithms(report: ComparisonReport, significance: float = 0.05) -> dict[str, int]:
    """Greedy grouping of mean-sorted algorithms into statistically tied ranks.

    Algorithms are sorted by mean (ascending; ties broken by tag). Walking
    down the list, the next algorithm joins the current group when its Welch
    test against the group leader has p >= ``significance``; every member of
    a group receives the leader's 1-based position as its rank. This is a
    simplified multiple-comparison scheme based on adjacent pairwise tests.
    """
    order = sorted(report.summaries, key=lambda s: (s.mean, s.tag))
    ranks: dict[str, int] = {}
    leader_tag = ""
    leader_rank = 1
    for pos, summary in enumerate(order, start=1):
        if pos == 1 or report.p_value(leader_tag, summary.tag) < significance:
            leader_tag = summary.tag
            leader_rank = pos
        ranks[summary.tag] = leader_rank
    report.ranks = ranks
    return ranks


@dataclass(frozen=True)
class CheckpointSeries:
    """Cross-run trace matrices, one row per checkpoint and one column per run."""

    checkpoints: np.ndarray
    best_f: np.ndarray
    d_X: np.ndarray
    d_P: np.ndarray
    s_X: np.ndarray
    s_P: np.ndarray

    def __post_init__(self):
        c = self.checkpoints.shape[0]
        for name in ("best_f", "d_X", "d_P", "s_X", "s_P"):
            m = getattr(self, name)
            if m.ndim != 2 or m.shape[0] != c:
                raise StatsError(f"{name} must have one row per checkpoint")


@dataclass(frozen=True)
class CorrelationRecord:
    """Spearman correlations of best fitness against each diversity measure."""

    n: int
    rho_d_X: float | None
    rho_d_P: float | None
    rho_s_X: float | None
    rho_s_P: float | None


def fitness_diversity_correlations(series: CheckpointSeries) -> list[CorrelationRecord]:
    """Per-checkpoint rank correlation of best fitness with each diversity measure.

    Correlations use the raw values (no sign flip); undefined checkpoints
    propagate as ``None``.
    """
    records = []
    for row, n in enumerate(series.checkpoints):
        best = series.best_f[row]
        records.append(CorrelationRecord(
            n=int(n),
            rho_d_X=spearman(best, series.d_X[row]),
            rho_d_P=spearman(best, series.d_P[row]),
            rho_s_X=spearman(best, series.s_X[row]),
            rho_s_P=spearman(best, series.s_P[row]),
        ))
    return records
