"""Population diversity measures.

Two families: a normalized mean distance to the population centroid
(computed over positions or personal bests) and a Shannon entropy over
proportional fitness shares (in bits). Both are cheap enough to evaluate
every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .swarm import SwarmState

__all__ = ["DiversitySample", "distance_to_average", "fitness_entropy", "sample_diversities"]


@dataclass(frozen=True)
class DiversitySample:
    """All four diversity readings of one swarm snapshot, plus the best fitness."""

    n: int
    d_X: float
    d_P: float
    s_X: float
    s_P: float
    best_f: float


def distance_to_average(points, diagonal: float) -> float:
    """Mean Euclidean distance to the centroid, normalized by population and diagonal.

    Args:
        points: (M, N) array of row vectors.
        diagonal: normalization length, typically the search box diagonal.

    Returns:
        (1 / (M * diagonal)) * sum_i ||points_i - mean||_2.
    """
    if diagonal <= 0.0:
        raise ValueError(f"diagonal must be positive, got {diagonal}")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError(f"expected a non-empty (M, N) array, got shape {pts.shape}")
    centered = pts - pts.mean(axis=0)
    return float(np.sqrt((centered * centered).sum(axis=1)).sum() / (pts.shape[0] * diagonal))


def fitness_entropy(fitness) -> float:
    """Shannon entropy (bits) of the proportional fitness distribution.

    Shares are f_i / sum f. When any fitness is non-positive the whole vector
    is first shifted positive: f - min(f) + eps with eps scaled to the
    magnitude of the minimum. A degenerate vector that still sums to nothing
    is treated as uniform, i.e. log2(M).
    """
    f = np.asarray(fitness, dtype=float)
    if f.ndim != 1 or f.size < 1:
        raise ValueError(f"expected a non-empty 1-d fitness vector, got shape {f.shape}")
    if np.any(f <= 0.0):
        low = float(f.min())
        f = f - low + 1e-12 * max(1.0, abs(low))
    total = f.sum()
    if not np.isfinite(total) or total <= 0.0:
        return float(np.log2(f.size))
    q = f / total
    q = q[q > 0.0]  # 0 log 0 -> 0
    return float(-np.sum(q * np.log2(q)))


def sample_diversities(state: SwarmState, diagonal: float) -> DiversitySample:
    """Snapshot all diversity measures of the current swarm state."""
    return DiversitySample(
        n=state.n,
        d_X=distance_to_average(state.X, diagonal),
        d_P=distance_to_average(state.P, diagonal),
        s_X=fitness_entropy(state.fX),
        s_P=fitness_entropy(state.fP),
        best_f=float(state.fP[state.g]),
    )
