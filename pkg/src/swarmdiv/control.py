"""Diversity-driven control of the contraction-expansion coefficient.

Two policies steer the coefficient from the measured position diversity:

* Threshold control: a three-phase machine (decline, explode, re-decline)
  driven by fixed lower/upper diversity thresholds. Late in the first phase
  it can also collapse the personal bests toward the global best.
* Schedule control: the coefficient is forced high whenever diversity falls
  below a decreasing desired curve, and the personal bests collapse whenever
  diversity exceeds a decreasing upper curve.

Both policies read the position diversity measured at the top of the
iteration, before any particle moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objectives import ObjectiveFunction
from .swarm import CoefficientSchedule, SwarmState, _evaluate, alpha_at, local_focus, select_gbest

__all__ = [
    "CONVERGENCE_THRESHOLD",
    "TdcPolicy",
    "tdc_decide",
    "CdsPolicy",
    "cds_desired",
    "cds_upper",
    "cds_decide",
    "apply_pbest_collapse",
]

# Contraction-expansion boundary between guaranteed collapse and divergence
# of the particle jump process (e^gamma with gamma the Euler constant).
CONVERGENCE_THRESHOLD = 1.781


@dataclass
class TdcPolicy:
    """Three-phase threshold control.

    Phase 1 runs the base coefficient schedule until diversity drops below
    ``d_lower``; phase 2 expands with ``alpha2`` until diversity exceeds
    ``d_upper``; phase 3 contracts with ``alpha3`` and returns to phase 2
    when diversity falls below ``d_lower`` again. Phase 1 never recurs.
    While still in phase 1 past iteration ``n_phase1``, the personal bests
    are collapsed toward the global best each iteration.
    """

    d_lower: float
    d_upper: float
    n_phase1: int
    alpha1: CoefficientSchedule
    alpha2: float = 2.0
    alpha3: float = 0.75
    phase: int = 1

    def __post_init__(self):
        if not 0.0 < self.d_lower < self.d_upper:
            raise ValueError("thresholds must satisfy 0 < d_lower < d_upper")
        if self.alpha2 <= CONVERGENCE_THRESHOLD:
            raise ValueError(f"alpha2 must exceed {CONVERGENCE_THRESHOLD} to expand the swarm")
        if self.alpha3 >= CONVERGENCE_THRESHOLD:
            raise ValueError(f"alpha3 must stay below {CONVERGENCE_THRESHOLD} to contract the swarm")
        if self.phase not in (1, 2, 3):
            raise ValueError(f"phase must be 1, 2, or 3, got {self.phase}")


def tdc_decide(policy: TdcPolicy, d_x: float, n: int) -> tuple[float, bool]:
    """Advance the phase machine and pick this iteration's coefficient.

    Returns (alpha, collapse_pbest). Mutates ``policy.phase``.
    """
    if policy.phase == 1 and d_x < policy.d_lower:
        policy.phase = 2
    elif policy.phase == 2 and d_x > policy.d_upper:
        policy.phase = 3
    elif policy.phase == 3 and d_x < policy.d_lower:
        policy.phase = 2
    if policy.phase == 1:
        return alpha_at(policy.alpha1, n), n > policy.n_phase1
    if policy.phase == 2:
        return policy.alpha2, False
    return policy.alpha3, False


@dataclass
class CdsPolicy:
    """Schedule control around decreasing desired/upper diversity curves.

    The desired curve decays polynomially with exponent ``exponent`` from
    ``dd_initial`` to ``dd_final``; the upper curve decays linearly from
    ``du_initial`` to ``du_final``. ``alpha1`` is the forced expansion value,
    ``base`` the ordinary coefficient schedule.
    """

    dd_initial: float
    du_initial: float
    base: CoefficientSchedule
    dd_final: float = 1e-8
    du_final: float = 1e-8
    exponent: float = 4.0
    alpha1: float = 2.0

    def __post_init__(self):
        if not self.dd_initial > self.dd_final > 0.0:
            raise ValueError("need dd_initial > dd_final > 0")
        if not self.du_initial > self.du_final > 0.0:
            raise ValueError("need du_initial > du_final > 0")
        if self.dd_initial > self.du_initial:
            raise ValueError("desired curve must start at or below the upper curve")
        if self.exponent <= 1.0:
            raise ValueError("exponent must exceed 1 so the desired curve decays faster")
        if self.alpha1 <= CONVERGENCE_THRESHOLD:
            raise ValueError(f"alpha1 must exceed {CONVERGENCE_THRESHOLD} to expand the swarm")


def _blend(w: float, initial: float, final: float) -> float:
    # Convex form hits both endpoints exactly in floating point.
    return w * initial + (1.0 - w) * final


def cds_desired(policy: CdsPolicy, n: int, n_max: int) -> float:
    """Desired lower diversity at iteration ``n`` (polynomial decay)."""
    n = min(max(n, 0), n_max)
    w = ((n_max - n) / n_max) ** policy.exponent
    return _blend(w, policy.dd_initial, policy.dd_final)


def cds_upper(policy: CdsPolicy, n: int, n_max: int) -> float:
    """Upper diversity bound at iteration ``n`` (linear decay)."""
    n = min(max(n, 0), n_max)
    return _blend((n_max - n) / n_max, policy.du_initial, policy.du_final)


def cds_decide(policy: CdsPolicy, d_x: float, n: int, n_max: int) -> tuple[float, bool]:
    """Pick this iteration's coefficient and the collapse flag.

    Returns (alpha, collapse_pbest): the forced expansion value when
    diversity sits below the desired curve, the base schedule otherwise;
    collapse whenever diversity exceeds the upper curve.
    """
    if d_x < cds_desired(policy, n, n_max):
        alpha = policy.alpha1
    else:
        alpha = alpha_at(policy.base, n)
    return alpha, d_x > cds_upper(policy, n, n_max)


def apply_pbest_collapse(state: SwarmState, rng: np.random.Generator,
                         objective: ObjectiveFunction | None = None,
                         reevaluate: bool = False) -> None:
    """Pull every personal best into a random convex mix with the global best.

    The stored personal-best fitness values are kept as they are: the move is
    a bookkeeping contraction of the attractors, not a new sampling of the
    objective. The global best row mixes with itself, so its position and the
    best fitness are preserved. Pass ``reevaluate=True`` (with the objective)
    to re-score the moved personal bests instead.
    """
    g_pos = state.P[state.g].copy()
    m = state.swarm_size
    for i in range(m):
        state.P[i] = local_focus(state.P[i], g_pos, rng)
    if reevaluate:
        if objective is None:
            raise ValueError("reevaluate=True needs the objective")
        for i in range(m):
            state.fP[i] = _evaluate(objective, state.P[i], i, state.n)
        state.g = select_gbest(state)
