"""Swarm state and one-iteration steppers.

Two quantum-behaved update rules (contraction around the per-particle focus
or around the swarm mean of personal bests) plus the classical velocity
update in inertia and constriction forms. All steppers advance the swarm by
exactly one iteration, mutating the state in place, and walk the particles
in strictly sequential order: personal and global bests are refreshed
immediately after each particle moves, so later particles see the updated
bests within the same iteration.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .objectives import ObjectiveError, ObjectiveFunction

__all__ = [
    "SwarmState",
    "EvaluationError",
    "CoefficientSchedule",
    "alpha_at",
    "ClassicalPsoParams",
    "initialize_swarm",
    "update_pbest",
    "select_gbest",
    "mean_best",
    "local_focus",
    "qpso_step_type1",
    "qpso_step_type2",
    "classical_pso_step",
    "derive_rng",
]

BOUNDARY_POLICIES = ("clamp", "none")


class EvaluationError(RuntimeError):
    """Objective evaluation failed or returned a non-finite fitness."""

    def __init__(self, message: str, particle: int | None = None,
                 iteration: int | None = None):
        super().__init__(message)
        self.particle = particle
        self.iteration = iteration


@dataclass
class SwarmState:
    """Positions, personal bests, their fitness values, and bookkeeping.

    ``g`` indexes the global best personal best; ``n`` counts completed
    iterations; ``V`` holds velocities for the classical variants and stays
    ``None`` for the quantum-behaved ones.
    """

    X: np.ndarray
    P: np.ndarray
    fX: np.ndarray
    fP: np.ndarray
    g: int
    n: int
    V: np.ndarray | None = None

    @property
    def swarm_size(self) -> int:
        return self.X.shape[0]

    @property
    def dimension(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class CoefficientSchedule:
    """Fixed or linearly interpolated coefficient over an iteration horizon."""

    mode: str  # "fixed" | "linear"
    value: float = 0.0
    start: float = 0.0
    end: float = 0.0
    horizon: int = field(default=1)

    def __post_init__(self):
        if self.mode not in ("fixed", "linear"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "linear" and self.horizon < 1:
            raise ValueError("linear schedule needs a horizon >= 1")

    @classmethod
    def fixed(cls, value: float) -> "CoefficientSchedule":
        return cls(mode="fixed", value=float(value))

    @classmethod
    def linear(cls, start: float, end: float, horizon: int) -> "CoefficientSchedule":
        return cls(mode="linear", start=float(start), end=float(end), horizon=int(horizon))


def alpha_at(schedule: CoefficientSchedule, n: int) -> float:
    """Coefficient value at iteration ``n``; linear mode clamps past the horizon."""
    if schedule.mode == "fixed":
        return schedule.value
    frac = min(max(n, 0), schedule.horizon) / schedule.horizon
    return schedule.start + (schedule.end - schedule.start) * frac


@dataclass(frozen=True)
class ClassicalPsoParams:
    """Acceleration weights and either an inertia schedule or a constriction factor.

    Exactly one of ``inertia`` and ``chi`` must be set. ``v_max`` clamps
    velocities componentwise (inertia form only); ``None`` leaves them uncapped.
    """

    c1: float
    c2: float
    inertia: CoefficientSchedule | None = None
    chi: float | None = None
    v_max: np.ndarray | None = None
    topology: str = "global"

    def __post_init__(self):
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ValueError("acceleration weights must be non-negative")
        if (self.inertia is None) == (self.chi is None):
            raise ValueError("set exactly one of inertia schedule or constriction factor")
        if self.chi is not None and not 0.0 < self.chi < 1.0:
            raise ValueError(f"constriction factor must lie in (0, 1), got {self.chi}")
        if self.topology not in ("global", "ring"):
            raise ValueError(f"unknown topology {self.topology!r}")


# --- construction and bookkeeping ops --------------------------------------

def initialize_swarm(f: ObjectiveFunction, swarm_size: int, rng: np.random.Generator,
                     with_velocity: bool = False) -> SwarmState:
    """Uniform positions over the domain; personal bests start at the positions.

    Velocities (if requested) start at zero.
    """
    if swarm_size < 2:
        raise ValueError(f"swarm_size must be >= 2, got {swarm_size}")
    x = rng.uniform(f.lower, f.upper, size=(swarm_size, f.dimension))
    fx = np.array([_evaluate(f, x[i], i, 0) for i in range(swarm_size)])
    return SwarmState(
        X=x,
        P=x.copy(),
        fX=fx,
        fP=fx.copy(),
        g=int(np.argmin(fx)),
        n=0,
        V=np.zeros_like(x) if with_velocity else None,
    )


def update_pbest(state: SwarmState, i: int) -> None:
    """Replace particle ``i``'s personal best only on strict improvement."""
    if state.fX[i] < state.fP[i]:
        state.P[i] = state.X[i]
        state.fP[i] = state.fX[i]


def select_gbest(state: SwarmState) -> int:
    """Index of the best personal best; ties go to the lowest index."""
    return int(np.argmin(state.fP))


def mean_best(state: SwarmState) -> np.ndarray:
    """Coordinate-wise mean of the personal bests."""
    return state.P.mean(axis=0)


def local_focus(p_best: np.ndarray, g_best: np.ndarray,
                rng: np.random.Generator) -> np.ndarray:
    """Random convex mix of a personal best and the global best, per dimension."""
    phi = rng.random(p_best.shape[0])
    return phi * p_best + (1.0 - phi) * g_best


def derive_rng(master_seed: int, algorithm: str = "", run_index: int = 0) -> np.random.Generator:
    """Independent, reproducible stream for one run.

    PCG64 seeded from ``SeedSequence(master_seed, spawn_key=(crc32(tag), run))``,
    so streams are a pure function of (master seed, algorithm tag, run index)
    and stay stable across processes and scheduling order.
    """
    key = zlib.crc32(algorithm.encode("utf-8"))
    seq = np.random.SeedSequence(master_seed, spawn_key=(key, run_index))
    return np.random.Generator(np.random.PCG64(seq))


# --- steppers ---------------------------------------------------------------

def _apply_boundary(x: np.ndarray, f: ObjectiveFunction, boundary: str) -> np.ndarray:
    if boundary == "clamp":
        return np.clip(x, f.lower, f.upper)
    if boundary == "none":
        return x
    raise ValueError(f"unknown boundary policy {boundary!r}")


def _evaluate(f: ObjectiveFunction, x: np.ndarray, i: int, n: int) -> float:
    try:
        fx = f.evaluate(x)
    except ObjectiveError as exc:
        raise EvaluationError(
            f"evaluation failed for particle {i} at iteration {n}: {exc}",
            particle=i, iteration=n,
        ) from exc
    if not np.isfinite(fx):
        raise EvaluationError(
            f"non-finite fitness {fx!r} for particle {i} at iteration {n}",
            particle=i, iteration=n,
        )
    return fx


def _commit_move(state: SwarmState, i: int, x: np.ndarray, fx: float) -> None:
    state.X[i] = x
    state.fX[i] = fx
    update_pbest(state, i)
    # Incremental refresh: strict improvement keeps the incumbent on exact ties.
    if state.fP[i] < state.fP[state.g]:
        state.g = i


def qpso_step_type2(state: SwarmState, f: ObjectiveFunction, alpha: float,
                    rng: np.random.Generator, boundary: str = "clamp") -> None:
    """One iteration contracting around the mean of personal bests.

    The mean is frozen at the top of the iteration; every particle then jumps
    to its focus point plus a signed contraction of its distance to that mean:
    x[j] = p[j] +/- alpha |x[j] - c[j]| ln(1/u), u uniform, sign fair.
    """
    m, nd = state.X.shape
    c = state.P.mean(axis=0)
    phi = rng.random((m, nd))
    # draw u on (0, 1] so ln(1/u) stays finite
    log_u = np.log(1.0 / (1.0 - rng.random((m, nd))))
    sign = np.where(rng.random((m, nd)) < 0.5, 1.0, -1.0)
    it = state.n + 1
    for i in range(m):
        g_pos = state.P[state.g]
        p = phi[i] * state.P[i] + (1.0 - phi[i]) * g_pos
        x = p + sign[i] * (alpha * np.abs(state.X[i] - c) * log_u[i])
        x = _apply_boundary(x, f, boundary)
        _commit_move(state, i, x, _evaluate(f, x, i, it))
    state.n = it


def qpso_step_type1(state: SwarmState, f: ObjectiveFunction, alpha: float,
                    rng: np.random.Generator, boundary: str = "clamp") -> None:
    """One iteration contracting around each particle's own focus point.

    Same sampling as the mean-based rule but the jump length scales with the
    distance to the focus: x[j] = p[j] +/- alpha |x[j] - p[j]| ln(1/u).
    """
    m, nd = state.X.shape
    phi = rng.random((m, nd))
    log_u = np.log(1.0 / (1.0 - rng.random((m, nd))))
    sign = np.where(rng.random((m, nd)) < 0.5, 1.0, -1.0)
    it = state.n + 1
    for i in range(m):
        g_pos = state.P[state.g]
        p = phi[i] * state.P[i] + (1.0 - phi[i]) * g_pos
        x = p + sign[i] * (alpha * np.abs(state.X[i] - p) * log_u[i])
        x = _apply_boundary(x, f, boundary)
        _commit_move(state, i, x, _evaluate(f, x, i, it))
    state.n = it


def _neighborhood_best(state: SwarmState, i: int, topology: str) -> int:
    if topology == "global":
        return state.g
    m = state.swarm_size
    ring = ((i - 1) % m, i, (i + 1) % m)
    return ring[int(np.argmin([state.fP[j] for j in ring]))]


def classical_pso_step(state: SwarmState, f: ObjectiveFunction,
                       params: ClassicalPsoParams, n: int,
                       rng: np.random.Generator, boundary: str = "clamp") -> None:
    """One velocity-based iteration (inertia or constriction form).

    ``n`` is the iteration number used to evaluate the inertia schedule.
    """
    if state.V is None:
        raise ValueError("state has no velocities; initialize with with_velocity=True")
    m, nd = state.X.shape
    r1 = rng.random((m, nd))
    r2 = rng.random((m, nd))
    it = state.n + 1
    for i in range(m):
        nb = _neighborhood_best(state, i, params.topology)
        pull = params.c1 * r1[i] * (state.P[i] - state.X[i]) \
            + params.c2 * r2[i] * (state.P[nb] - state.X[i])
        if params.chi is not None:
            v = params.chi * (state.V[i] + pull)
        else:
            v = alpha_at(params.inertia, n) * state.V[i] + pull
            if params.v_max is not None:
                v = np.clip(v, -params.v_max, params.v_max)
        x = _apply_boundary(state.X[i] + v, f, boundary)
        state.V[i] = v
        _commit_move(state, i, x, _evaluate(f, x, i, it))
    state.n = it
