"""Single runs, campaigns, and the on-disk trace archive.

A run executes a fixed iteration budget and snapshots diversity at every
checkpoint. Each trace row pairs the diversity readings taken at the top of
an iteration (the values the control policy saw) with the coefficient and
phase it chose and the best fitness after that iteration's moves. The row at
``n = 0`` describes the freshly initialized swarm; its coefficient column is
``nan`` because no move produced it.

Campaign outputs are deterministic byte-for-byte for a given configuration
and master seed: every run draws from its own stream derived from
(master seed, algorithm tag, run index), so scheduling and worker count do
not matter. Wall-clock timestamps live only in the ``meta.json`` sidecar.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .control import CdsPolicy, TdcPolicy, apply_pbest_collapse, cds_decide, cds_desired, tdc_decide
from .diversity import distance_to_average, sample_diversities
from .objectives import (ObjectiveError, ObjectiveFunction, domain_diagonal, load_matrix,
                         load_vector, make_objective, make_shifted_rotated, random_orthogonal,
                         random_shift)
from .swarm import (ClassicalPsoParams, CoefficientSchedule, EvaluationError, alpha_at,
                    classical_pso_step, derive_rng, initialize_swarm, qpso_step_type1,
                    qpso_step_type2)
from .variants import VARIANTS, VariantInfo

__all__ = [
    "TraceRecord",
    "RunResult",
    "RunOutcome",
    "CampaignResult",
    "TRACE_HEADER",
    "format_float",
    "write_trace",
    "read_trace",
    "trace_path",
    "resolve_objective",
    "run_single",
    "run_from_config",
    "run_campaign",
]

TRACE_HEADER = "run,n,best_f,d_X,d_P,s_X,s_P,alpha,phase"
RESULTS_HEADER = "algorithm,run,status,final_best,error"


@dataclass(frozen=True)
class TraceRecord:
    """One checkpoint row; see the module docstring for the field semantics."""

    run: int
    n: int
    best_f: float
    d_X: float
    d_P: float
    s_X: float
    s_P: float
    alpha: float
    phase: str


@dataclass(frozen=True)
class RunResult:
    tag: str
    run_index: int
    final_best: float
    records: tuple[TraceRecord, ...]


@dataclass(frozen=True)
class RunOutcome:
    tag: str
    run_index: int
    status: str  # "ok" | "failed"
    final_best: float
    error: str = ""


@dataclass(frozen=True)
class CampaignResult:
    out_dir: Path
    outcomes: tuple[RunOutcome, ...]


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (lossless round trip)."""
    return format(float(x), ".17g")


# --- variant resolution ------------------------------------------------------

def _base_schedule(info: VariantInfo, params: dict, horizon: int) -> CoefficientSchedule:
    if info.schedule == "fixed":
        return CoefficientSchedule.fixed(params.get("alpha", 0.75))
    return CoefficientSchedule.linear(params.get("alpha_start", 1.0),
                                      params.get("alpha_end", 0.5), horizon)


def _pso_params(info: VariantInfo, params: dict, objective: ObjectiveFunction,
                horizon: int) -> ClassicalPsoParams:
    if info.pso_mode == "constriction":
        return ClassicalPsoParams(
            c1=params.get("c1", 2.05), c2=params.get("c2", 2.05),
            chi=params.get("chi", 0.7298), topology=info.topology,
        )
    if "v_max" in params:
        v_max = np.full(objective.dimension, float(params["v_max"]))
    else:
        v_max = (objective.upper - objective.lower) / 2.0
    return ClassicalPsoParams(
        c1=params.get("c1", 2.0), c2=params.get("c2", 2.0),
        inertia=CoefficientSchedule.linear(params.get("w_start", 0.9),
                                           params.get("w_end", 0.4), horizon),
        v_max=v_max, topology=info.topology,
    )


def _build_policy(info: VariantInfo, params: dict, horizon: int,
                  base: CoefficientSchedule, initial_d_x: float):
    if info.control == "tdc":
        return TdcPolicy(
            d_lower=params.get("d_lower", 1e-6),
            d_upper=params.get("d_upper", 0.2),
            n_phase1=params.get("n_phase1", int(0.9 * horizon)),
            alpha1=base,
            alpha2=params.get("alpha2", 2.0),
            alpha3=params.get("alpha3", 0.75),
        )
    if info.control == "cds":
        dd_initial = params.get("dd_initial", "auto")
        du_initial = params.get("du_initial", "auto")
        return CdsPolicy(
            dd_initial=initial_d_x / 3.0 if dd_initial == "auto" else float(dd_initial),
            du_initial=initial_d_x if du_initial == "auto" else float(du_initial),
            base=base,
            dd_final=params.get("dd_final", 1e-8),
            du_final=params.get("du_final", 1e-8),
            exponent=params.get("exponent", 4.0),
            alpha1=params.get("alpha1", 2.0),
        )
    return None


def _decide(info: VariantInfo, policy, base: CoefficientSchedule | None,
            d_x: float, n: int, n_max: int) -> tuple[float, bool, str]:
    """Coefficient, collapse flag, and the phase/trigger token for the trace."""
    if info.control == "tdc":
        alpha, collapse = tdc_decide(policy, d_x, n)
        return alpha, collapse, (f"{policy.phase}c" if collapse else str(policy.phase))
    if info.control == "cds":
        alpha, collapse = cds_decide(policy, d_x, n, n_max)
        if d_x < cds_desired(policy, n, n_max):
            token = "lo"
        elif collapse:
            token = "up"
        else:
            token = "-"
        return alpha, collapse, token
    if info.family == "pso":
        return float("nan"), False, "-"
    return alpha_at(base, n), False, "-"


# --- single run --------------------------------------------------------------

def run_single(objective: ObjectiveFunction, tag: str, *, swarm_size: int,
               iterations: int, rng: np.random.Generator, run_index: int = 0,
               checkpoint_stride: int = 10, boundary: str = "clamp",
               params: dict | None = None) -> RunResult:
    """Execute one run of ``tag`` and collect its checkpoint trace.

    Raises :class:`EvaluationError` if an objective evaluation fails; the
    campaign level turns that into a recorded failure.
    """
    if tag not in VARIANTS:
        raise ConfigError(f"unknown algorithm {tag!r}")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    info = VARIANTS[tag]
    params = dict(params or {})
    schedule = None if info.family == "pso" else _base_schedule(info, params, iterations or 1)
    pso = _pso_params(info, params, objective, iterations or 1) if info.family == "pso" else None
    reevaluate = bool(params.get("reevaluate_after_collapse", False))

    state = initialize_swarm(objective, swarm_size, rng, with_velocity=info.family == "pso")
    diagonal = domain_diagonal(objective)
    init = sample_diversities(state, diagonal)
    policy = _build_policy(info, params, iterations or 1, schedule, init.d_X)

    records = [TraceRecord(run_index, 0, init.best_f, init.d_X, init.d_P,
                           init.s_X, init.s_P, float("nan"),
                           "1" if info.control == "tdc" else "-")]
    k = checkpoint_stride
    for t in range(1, iterations + 1):
        emit = (t % k == 0) or (t == iterations)
        if emit:
            div = sample_diversities(state, diagonal)
            d_x = div.d_X
        else:
            div = None
            d_x = distance_to_average(state.X, diagonal)
        alpha, collapse, token = _decide(info, policy, schedule, d_x, t, iterations)
        if info.family == "qpso2":
            qpso_step_type2(state, objective, alpha, rng, boundary)
        elif info.family == "qpso1":
            qpso_step_type1(state, objective, alpha, rng, boundary)
        else:
            classical_pso_step(state, objective, pso, t, rng, boundary)
        if collapse:
            apply_pbest_collapse(state, rng, objective=objective if reevaluate else None,
                                 reevaluate=reevaluate)
        if emit:
            records.append(TraceRecord(run_index, t, float(state.fP[state.g]),
                                       div.d_X, div.d_P, div.s_X, div.s_P, alpha, token))
    return RunResult(tag, run_index, float(state.fP[state.g]), tuple(records))


# --- objective resolution ------------------------------------------------------

def resolve_objective(config: ExperimentConfig) -> ObjectiveFunction:
    """Build the (possibly shifted/rotated) objective a campaign optimizes."""
    spec = config.objective
    base = make_objective(spec.id, spec.dimension, lower=spec.lower, upper=spec.upper)
    seed = config.seed if spec.transform_seed is None else spec.transform_seed

    if spec.shift == "none":
        shift = None
    elif spec.shift == "random":
        shift = random_shift(base.lower, base.upper, derive_rng(seed, "shift"))
    else:
        shift = load_vector(spec.shift, base.dimension)

    if spec.rotation == "none":
        rotation = None
    elif spec.rotation == "random":
        rotation = random_orthogonal(base.dimension, derive_rng(seed, "rotation"))
    else:
        rotation = load_matrix(spec.rotation, base.dimension)

    if shift is None and rotation is None and spec.bias == 0.0:
        return base
    return make_shifted_rotated(base, shift=shift, rotation=rotation, bias=spec.bias)


def run_from_config(config: ExperimentConfig, tag: str, run_index: int,
                    objective: ObjectiveFunction | None = None) -> RunResult:
    """Resolve the objective and stream for (tag, run_index) and run it."""
    if tag not in config.algorithms:
        raise ConfigError(f"algorithm {tag!r} is not in the configured list")
    if objective is None:
        objective = resolve_objective(config)
    return run_single(
        objective, tag,
        swarm_size=config.swarm_size,
        iterations=config.iterations,
        rng=derive_rng(config.seed, tag, run_index),
        run_index=run_index,
        checkpoint_stride=config.checkpoint_stride,
        boundary=config.boundary,
        params=config.algorithm_params.get(tag, {}),
    )


# --- trace and index I/O -------------------------------------------------------

def write_trace(stream, records) -> None:
    stream.write(TRACE_HEADER + "\n")
    for r in records:
        stream.write(",".join((
            str(r.run), str(r.n), format_float(r.best_f), format_float(r.d_X),
            format_float(r.d_P), format_float(r.s_X), format_float(r.s_P),
            format_float(r.alpha), r.phase,
        )) + "\n")


def write_trace_file(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_trace(fh, records)


def read_trace(path) -> list[TraceRecord]:
    path = Path(path)
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != TRACE_HEADER:
            raise ValueError(f"{path}:1: bad trace header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != 9:
                raise ValueError(f"{path}:{lineno}: expected 9 fields, got {len(parts)}")
            try:
                records.append(TraceRecord(
                    run=int(parts[0]), n=int(parts[1]), best_f=float(parts[2]),
                    d_X=float(parts[3]), d_P=float(parts[4]), s_X=float(parts[5]),
                    s_P=float(parts[6]), alpha=float(parts[7]), phase=parts[8],
                ))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return records


def trace_path(out_dir, tag: str, run_index: int) -> Path:
    return Path(out_dir) / "traces" / f"{tag}__run{run_index:03d}.csv"


# --- campaign -----------------------------------------------------------------

def _campaign_task(payload) -> tuple[str, int, str, float, tuple, str]:
    objective, tag, run_index, config = payload
    try:
        result = run_from_config(config, tag, run_index, objective=objective)
        return (tag, run_index, "ok", result.final_best, result.records, "")
    except EvaluationError as exc:
        return (tag, run_index, "failed", float("nan"), (), str(exc))


def run_campaign(config: ExperimentConfig, out_dir=None, jobs: int = 1) -> CampaignResult:
    """Run every (algorithm, run index) cell and persist the trace archive.

    Layout: ``results.csv`` (one row per run), ``traces/`` (one CSV per
    successful run), ``meta.json`` (timestamps and provenance). Failed runs
    keep their index row, carry the diagnostic, and leave no trace file.
    """
    out = Path(out_dir) if out_dir is not None else (
        Path(config.out_dir) if config.out_dir else None)
    if out is None:
        raise ConfigError("no output directory: set output.dir or pass out_dir")
    objective = resolve_objective(config)
    tasks = [(objective, tag, r, config)
             for tag in config.algorithms for r in range(config.runs)]

    started = time.time()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_campaign_task, tasks, chunksize=1))
    else:
        raw = [_campaign_task(t) for t in tasks]
    # deterministic order regardless of scheduling
    order = {tag: i for i, tag in enumerate(config.algorithms)}
    raw.sort(key=lambda r: (order[r[0]], r[1]))

    (out / "traces").mkdir(parents=True, exist_ok=True)
    outcomes = []
    lines = [RESULTS_HEADER]
    for tag, run_index, status, final_best, records, error in raw:
        if status == "ok":
            write_trace_file(trace_path(out, tag, run_index), records)
            lines.append(f"{tag},{run_index},ok,{format_float(final_best)},")
        else:
            lines.append(f"{tag},{run_index},failed,,{error.replace(',', ';')}")
        outcomes.append(RunOutcome(tag, run_index, status, final_best, error))
    with open(out / "results.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")

    meta = {
        "package": "swarmdiv",
        "version": __version__,
        "created_unix": started,
        "elapsed_seconds": time.time() - started,
        "objective": config.objective.id,
        "dimension": config.objective.dimension,
        "algorithms": config.algorithms,
        "runs": config.runs,
        "iterations": config.iterations,
        "seed": config.seed,
    }
    with open(out / "meta.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return CampaignResult(out_dir=out, outcomes=tuple(outcomes))


def read_results_index(archive) -> list[RunOutcome]:
    """Parse ``results.csv`` from a campaign archive."""
    path = Path(archive) / "results.csv"
    outcomes = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if header != RESULTS_HEADER:
                raise ValueError(f"{path}:1: bad results header {header!r}")
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split(",", 4)
                if len(parts) != 5:
                    raise ValueError(f"{path}:{lineno}: expected 5 fields")
                tag, run_s, status, final_s, error = parts
                if status not in ("ok", "failed"):
                    raise ValueError(f"{path}:{lineno}: bad status {status!r}")
                final = float(final_s) if final_s else float("nan")
                outcomes.append(RunOutcome(tag, int(run_s), status, final, error))
    except OSError as exc:
        raise ValueError(f"cannot read results index: {exc}") from None
    return outcomes
