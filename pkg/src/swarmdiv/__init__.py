"""Quantum-behaved particle swarm optimization with diversity control.

Library layout:

* :mod:`swarmdiv.objectives` - benchmark functions, domains, shift/rotation
* :mod:`swarmdiv.swarm` - swarm state and one-iteration steppers
* :mod:`swarmdiv.diversity` - distance and entropy diversity measures
* :mod:`swarmdiv.control` - diversity-driven coefficient control policies
* :mod:`swarmdiv.stats` - rank correlation, Welch tests, campaign summaries
* :mod:`swarmdiv.runner` - single runs, campaigns, trace archives
* :mod:`swarmdiv.analyze` - report generation (CSV, text, figures)
* :mod:`swarmdiv.cli` - the ``swarmdiv`` command line tool
"""

__version__ = "0.1.0"

from .control import (CONVERGENCE_THRESHOLD, CdsPolicy, TdcPolicy, apply_pbest_collapse,
                      cds_decide, cds_desired, cds_upper, tdc_decide)
from .diversity import DiversitySample, distance_to_average, fitness_entropy, sample_diversities
from .objectives import (ObjectiveError, ObjectiveFunction, domain_diagonal, make_objective,
                         make_shifted_rotated, register_benchmark, registered_benchmarks)
from .stats import (CheckpointSeries, ComparisonReport, CorrelationRecord, StatsError,
                    TTestResult, fitness_diversity_correlations, rank_algorithms, spearman,
                    summarize, unpaired_t_test)
from .swarm import (ClassicalPsoParams, CoefficientSchedule, EvaluationError, SwarmState,
                    alpha_at, classical_pso_step, derive_rng, initialize_swarm, local_focus,
                    mean_best, qpso_step_type1, qpso_step_type2, select_gbest, update_pbest)

__all__ = [
    "__version__",
    "CONVERGENCE_THRESHOLD", "CdsPolicy", "TdcPolicy", "apply_pbest_collapse",
    "cds_decide", "cds_desired", "cds_upper", "tdc_decide",
    "DiversitySample", "distance_to_average", "fitness_entropy", "sample_diversities",
    "ObjectiveError", "ObjectiveFunction", "domain_diagonal", "make_objective",
    "make_shifted_rotated", "register_benchmark", "registered_benchmarks",
    "CheckpointSeries", "ComparisonReport", "CorrelationRecord", "StatsError",
    "TTestResult", "fitness_diversity_correlations", "rank_algorithms", "spearman",
    "summarize", "unpaired_t_test",
    "ClassicalPsoParams", "CoefficientSchedule", "EvaluationError", "SwarmState",
    "alpha_at", "classical_pso_step", "derive_rng", "initialize_swarm", "local_focus",
    "mean_best", "qpso_step_type1", "qpso_step_type2", "select_gbest", "update_pbest",
]
