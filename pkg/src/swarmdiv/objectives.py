"""Benchmark objectives, search domains, and shift/rotation wrappers.

Every objective is a minimization problem over a box-bounded real vector.
The registry maps string ids to scalable benchmark families with their
customary domains; shifted/rotated variants are built with
:func:`make_shifted_rotated`, either from whitespace-separated data files
or from seeded synthesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "ObjectiveError",
    "ObjectiveFunction",
    "REGISTRY",
    "register_benchmark",
    "registered_benchmarks",
    "make_objective",
    "make_shifted_rotated",
    "domain_diagonal",
    "load_vector",
    "load_matrix",
    "random_shift",
    "random_orthogonal",
]

Evaluator = Callable[[np.ndarray], float]


class ObjectiveError(ValueError):
    """Invalid objective construction or evaluation input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ObjectiveFunction:
    """A box-bounded minimization target.

    Instances are immutable after construction, so a single objective can be
    evaluated from several worker processes without coordination.
    """

    id: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Evaluator

    def __post_init__(self):
        if self.dimension < 1:
            raise ObjectiveError(f"dimension must be >= 1, got {self.dimension}")
        lower = _frozen(np.broadcast_to(np.asarray(self.lower, float), (self.dimension,)))
        upper = _frozen(np.broadcast_to(np.asarray(self.upper, float), (self.dimension,)))
        if not np.all(lower < upper):
            raise ObjectiveError("each lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def evaluate(self, x) -> float:
        """Evaluate at ``x`` (length-``dimension`` finite vector)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ObjectiveError(
                f"{self.id}: expected shape ({self.dimension},), got {x.shape}"
            )
        if not np.isfinite(x).all():
            raise ObjectiveError(f"{self.id}: non-finite input coordinate")
        return float(self.evaluator(x))


# --- benchmark family evaluators ------------------------------------------

def sphere(x: np.ndarray) -> float:
    # sum x_i^2
    return float(x @ x)


def rosenbrock(x: np.ndarray) -> float:
    # sum 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1.0) ** 2))


def rastrigin(x: np.ndarray) -> float:
    # sum x_i^2 - 10 cos(2 pi x_i) + 10, minimum 0 at the origin
    return float(np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x) + 10.0))


def rastrigin_offset(x: np.ndarray) -> float:
    # sum x_i^2 - 10 cos(2 pi x_i) - 10, minimum -20 N at the origin
    return float(np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x) - 10.0))


def griewank(x: np.ndarray) -> float:
    # sum x_i^2 / 4000 - prod cos(x_i / sqrt(i)) + 1
    idx = np.arange(1, x.size + 1, dtype=float)
    return float(np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(idx))) + 1.0)


@dataclass(frozen=True)
class BenchmarkEntry:
    evaluator: Evaluator
    lower: float
    upper: float
    note: str


REGISTRY: dict[str, BenchmarkEntry] = {
    "sphere": BenchmarkEntry(sphere, -100.0, 100.0, "sum of squares"),
    "rosenbrock": BenchmarkEntry(rosenbrock, -30.0, 30.0, "banana valley"),
    "rastrigin": BenchmarkEntry(rastrigin, -5.12, 5.12, "multimodal, minimum 0"),
    "rastrigin_table1": BenchmarkEntry(
        rastrigin_offset, -5.12, 5.12, "offset form with -10 per term, minimum -20N"
    ),
    "griewank": BenchmarkEntry(griewank, -600.0, 600.0, "product-of-cosines ripple"),
}


def register_benchmark(name: str, evaluator: Evaluator, lower: float, upper: float,
                       note: str = "") -> None:
    """Add a benchmark family to the registry (e.g. for custom experiments)."""
    if name in REGISTRY:
        raise ObjectiveError(f"benchmark {name!r} already registered")
    REGISTRY[name] = BenchmarkEntry(evaluator, float(lower), float(upper), note)


def registered_benchmarks() -> list[str]:
    return sorted(REGISTRY)


def make_objective(name: str, dimension: int, lower: float | None = None,
                   upper: float | None = None) -> ObjectiveFunction:
    """Instantiate a registered benchmark at the given dimension.

    ``lower``/``upper`` override the customary domain (both or neither).
    """
    if name not in REGISTRY:
        raise ObjectiveError(
            f"unknown benchmark {name!r}; registered: {', '.join(registered_benchmarks())}"
        )
    if (lower is None) != (upper is None):
        raise ObjectiveError("domain override needs both lower and upper")
    entry = REGISTRY[name]
    lo = entry.lower if lower is None else float(lower)
    hi = entry.upper if upper is None else float(upper)
    return ObjectiveFunction(name, int(dimension), np.full(dimension, lo),
                             np.full(dimension, hi), entry.evaluator)


# --- shift / rotation wrapper ---------------------------------------------

@dataclass(frozen=True)
class _Transformed:
    """Picklable evaluator computing base(rotation @ (x - shift)) + bias."""

    base: Evaluator
    shift: np.ndarray
    rotation: np.ndarray | None
    bias: float

    def __call__(self, x: np.ndarray) -> float:
        z = x - self.shift
        if self.rotation is not None:
            z = self.rotation @ z
        return self.base(z) + self.bias


def make_shifted_rotated(base: ObjectiveFunction, shift=None, rotation=None,
                         bias: float = 0.0) -> ObjectiveFunction:
    """Wrap ``base`` as base(Q (x - o)) + b with an orthogonal Q.

    ``shift`` defaults to the zero vector and must lie inside the base
    domain; ``rotation`` defaults to the identity (``None`` skips the matrix
    product entirely). Bounds are inherited from ``base`` unchanged.
    """
    n = base.dimension
    if shift is None:
        o = np.zeros(n)
    else:
        o = np.asarray(shift, dtype=float)
        if o.shape != (n,):
            raise ObjectiveError(f"shift must have shape ({n},), got {o.shape}")
        if np.any(o < base.lower) or np.any(o > base.upper):
            raise ObjectiveError("shift lies outside the base domain")
    q = None
    if rotation is not None:
        q = np.asarray(rotation, dtype=float)
        if q.shape != (n, n):
            raise ObjectiveError(f"rotation must have shape ({n}, {n}), got {q.shape}")
        defect = np.max(np.abs(q.T @ q - np.eye(n)))
        if defect > 1e-9:
            raise ObjectiveError(f"rotation is not orthogonal (defect {defect:.3e})")
        q = _frozen(q)
    wrapped = _Transformed(base.evaluator, _frozen(o), q, float(bias))
    return ObjectiveFunction(base.id + "-transformed", n, base.lower, base.upper, wrapped)


def domain_diagonal(f: ObjectiveFunction) -> float:
    """Euclidean length of the search box diagonal, sqrt(sum (up - lo)^2)."""
    span = f.upper - f.lower
    return float(np.sqrt(span @ span))


# --- shift / rotation sources ----------------------------------------------

def load_vector(path, dimension: int) -> np.ndarray:
    """Read a shift vector: ``dimension`` reals as whitespace-separated tokens."""
    tokens = Path(path).read_text().split()
    if len(tokens) < dimension:
        raise ObjectiveError(f"{path}: expected {dimension} values, found {len(tokens)}")
    return np.array([float(t) for t in tokens[:dimension]])


def load_matrix(path, dimension: int) -> np.ndarray:
    """Read a row-major ``dimension`` x ``dimension`` matrix of tokens."""
    tokens = Path(path).read_text().split()
    need = dimension * dimension
    if len(tokens) < need:
        raise ObjectiveError(f"{path}: expected {need} values, found {len(tokens)}")
    vals = np.array([float(t) for t in tokens[:need]])
    return vals.reshape(dimension, dimension)


def random_shift(lower: np.ndarray, upper: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform shift in the central 80% of the box (keeps the optimum interior)."""
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    margin = 0.1 * (upper - lower)
    return rng.uniform(lower + margin, upper - margin)


def random_orthogonal(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a Gaussian matrix.

    Column signs are fixed from the diagonal of R so the result is a
    deterministic function of the generator state.
    """
    a = rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))
