"""Box-constrained CMA-ES over the trajectory parameters.

The search runs in coordinates rescaled affinely so every parameter's range
maps to ``[0, 1]``; one scalar step size then means the same thing for
degrees, radians and hertz. Samples are drawn unconstrained, clamped to the
box for evaluation, and the *raw* samples drive the update.

Update rules and default constants follow Hansen's CMA-ES tutorial
(rank-one plus rank-mu covariance update, cumulative step-size adaptation,
positive recombination weights).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllCandidatesFailed, OutOfBounds, SchemaMismatch
from .fitness import FitnessValue
from .kinematics import (
    CONVERGENCE_THRESHOLDS,
    LOWER_BOUNDS,
    UPPER_BOUNDS,
    TrajectoryParams,
    validate,
)

SNAPSHOT_SCHEMA = "flapfin.cmaes-state"
SNAPSHOT_VERSION = "1.0"
EIGENVALUE_FLOOR = 1e-14
DEFAULT_SIGMA0 = 0.3


def default_popsize(n: int) -> int:
    return 4 + int(math.floor(3.0 * math.log(n)))


@dataclass(frozen=True)
class Strategy:
    """Constants derived from dimension and population size."""

    n: int
    popsize: int
    mu: int
    weights: np.ndarray
    mueff: float
    cc: float
    cs: float
    c1: float
    cmu: float
    damps: float
    chi_n: float

    @classmethod
    def default(cls, n: int, popsize: int) -> "Strategy":
        mu = popsize // 2
        w = math.log((popsize + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        w = w / w.sum()
        mueff = 1.0 / float(np.sum(w ** 2))
        cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n)
        cs = (mueff + 2.0) / (n + mueff + 5.0)
        c1 = 2.0 / ((n + 1.3) ** 2 + mueff)
        cmu = min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) ** 2 + mueff))
        damps = 1.0 + 2.0 * max(0.0, math.sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + cs
        chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
        weights = np.zeros(popsize)
        weights[:mu] = w
        return cls(n, popsize, mu, weights, mueff, cc, cs, c1, cmu, damps, chi_n)


@dataclass
class CmaesState:
    """Complete optimizer state; everything needed to continue a run."""

    mean: np.ndarray  # rescaled coordinates
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int
    popsize: int
    rng_state: dict
    lower: np.ndarray = field(default_factory=lambda: LOWER_BOUNDS.copy())
    upper: np.ndarray = field(default_factory=lambda: UPPER_BOUNDS.copy())
    thresholds: np.ndarray = field(default_factory=lambda: CONVERGENCE_THRESHOLDS.copy())
    pending: np.ndarray | None = None  # raw samples of the last ask, awaiting tell

    @property
    def n(self) -> int:
        return len(self.mean)

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def to_params(self, z) -> TrajectoryParams:
        return TrajectoryParams.from_array(self.lower + np.clip(z, 0.0, 1.0) * self.span)

    def to_unit(self, values) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.lower) / self.span

    @property
    def mean_params(self) -> TrajectoryParams:
        return self.to_params(self.mean)

    def spread(self) -> np.ndarray:
        """Per-parameter standard deviation ``sigma sqrt(C_ii)`` in parameter units."""
        return self.sigma * np.sqrt(np.diag(self.C)) * self.span

    def copy(self) -> "CmaesState":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class Candidate:
    index: int
    raw: np.ndarray  # rescaled, unclamped
    params: TrajectoryParams


def init(initialization: TrajectoryParams, seed: int, popsize: int | None = None,
         sigma0: float = DEFAULT_SIGMA0, lower=None, upper=None, thresholds=None) -> CmaesState:
    """Start a search centred on ``initialization``.

    The initial covariance is diagonal with standard deviation a quarter of
    each parameter's range (``1/4`` in rescaled units).
    """
    lower = LOWER_BOUNDS.copy() if lower is None else np.asarray(lower, dtype=float)
    upper = UPPER_BOUNDS.copy() if upper is None else np.asarray(upper, dtype=float)
    thresholds = CONVERGENCE_THRESHOLDS.copy() if thresholds is None else np.asarray(thresholds, dtype=float)
    x0 = initialization.to_array()
    if np.any(x0 < lower) or np.any(x0 > upper):
        report = validate(initialization)
        raise OutOfBounds(f"initialization outside the box: {report.violations or 'custom bounds'}")
    n = len(x0)
    popsize = default_popsize(n) if popsize is None else int(popsize)
    if popsize < 2:
        raise ValueError("popsize must be at least 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    return CmaesState(
        mean=(x0 - lower) / (upper - lower),
        sigma=float(sigma0),
        C=np.eye(n) / 16.0,
        p_sigma=np.zeros(n),
        p_c=np.zeros(n),
        generation=0,
        popsize=popsize,
        rng_state=rng.bit_generator.state,
        lower=lower,
        upper=upper,
        thresholds=thresholds,
    )


def _eigen(C):
    d2, B = np.linalg.eigh(C)
    return np.sqrt(np.maximum(d2, 0.0)), B


def ask(state: CmaesState) -> list[Candidate]:
    """Draw ``popsize`` candidates from ``N(mean, sigma^2 C)``.

    Advances the generator stored in ``state`` and remembers the raw samples
    for the following :func:`tell`.
    """
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = state.rng_state
    z = rng.standard_normal((state.popsize, state.n))
    state.rng_state = rng.bit_generator.state
    D, B = _eigen(state.C)
    raw = state.mean + state.sigma * (z * D) @ B.T
    state.pending = raw
    return [Candidate(i, raw[i].copy(), state.to_params(raw[i])) for i in range(state.popsize)]


def _rank_weights(fitnesses: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Recombination weight per candidate; tied candidates share their ranks' weights."""
    order = np.argsort(fitnesses, kind="stable")
    w = np.empty_like(weights)
    sorted_f = fitnesses[order]
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and sorted_f[stop] == sorted_f[start]:
            stop += 1
        w[order[start:stop]] = weights[start:stop].mean()
        start = stop
    return w


def replace_failures(fitnesses) -> np.ndarray:
    """Replace non-finite entries by the worst finite fitness of the generation."""
    f = np.array([np.nan if v is None else float(v) for v in fitnesses], dtype=float)
    finite = np.isfinite(f)
    if not finite.any():
        raise AllCandidatesFailed("every candidate of the generation failed")
    f[~finite] = f[finite].max()
    return f


def tell(state: CmaesState, fitnesses) -> CmaesState:
    """Update the distribution from the fitnesses of the last :func:`ask`.

    Returns a new state; the input is left untouched. Failed evaluations may be
    passed as ``None`` or ``nan``.
    """
    if state.pending is None:
        raise RuntimeError("tell() called without a preceding ask()")
    f = replace_failures(fitnesses)
    if len(f) != state.popsize:
        raise ValueError(f"expected {state.popsize} fitness values, got {len(f)}")

    new = state.copy()
    new.pending = None
    new.generation = state.generation + 1
    if np.all(f == f[0]):
        # no ranking information
        return new

    s = Strategy.default(state.n, state.popsize)
    w = _rank_weights(f, s.weights)
    y = (state.pending - state.mean) / state.sigma
    y_w = w @ y

    # a step blocked by the box is not progress; paths see the clamped shift
    mean = np.clip(state.mean + state.sigma * y_w, 0.0, 1.0)
    y_w = (mean - state.mean) / state.sigma

    D, B = _eigen(state.C)
    inv_sqrt_C = B @ np.diag(1.0 / np.maximum(D, math.sqrt(EIGENVALUE_FLOOR))) @ B.T
    p_sigma = (1.0 - s.cs) * state.p_sigma + math.sqrt(s.cs * (2.0 - s.cs) * s.mueff) * (inv_sqrt_C @ y_w)
    norm_ps = float(np.linalg.norm(p_sigma))
    h_sigma = norm_ps / math.sqrt(1.0 - (1.0 - s.cs) ** (2 * new.generation)) < (1.4 + 2.0 / (s.n + 1)) * s.chi_n
    p_c = (1.0 - s.cc) * state.p_c
    if h_sigma:
        p_c = p_c + math.sqrt(s.cc * (2.0 - s.cc) * s.mueff) * y_w
    delta_h = 0.0 if h_sigma else s.cc * (2.0 - s.cc)

    rank_mu = (y * w[:, None]).T @ y
    C = ((1.0 - s.c1 - s.cmu * w.sum() + s.c1 * delta_h) * state.C
         + s.c1 * np.outer(p_c, p_c)
         + s.cmu * rank_mu)
    sigma = state.sigma * math.exp((s.cs / s.damps) * (norm_ps / s.chi_n - 1.0))

    new.mean = mean
    new.p_sigma = p_sigma
    new.p_c = p_c
    new.C = repair_covariance(C)
    new.sigma = sigma
    return new


def repair_covariance(C: np.ndarray) -> np.ndarray:
    C = 0.5 * (C + C.T)
    d2, B = np.linalg.eigh(C)
    d2 = np.maximum(d2, EIGENVALUE_FLOOR)
    C = (B * d2) @ B.T
    return 0.5 * (C + C.T)


@dataclass(frozen=True)
class Convergence:
    flags: np.ndarray
    spread: np.ndarray

    @property
    def all(self) -> bool:
        return bool(np.all(self.flags))

    def __bool__(self):
        return self.all


def converged(state: CmaesState) -> Convergence:
    """Per-parameter test ``sigma sqrt(C_ii) < threshold`` in parameter units."""
    spread = state.spread()
    return Convergence(flags=spread < state.thresholds, spread=spread)


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def snapshot(state: CmaesState) -> dict:
    """Versioned, JSON-serialisable copy of ``state``."""
    return {
        "schema": SNAPSHOT_SCHEMA,
        "version": SNAPSHOT_VERSION,
        "mean": state.mean.tolist(),
        "sigma": state.sigma,
        "C": state.C.tolist(),
        "p_sigma": state.p_sigma.tolist(),
        "p_c": state.p_c.tolist(),
        "generation": state.generation,
        "popsize": state.popsize,
        "rng_state": copy.deepcopy(state.rng_state),
        "lower": state.lower.tolist(),
        "upper": state.upper.tolist(),
        "thresholds": state.thresholds.tolist(),
        "pending": None if state.pending is None else state.pending.tolist(),
    }


def restore(blob: dict) -> CmaesState:
    if blob.get("schema") != SNAPSHOT_SCHEMA:
        raise SchemaMismatch(f"not an optimizer snapshot: {blob.get('schema')!r}")
    major = str(blob.get("version", "")).split(".")[0]
    if major != SNAPSHOT_VERSION.split(".")[0]:
        raise SchemaMismatch(f"snapshot version {blob.get('version')!r} incompatible with {SNAPSHOT_VERSION}")
    arr = lambda k: np.asarray(blob[k], dtype=float)  # noqa: E731
    return CmaesState(
        mean=arr("mean"),
        sigma=float(blob["sigma"]),
        C=arr("C"),
        p_sigma=arr("p_sigma"),
        p_c=arr("p_c"),
        generation=int(blob["generation"]),
        popsize=int(blob["popsize"]),
        rng_state=copy.deepcopy(blob["rng_state"]),
        lower=arr("lower"),
        upper=arr("upper"),
        thresholds=arr("thresholds"),
        pending=None if blob.get("pending") is None else arr("pending"),
    )


def reseed(state: CmaesState, seed: int) -> CmaesState:
    """Copy of ``state`` whose sampling stream restarts from ``seed``."""
    new = state.copy()
    new.rng_state = np.random.Generator(np.random.PCG64(seed)).bit_generator.state
    return new


# ---------------------------------------------------------------------------
# generation records
# ---------------------------------------------------------------------------

@dataclass
class CandidateResult:
    index: int
    raw: np.ndarray
    params: TrajectoryParams
    fitness: FitnessValue | None
    summary: dict | None = None
    error: str | None = None

    @property
    def f(self) -> float:
        return math.inf if self.fitness is None else self.fitness.f

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "raw": self.raw.tolist(),
            "params": self.params.to_dict(),
            "fitness": None if self.fitness is None else self.fitness.to_dict(),
            "summary": self.summary,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateResult":
        fit = data.get("fitness")
        return cls(
            index=int(data["index"]),
            raw=np.asarray(data["raw"], dtype=float),
            params=TrajectoryParams.from_dict(data["params"]),
            fitness=None if fit is None else FitnessValue(**fit),
            summary=data.get("summary"),
            error=data.get("error"),
        )


@dataclass
class GenerationRecord:
    generation: int
    candidates: list[CandidateResult]
    spread: np.ndarray
    converged_flags: np.ndarray

    @property
    def best_index(self) -> int:
        return select_optimum(self).index

    @property
    def fitnesses(self) -> np.ndarray:
        return np.array([c.f for c in self.candidates])

    def to_dict(self) -> dict:
        return {
            "generation": self.generation,
            "candidates": [c.to_dict() for c in self.candidates],
            "spread": self.spread.tolist(),
            "converged": [bool(v) for v in self.converged_flags],
            "best_index": self.best_index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationRecord":
        return cls(
            generation=int(data["generation"]),
            candidates=[CandidateResult.from_dict(c) for c in data["candidates"]],
            spread=np.asarray(data["spread"], dtype=float),
            converged_flags=np.asarray(data["converged"], dtype=bool),
        )


def select_optimum(final_generation: GenerationRecord) -> CandidateResult:
    """Lowest-fitness candidate of this generation; ties go to the lowest index."""
    if not final_generation.candidates:
        raise ValueError("generation has no candidates")
    return min(final_generation.candidates, key=lambda c: (c.f, c.index))
