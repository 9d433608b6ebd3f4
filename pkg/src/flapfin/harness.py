"""Run orchestration: configuration, the optimize/snapshot/branch protocol,
persistence of generation logs and snapshots, and report export.

On-disk layout of a run ``<root>/<run_id>/``::

    config.json          the run configuration (plus lineage for branches)
    log.jsonl            one generation record per line
    snapshots/gen_NNNNN.json   optimizer state after generation NNNNN
    status.json          termination reason, written when the run ends
    optimum.json         full record of the final generation's best candidate
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import analysis
from . import optimizer as opt
from .errors import ConfigError, FlapfinError, MissingSnapshot, SchemaMismatch
from .fitness import FitnessValue, Mode, Objective, fitness, objective_force
from .kinematics import PARAMETER_NAMES, TrajectoryParams
from .plant import CycleRecord, DamageState, PlantConfig, apply_damage, evaluate
from .reference import INITIALIZATIONS

log = logging.getLogger(__name__)

LOG_SCHEMA = "flapfin.generation"
LOG_VERSION = "1.0"
CONFIG_SCHEMA = "flapfin.run-config"
CONFIG_VERSION = "1.0"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerSettings:
    seed: int = 0
    popsize: int | None = None
    sigma0: float = opt.DEFAULT_SIGMA0
    max_generations: int = 300
    initialization: str | dict = "thrust"

    def initial_params(self) -> TrajectoryParams:
        if isinstance(self.initialization, str):
            try:
                return INITIALIZATIONS[self.initialization]
            except KeyError:
                raise ConfigError(f"unknown initialization {self.initialization!r}") from None
        return TrajectoryParams.from_dict(self.initialization)


@dataclass(frozen=True)
class EvaluationSettings:
    n_runs: int = 3
    n_cycles: int = 6
    n_samples: int = 360
    grid_size: int = 360


@dataclass(frozen=True)
class Schedule:
    snapshot_every: int = 1
    # generations a resumed branch runs before convergence may stop it
    branch_warmup: int = 10


@dataclass(frozen=True)
class Lineage:
    parent: str
    at_generation: int
    # restart the snapshot's sampling stream from this seed (None keeps it)
    sampling_seed: int | None = None


@dataclass(frozen=True)
class RunConfig:
    name: str = "run"
    objective: Objective = field(default_factory=Objective)
    plant: PlantConfig = field(default_factory=PlantConfig)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    schedule: Schedule = field(default_factory=Schedule)
    workers: int = 1
    lineage: Lineage | None = None

    def to_dict(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA,
            "version": CONFIG_VERSION,
            "name": self.name,
            "objective": self.objective.to_dict(),
            "plant": self.plant.to_dict(),
            "optimizer": dataclasses.asdict(self.optimizer),
            "evaluation": dataclasses.asdict(self.evaluation),
            "schedule": dataclasses.asdict(self.schedule),
            "workers": self.workers,
            "lineage": None if self.lineage is None else dataclasses.asdict(self.lineage),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        version = str(data.get("version", CONFIG_VERSION))
        if version.split(".")[0] != CONFIG_VERSION.split(".")[0]:
            raise ConfigError(f"unsupported config version {version!r}")
        known = {"schema", "version", "name", "objective", "plant", "optimizer",
                 "evaluation", "schedule", "workers", "lineage"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(
                name=str(data.get("name", "run")),
                objective=Objective(**data.get("objective", {})),
                plant=PlantConfig.from_dict(data.get("plant", {})),
                optimizer=OptimizerSettings(**data.get("optimizer", {})),
                evaluation=EvaluationSettings(**data.get("evaluation", {})),
                schedule=Schedule(**data.get("schedule", {})),
                workers=int(data.get("workers", 1)),
                lineage=None if data.get("lineage") is None else Lineage(**data["lineage"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.name or "/" in self.name:
            raise ConfigError(f"invalid run name {self.name!r}")
        self.optimizer.initial_params()
        ev = self.evaluation
        if ev.n_runs < 3:
            raise ConfigError("evaluation.n_runs must be at least 3")
        if ev.n_cycles < 4:
            raise ConfigError("evaluation.n_cycles must be at least 4")
        if ev.n_samples < 360:
            raise ConfigError("evaluation.n_samples must be at least 360")
        if self.optimizer.max_generations < 1:
            raise ConfigError("optimizer.max_generations must be positive")
        if self.schedule.snapshot_every < 1:
            raise ConfigError("schedule.snapshot_every must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    @property
    def hash(self) -> str:
        return config_hash(self.to_dict())

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


def config_hash(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=1))
    tmp.replace(path)


class RunStore:
    """Files of one run under ``<root>/<run_id>``."""

    def __init__(self, root, run_id: str):
        self.root = Path(root)
        self.run_id = run_id
        self.dir = self.root / run_id

    config_path = property(lambda self: self.dir / "config.json")
    log_path = property(lambda self: self.dir / "log.jsonl")
    status_path = property(lambda self: self.dir / "status.json")
    optimum_path = property(lambda self: self.dir / "optimum.json")
    snapshot_dir = property(lambda self: self.dir / "snapshots")

    def exists(self) -> bool:
        return self.config_path.exists()

    def snapshot_path(self, generation: int) -> Path:
        return self.snapshot_dir / f"gen_{generation:05d}.json"

    def save_snapshot(self, generation: int, state: opt.CmaesState) -> None:
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        _write_json(self.snapshot_path(generation), opt.snapshot(state))

    def load_snapshot(self, generation: int) -> opt.CmaesState:
        path = self.snapshot_path(generation)
        if not path.exists():
            raise MissingSnapshot(f"run {self.run_id!r} has no snapshot at generation {generation}")
        return opt.restore(json.loads(path.read_text()))

    def snapshot_generations(self) -> list[int]:
        if not self.snapshot_dir.exists():
            return []
        return sorted(int(p.stem.split("_")[1]) for p in self.snapshot_dir.glob("gen_*.json"))

    def load_config(self) -> RunConfig:
        if not self.exists():
            raise FlapfinError(f"no run {self.run_id!r} under {self.root}")
        return RunConfig.load(self.config_path)

    def read_log_lines(self, drop_torn_tail: bool = False) -> list[dict]:
        if not self.log_path.exists():
            return []
        raws = [r for r in self.log_path.read_text().splitlines() if r.strip()]
        lines = []
        for k, raw in enumerate(raws):
            try:
                entry = json.loads(raw)
            except json.JSONDecodeError:
                # a crash mid-write leaves at most one partial line at the end
                if drop_torn_tail and k == len(raws) - 1:
                    break
                raise SchemaMismatch(f"unreadable log line {k + 1} in {self.log_path}") from None
            if entry.get("schema") != LOG_SCHEMA or str(entry.get("version", "")).split(".")[0] != LOG_VERSION.split(".")[0]:
                raise SchemaMismatch(f"log entry schema {entry.get('schema')!r} v{entry.get('version')!r}")
            lines.append(entry)
        return lines

    def status(self) -> dict | None:
        if not self.status_path.exists():
            return None
        return json.loads(self.status_path.read_text())


@dataclass
class RunLog:
    """Generation records of one run, plus identity and lineage."""

    run_id: str
    config_hash: str
    records: list[opt.GenerationRecord]
    lineage: Lineage | None = None
    termination: str | None = None

    @property
    def schema_version(self) -> str:
        return LOG_VERSION

    @property
    def final(self) -> opt.GenerationRecord:
        return self.records[-1]

    def generations(self) -> list[int]:
        return [r.generation for r in self.records]


def load_log(root, run_id: str) -> RunLog:
    store = RunStore(root, run_id)
    cfg = store.load_config()
    lines = store.read_log_lines()
    for entry in lines:
        if entry["config_hash"] != cfg.hash:
            raise SchemaMismatch(f"log of {run_id!r} was written by a different configuration")
    records = [opt.GenerationRecord.from_dict(e["record"]) for e in lines]
    status = store.status()
    return RunLog(run_id, cfg.hash, records, cfg.lineage, None if status is None else status["termination"])


def load_history(root, run_id: str) -> list[opt.GenerationRecord]:
    """All generations of a run, following lineage back through its parents."""
    runlog = load_log(root, run_id)
    if runlog.lineage is None:
        return runlog.records
    parent = [r for r in load_history(root, runlog.lineage.parent) if r.generation <= runlog.lineage.at_generation]
    return parent + runlog.records


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def candidate_seed(noise_seed: int, generation: int, index: int) -> np.random.SeedSequence:
    """Noise stream of one candidate; independent of evaluation order."""
    return np.random.SeedSequence(noise_seed, spawn_key=(generation, index))


def evaluate_candidate(config: RunConfig, generation: int, cand: opt.Candidate
                       ) -> tuple[opt.CandidateResult, CycleRecord | None]:
    ev = config.evaluation
    try:
        record = evaluate(cand.params, config.plant, n_runs=ev.n_runs, n_cycles=ev.n_cycles,
                          n_samples=ev.n_samples, grid_size=ev.grid_size,
                          seed=candidate_seed(config.plant.noise.rng_seed, generation, cand.index))
        value = fitness(record, config.objective)
    except FlapfinError as exc:
        return opt.CandidateResult(cand.index, cand.raw, cand.params, None, None, f"{type(exc).__name__}: {exc}"), None
    return opt.CandidateResult(cand.index, cand.raw, cand.params, value, record.summary()), record


def _evaluate_job(args):
    config, generation, cand = args
    return evaluate_candidate(config, generation, cand)[0]


def _evaluate_generation(config: RunConfig, generation: int, candidates, pool) -> list[opt.CandidateResult]:
    jobs = [(config, generation, c) for c in candidates]
    if pool is None:
        return [_evaluate_job(j) for j in jobs]
    return list(pool.map(_evaluate_job, jobs))


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    run_id: str
    log: RunLog
    state: opt.CmaesState
    termination: str
    store: RunStore


def _log_entry(config_hash: str, record: opt.GenerationRecord) -> dict:
    return {"schema": LOG_SCHEMA, "version": LOG_VERSION, "config_hash": config_hash, "record": record.to_dict()}


def _start_state(config: RunConfig, store: RunStore) -> opt.CmaesState:
    gens = store.snapshot_generations()
    if gens:
        return store.load_snapshot(gens[-1])
    if config.lineage is not None:
        parent = RunStore(store.root, config.lineage.parent)
        state = parent.load_snapshot(config.lineage.at_generation)
        if config.lineage.sampling_seed is not None:
            state = opt.reseed(state, config.lineage.sampling_seed)
        return state
    o = config.optimizer
    return opt.init(o.initial_params(), seed=o.seed, popsize=o.popsize, sigma0=o.sigma0)


def run(config: RunConfig, root) -> RunResult:
    """Optimize until every parameter has converged or the generation cap is hit.

    Re-invoking on an interrupted run resumes from its last snapshot; the log
    is truncated to that snapshot first so the result equals an uninterrupted
    run. Branches (configs with a lineage) start from the parent's snapshot.
    """
    config.validate()
    store = RunStore(root, config.name)
    store.dir.mkdir(parents=True, exist_ok=True)
    if store.exists():
        if store.load_config().hash != config.hash:
            raise ConfigError(f"run {config.name!r} exists with a different configuration")
    else:
        _write_json(store.config_path, config.to_dict())

    status = store.status()
    if status is not None:
        state = store.load_snapshot(status["final_generation"])
        runlog = load_log(root, config.name)
        return RunResult(config.name, runlog, state, status["termination"], store)

    state = _start_state(config, store)
    # drop log lines written after the last snapshot
    kept = [e for e in store.read_log_lines(drop_torn_tail=True) if e["record"]["generation"] < state.generation]
    store.log_path.write_text("".join(_dump(e) + "\n" for e in kept))

    first = 0 if config.lineage is None else config.lineage.at_generation + 1
    warmup = 0 if config.lineage is None else config.schedule.branch_warmup
    cap = config.optimizer.max_generations
    chash = config.hash
    termination = "cap"

    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        with store.log_path.open("a") as fh:
            while state.generation < cap:
                g = state.generation
                candidates = opt.ask(state)
                results = _evaluate_generation(config, g, candidates, pool)
                try:
                    state = opt.tell(state, [r.fitness.f if r.fitness else None for r in results])
                except FlapfinError as exc:
                    raise type(exc)(f"run {config.name!r}, generation {g}: {exc}") from exc
                conv = opt.converged(state)
                record = opt.GenerationRecord(g, results, conv.spread, conv.flags)
                fh.write(_dump(_log_entry(chash, record)) + "\n")
                fh.flush()
                done = conv.all and state.generation - first >= warmup
                if done or state.generation >= cap or state.generation % config.schedule.snapshot_every == 0:
                    store.save_snapshot(g, state)
                log.info("%s gen %d median f %.4f", config.name, g, float(np.median(record.fitnesses)))
                if done:
                    termination = "converged"
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    runlog = load_log(root, config.name)
    if not runlog.records:
        raise FlapfinError(f"run {config.name!r} has no generations (cap reached before start)")
    final = runlog.final
    _write_optimum(config, store, final)
    _write_json(store.status_path, {"termination": termination, "final_generation": final.generation,
                                    "config_hash": chash})
    runlog.termination = termination
    return RunResult(config.name, runlog, state, termination, store)


def _write_optimum(config: RunConfig, store: RunStore, final: opt.GenerationRecord) -> None:
    best = opt.select_optimum(final)
    cand = opt.Candidate(best.index, best.raw, best.params)
    result, record = evaluate_candidate(config, final.generation, cand)
    _write_json(store.optimum_path, {
        "generation": final.generation,
        "candidate": best.index,
        "params": best.params.to_dict(),
        "fitness": None if result.fitness is None else result.fitness.to_dict(),
        "record": None if record is None else record.to_dict(),
    })


@dataclass(frozen=True)
class Optimum:
    run_id: str
    generation: int
    candidate: int
    params: TrajectoryParams
    fitness: FitnessValue | None
    record: CycleRecord | None


def load_optimum(root, run_id: str) -> Optimum:
    store = RunStore(root, run_id)
    if not store.optimum_path.exists():
        raise FlapfinError(f"run {run_id!r} has not finished")
    data = json.loads(store.optimum_path.read_text())
    return Optimum(
        run_id=run_id,
        generation=int(data["generation"]),
        candidate=int(data["candidate"]),
        params=TrajectoryParams.from_dict(data["params"]),
        fitness=None if data["fitness"] is None else FitnessValue(**data["fitness"]),
        record=None if data["record"] is None else CycleRecord.from_dict(data["record"]),
    )


# ---------------------------------------------------------------------------
# branch
# ---------------------------------------------------------------------------

def branch_config(parent: RunConfig, name: str, at_generation: int, damage: DamageState,
                  seed: int, sampling_seed: int | None = None) -> RunConfig:
    plant = parent.plant.with_damage(damage)
    plant = dataclasses.replace(plant, noise=dataclasses.replace(plant.noise, rng_seed=seed))
    return dataclasses.replace(parent, name=name, plant=plant,
                               lineage=Lineage(parent.name, at_generation, sampling_seed))


def branch(root, run_id: str, at_generation: int, damage: DamageState, n_branches: int,
           seeds: Sequence[int] | None = None, names: Sequence[str] | None = None,
           max_generations: int | None = None,
           sampling_seeds: Sequence[int] | None = None) -> list[RunResult]:
    """Resume ``n_branches`` copies of the state after ``at_generation`` on a new plant.

    Each branch gets its own evaluation noise seed from ``seeds``. By default
    the sampling stream is the snapshot's, so all branches draw the same first
    resumed generation; ``sampling_seeds`` restarts it per branch instead.
    """
    parent_store = RunStore(root, run_id)
    parent = parent_store.load_config()
    if not parent_store.snapshot_path(at_generation).exists():
        raise MissingSnapshot(f"run {run_id!r} has no snapshot at generation {at_generation}")
    if seeds is None:
        seeds = [parent.plant.noise.rng_seed + 1000 * (k + 1) for k in range(n_branches)]
    if len(seeds) != n_branches:
        raise ConfigError("need one seed per branch")
    if sampling_seeds is not None and len(sampling_seeds) != n_branches:
        raise ConfigError("need one sampling seed per branch")
    if names is None:
        names = [f"{run_id}-b{k + 1}" for k in range(n_branches)]
    results = []
    for k, (name, seed) in enumerate(zip(names, seeds)):
        sampling = None if sampling_seeds is None else int(sampling_seeds[k])
        cfg = branch_config(parent, name, at_generation, damage, int(seed), sampling)
        if max_generations is not None:
            cfg = dataclasses.replace(cfg, optimizer=dataclasses.replace(cfg.optimizer, max_generations=max_generations))
        results.append(run(cfg, root))
    return results


@dataclass
class DamageExperiment:
    intact: RunResult
    branch_generation: int
    branches: list[RunResult]


def damage_experiment(config: RunConfig, root, n_branches: int = 5, fraction: float = 0.442,
                      lead: int = 10, seeds: Sequence[int] | None = None) -> DamageExperiment:
    """Converge an intact fin, then branch damaged fins ``lead`` generations before convergence."""
    intact = run(config, root)
    if intact.termination != "converged":
        log.warning("intact run %s stopped by the generation cap", config.name)
    at = max(intact.log.final.generation - lead, 0)
    damage = apply_damage(config.plant.fin, fraction)
    branches = branch(root, config.name, at, damage, n_branches, seeds)
    return DamageExperiment(intact, at, branches)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def write_csv(path_or_buffer, rows: Sequence[dict]) -> None:
    """RFC-4180 CSV (CRLF line ends) with a header taken from the first row."""
    if not rows:
        raise ValueError("nothing to write")
    fields = list(rows[0].keys())
    for row in rows[1:]:
        fields += [k for k in row if k not in fields]

    def _emit(fh):
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)

    if isinstance(path_or_buffer, (str, Path)):
        with open(path_or_buffer, "w", newline="") as fh:
            _emit(fh)
    else:
        _emit(path_or_buffer)


def csv_text(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    write_csv(buf, rows)
    return buf.getvalue()


def path_rows(history: Iterable[opt.GenerationRecord], mode: Mode) -> tuple[list[dict], list[dict]]:
    """Per-candidate and per-generation-median optimization paths."""
    per_candidate, medians = [], []
    for rec in history:
        f_vals, forces, amps, freqs = [], [], [], []
        for c in rec.candidates:
            F = None if c.summary is None else objective_force(c.summary["mean_force"], mode)
            per_candidate.append({
                "generation": rec.generation,
                "candidate": c.index,
                "fitness": "" if c.fitness is None else c.fitness.f,
                "force": "" if F is None else F,
                "stroke_angle": c.params.stroke_angle,
                "frequency": c.params.frequency,
                "error": c.error or "",
            })
            if c.fitness is not None:
                f_vals.append(c.fitness.f)
                forces.append(F)
            amps.append(c.params.stroke_angle)
            freqs.append(c.params.frequency)
        medians.append({
            "generation": rec.generation,
            "median_fitness": float(np.median(f_vals)) if f_vals else "",
            "median_force": float(np.median(forces)) if forces else "",
            "median_stroke_angle": float(np.median(amps)),
            "median_frequency": float(np.median(freqs)),
            "all_converged": bool(np.all(rec.converged_flags)),
        })
    return per_candidate, medians


def optimum_row(opt_: Optimum, objective: Objective) -> dict:
    row = {"run": opt_.run_id, "objective": objective.mode.value, "generation": opt_.generation}
    row.update(opt_.params.to_dict())
    if opt_.fitness is not None:
        F = opt_.fitness.F_used
        row["force"] = F
        row["closeness_to_setpoint"] = (abs(F) - objective.f_target) / objective.f_target
        row["fitness"] = opt_.fitness.f
    return row


def analysis_record(opt_: Optimum, mode: Mode) -> CycleRecord:
    """The optimum's record in the frame its analysis uses (resultant frame for side force)."""
    if opt_.record is None:
        raise FlapfinError(f"optimum of {opt_.run_id!r} failed to evaluate")
    if mode is Mode.SIDE_FORCE:
        return analysis.rotate_to_resultant([opt_.record])[0][0]
    return opt_.record


def fourier_rows(opt_: Optimum, mode: Mode, n_modes: int = 5) -> list[dict]:
    rec = analysis_record(opt_, mode)
    signals = {"Fz": rec.force_trace[:, 2]} if mode is Mode.THRUST else {
        "Fx*": rec.force_trace[:, 0], "Fy*": rec.force_trace[:, 1]}
    signals["aoa"] = rec.aoa_trace
    rows = []
    for name, values in signals.items():
        spec = analysis.fourier(values, n_modes, phi=rec.phi_grid)
        for r in spec.rows():
            rows.append({"run": opt_.run_id, "signal": name, **r})
    return rows


def final_covariance(root, run_id: str) -> np.ndarray:
    store = RunStore(root, run_id)
    status = store.status()
    gen = status["final_generation"] if status else store.snapshot_generations()[-1]
    state = store.load_snapshot(gen)
    return state.sigma ** 2 * state.C


def classification_rows(root, run_ids: Sequence[str]) -> list[dict]:
    """Compare every branch in ``run_ids`` with its parent's optimum."""
    rows = []
    for rid in run_ids:
        cfg = RunStore(root, rid).load_config()
        if cfg.lineage is None:
            continue
        parent = load_optimum(root, cfg.lineage.parent)
        child = load_optimum(root, rid)
        force_change = ""
        if parent.fitness is not None and child.fitness is not None:
            rel = (abs(child.fitness.F_used) - abs(parent.fitness.F_used)) / cfg.objective.f_target
            force_change = "NoChange" if abs(rel) <= 0.02 else ("Increase" if rel > 0 else "Decrease")
        row = analysis.adaptation_rows([rid], parent.params, [child.params], force_change=[force_change])[0]
        row["parent"] = cfg.lineage.parent
        row["branch_generation"] = cfg.lineage.at_generation
        if parent.record is not None and child.record is not None:
            a = analysis.fourier(analysis_record(parent, cfg.objective.mode).aoa_trace, 1)
            b = analysis.fourier(analysis_record(child, cfg.objective.mode).aoa_trace, 1)
            row["aoa_mode1_phase_shift_deg"] = analysis.phase_difference(a.phase[0], b.phase[0])
            row["aoa_mode1_amplitude_change_deg"] = float(b.amplitude[0] - a.amplitude[0])
        rows.append(row)
    return rows


EXPORTS = ("paths", "optimum", "fourier", "sensitivity", "classification")


def export(root, run_id: str, what: str) -> list[dict]:
    """Rows of one export table for one run."""
    cfg = RunStore(root, run_id).load_config()
    mode = cfg.objective.mode
    if what == "paths":
        return path_rows(load_history(root, run_id), mode)[1]
    if what == "optimum":
        return [optimum_row(load_optimum(root, run_id), cfg.objective)]
    if what == "fourier":
        return fourier_rows(load_optimum(root, run_id), mode)
    if what == "sensitivity":
        rep = analysis.sensitivity(final_covariance(root, run_id))
        return [{"run": run_id, **r, "scree_fraction": float(s)}
                for r, s in zip(rep.rows(), rep.scree)]
    if what == "classification":
        rows = classification_rows(root, [run_id])
        if not rows:
            raise FlapfinError(f"run {run_id!r} is not a branch; nothing to classify")
        return rows
    raise ConfigError(f"unknown export {what!r}; choose from {', '.join(EXPORTS)}")


def report(root, run_ids: Sequence[str], out_dir) -> dict:
    """Write every table for ``run_ids`` into ``out_dir``; return a summary."""
    if not run_ids:
        raise ConfigError("report needs at least one run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    optima, fourier_all, radii, scree, files = [], [], [], [], []
    aoa_traces, aoa_ids = [], []
    for rid in run_ids:
        cfg = RunStore(root, rid).load_config()
        mode = cfg.objective.mode
        per_cand, medians = path_rows(load_history(root, rid), mode)
        write_csv(out / f"{rid}_path_candidates.csv", per_cand)
        write_csv(out / f"{rid}_path_median.csv", medians)
        files += [f"{rid}_path_candidates.csv", f"{rid}_path_median.csv"]
        best = load_optimum(root, rid)
        optima.append(optimum_row(best, cfg.objective))
        if best.record is not None:
            fourier_all += fourier_rows(best, mode)
            aoa_traces.append(analysis_record(best, mode).aoa_trace)
            aoa_ids.append(rid)
        rep = analysis.sensitivity(final_covariance(root, rid))
        radii += [{"run": rid, **r} for r in rep.rows()]
        scree += [{"run": rid, **r} for r in rep.scree_rows()]

    tables = {"optima.csv": optima, "fourier.csv": fourier_all, "radii.csv": radii, "scree.csv": scree}
    classification = classification_rows(root, run_ids)
    if classification:
        tables["classification.csv"] = classification
    if len(aoa_traces) > 1:
        nest = analysis.nesting_order(aoa_traces)
        tables["nesting.csv"] = [{"run_i": aoa_ids[r["i"]], "run_j": aoa_ids[r["j"]], "relation": r["relation"]}
                                 for r in nest.rows()]
    for name, rows in tables.items():
        if rows:
            write_csv(out / name, rows)
            files.append(name)
    summary = {"runs": list(run_ids), "files": files}
    _write_json(out / "report.json", summary)
    return summary


def default_config(name: str = "thrust", mode: str = "thrust", f_target: float = 0.5, seed: int = 1) -> RunConfig:
    """Configuration of the desk-scale damage experiment."""
    return RunConfig(
        name=name,
        objective=Objective(mode, f_target),
        optimizer=OptimizerSettings(seed=seed, initialization=mode),
        plant=PlantConfig.from_dict({"noise": {"force_noise_std": 0.01, "rng_seed": 1000 + seed}}),
    )


def is_finite(x) -> bool:
    return x is not None and math.isfinite(x)
