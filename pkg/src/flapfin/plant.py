"""Quasi-steady blade-element surrogate of the flapping flat-plate rig.

The fin is a flat plate whose span runs radially along the stem, from
``root_offset`` to ``root_offset + span`` away from the pivot, and whose chord
is set by the pitch angle about the stem. Each spanwise strip feels a normal
force ``0.5 rho C0 sin(alpha) A U|U|`` with ``alpha`` the angle between the
strip velocity and the fin plane, so the total force is always along the fin
normal.

Lab frame: the fin hangs below the pivot, so the stem points along ``-z`` at
rest and its direction is ``normalize(tan x, tan y, -1)`` for deflection
angles ``(x, y)``. Thrust is the ``+z`` component of the force on the fin.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import KinematicsTrace, TrajectoryParams, generate

N_DISCARDED_CYCLES = 3


@dataclass(frozen=True)
class FinSpec:
    span: float = 0.200
    chord: float = 0.050
    root_offset: float = 0.225
    n_strips: int = 20
    pitch_lag_tau: float = 0.0

    def __post_init__(self):
        if min(self.span, self.chord, self.root_offset) <= 0:
            raise ValueError("span, chord and root_offset must be positive")
        if self.n_strips < 1:
            raise ValueError("n_strips must be positive")
        if self.pitch_lag_tau < 0:
            raise ValueError("pitch_lag_tau must be non-negative")

    @property
    def area(self) -> float:
        return self.span * self.chord

    def strip_radii(self) -> np.ndarray:
        i = np.arange(self.n_strips)
        return self.root_offset + (i + 0.5) * self.span / self.n_strips

    @property
    def centroid_radius(self) -> float:
        return self.root_offset + 0.5 * self.span


@dataclass(frozen=True)
class FluidSpec:
    density: float = 880.0
    kinematic_viscosity: float = 115e-6
    normal_force_coefficient: float = 3.4

    def __post_init__(self):
        if min(self.density, self.kinematic_viscosity, self.normal_force_coefficient) <= 0:
            raise ValueError("fluid properties must be positive")


@dataclass(frozen=True)
class DamageState:
    intact: bool = True
    area_loss_fraction: float = 0.0
    cp_lateral_offset: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.area_loss_fraction < 1.0:
            raise ValueError("area_loss_fraction must lie in [0, 1)")
        if self.intact and (self.area_loss_fraction != 0.0 or self.cp_lateral_offset != 0.0):
            raise ValueError("an intact fin has no area loss and no offset")

    @property
    def retained_fraction(self) -> float:
        return 1.0 - self.area_loss_fraction


INTACT = DamageState()


@dataclass(frozen=True)
class NoiseSpec:
    force_noise_std: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.force_noise_std < 0:
            raise ValueError("force_noise_std must be non-negative")


@dataclass(frozen=True)
class PlantConfig:
    fin: FinSpec = field(default_factory=FinSpec)
    fluid: FluidSpec = field(default_factory=FluidSpec)
    damage: DamageState = INTACT
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PlantConfig":
        return cls(
            fin=FinSpec(**data.get("fin", {})),
            fluid=FluidSpec(**data.get("fluid", {})),
            damage=DamageState(**data.get("damage", {})),
            noise=NoiseSpec(**data.get("noise", {})),
        )

    def with_damage(self, damage: DamageState) -> "PlantConfig":
        return dataclasses.replace(self, damage=damage)


def apply_damage(fin: FinSpec, fraction: float = 0.442) -> DamageState:
    """Remove ``fraction`` of the planform from one side of the chord.

    Every strip keeps ``1 - fraction`` of its chord, on the same side, so the
    retained area ratio is exact. The centre of pressure moves to the centroid
    of the retained part, ``chord * fraction / 2`` off the pitch axis.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    if fraction == 0.0:
        return INTACT
    return DamageState(intact=False, area_loss_fraction=fraction,
                       cp_lateral_offset=0.5 * fin.chord * fraction)


def strip_areas(fin: FinSpec, damage: DamageState) -> np.ndarray:
    return np.full(fin.n_strips, fin.area / fin.n_strips * damage.retained_fraction)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def stem_direction(sweep_deg, sweep_rate_deg):
    """Unit stem direction and its time derivative, both ``(n, 3)``."""
    th = np.radians(np.asarray(sweep_deg, dtype=float))
    th_dot = np.radians(np.asarray(sweep_rate_deg, dtype=float))
    w = np.column_stack([np.tan(th[:, 0]), np.tan(th[:, 1]), -np.ones(len(th))])
    w_dot = np.column_stack([th_dot[:, 0] / np.cos(th[:, 0]) ** 2,
                             th_dot[:, 1] / np.cos(th[:, 1]) ** 2,
                             np.zeros(len(th))])
    norm = np.linalg.norm(w, axis=1, keepdims=True)
    d = w / norm
    d_dot = (w_dot - np.sum(w_dot * d, axis=1, keepdims=True) * d) / norm
    return d, d_dot


def fin_normal(d, pitch_deg):
    """Unit normal of a fin containing the stem ``d``.

    The chord is the direction perpendicular to the stem whose projection on
    the x-y plane makes the angle ``pitch_deg`` with the x axis.
    """
    psi = np.radians(np.asarray(pitch_deg, dtype=float))
    cx, cy = np.cos(psi), np.sin(psi)
    cz = -(cx * d[:, 0] + cy * d[:, 1]) / d[:, 2]
    chord = np.column_stack([cx, cy, cz])
    chord /= np.linalg.norm(chord, axis=1, keepdims=True)
    n = np.cross(d, chord)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def sample_forces(trace: KinematicsTrace, fin: FinSpec, fluid: FluidSpec, damage: DamageState,
                  pitch=None, pitch_rate=None) -> np.ndarray:
    """Force on the fin at every sample of ``trace``.

    Returns an ``(n, 4)`` array of ``(Fx, Fy, Fz, Fn)`` in newtons, where
    ``Fn`` is the signed component along the fin normal. ``pitch`` and
    ``pitch_rate`` (deg, deg/s) override the trace's commanded pitch, e.g.
    with a lagged flexible-fin pitch.
    """
    if pitch is None:
        pitch = trace.pitch_absolute
    if pitch_rate is None:
        pitch_rate = trace.pitch_rate
    d, d_dot = stem_direction(trace.sweep, trace.sweep_rate)
    n = fin_normal(d, pitch)

    r = fin.strip_radii()[None, :]
    area = strip_areas(fin, damage)[None, :]
    e = damage.cp_lateral_offset
    omega = np.radians(np.asarray(pitch_rate, dtype=float))[:, None]

    # strip velocity: r * d_dot + e * omega * n (pitching moves the offset centre along n)
    dn = np.sum(d_dot * n, axis=1)[:, None]
    dd = np.sum(d_dot * d_dot, axis=1)[:, None]
    v_normal = r * dn + e * omega
    speed = np.sqrt(np.maximum(r * r * dd + 2.0 * r * e * omega * dn + (e * omega) ** 2, 0.0))

    fn = -0.5 * fluid.density * fluid.normal_force_coefficient * np.sum(area * speed * v_normal, axis=1)
    return np.column_stack([fn[:, None] * n, fn])


def strip_forces(trace: KinematicsTrace, fin: FinSpec, fluid: FluidSpec, damage: DamageState,
                 sample_index: int) -> tuple[float, float, float, float]:
    """``(Fx, Fy, Fz, Fn)`` at a single sample."""
    out = sample_forces(trace, fin, fluid, damage)[sample_index]
    return tuple(float(v) for v in out)


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------

def lagged_pitch(t, pitch, tau: float):
    """First-order lag of a piecewise-linear pitch signal, started at rest.

    Exact for linear interpolation between samples. Returns the lagged pitch
    and its rate.
    """
    pitch = np.asarray(pitch, dtype=float)
    if tau == 0.0:
        return pitch.copy(), None
    out = np.empty_like(pitch)
    out[0] = pitch[0]
    h = np.diff(t)
    decay = np.exp(-h / tau)
    slope = np.diff(pitch) / h
    for k in range(len(h)):
        out[k + 1] = pitch[k + 1] + (out[k] - pitch[k]) * decay[k] - slope[k] * tau * (1.0 - decay[k])
    return out, (pitch - out) / tau


@dataclass(frozen=True)
class CycleSimulation:
    """Per-cycle force traces, ``forces`` shaped ``(n_cycles, n, 4)``."""

    trace: KinematicsTrace
    forces: np.ndarray
    aoa: np.ndarray  # effective angle of attack, (n_cycles, n)
    normal: np.ndarray  # fin normal, (n_cycles, n, 3)
    discarded: np.ndarray  # bool per cycle

    @property
    def retained(self) -> np.ndarray:
        return self.forces[~self.discarded]


def simulate_cycles(trace: KinematicsTrace, n_cycles: int, plant: PlantConfig,
                    rng: np.random.Generator | None = None) -> CycleSimulation:
    """Run ``n_cycles`` consecutive periods of ``trace`` through the plant.

    The pitch lag state carries over from one cycle to the next. With a
    generator and a positive noise level, independent Gaussian noise is added
    to each measured force component and the normal component is recomputed
    from the noisy vector. The first three cycles are flagged as discarded.
    """
    if n_cycles < N_DISCARDED_CYCLES + 1:
        raise ValueError(f"n_cycles must be at least {N_DISCARDED_CYCLES + 1}")
    n = len(trace)
    k = np.repeat(np.arange(n_cycles), n)
    t = np.tile(trace.t, n_cycles) + k * trace.period
    # the lag filter needs pitch unwrapped across cycles
    turns = 360.0 * k if plant.fin.pitch_lag_tau > 0 else 0.0 * k
    commanded = np.tile(trace.pitch_absolute, n_cycles) + turns

    if plant.fin.pitch_lag_tau > 0:
        pitch, rate = lagged_pitch(t, commanded, plant.fin.pitch_lag_tau)
    else:
        # rigid: every cycle sees exactly the same pitch samples
        pitch = commanded
        rate = np.tile(trace.pitch_rate, n_cycles)

    long_trace = dataclasses.replace(
        trace,
        t=t,
        phi=np.tile(trace.phi, n_cycles),
        phi_rate=np.tile(trace.phi_rate, n_cycles),
        sweep=np.tile(trace.sweep, (n_cycles, 1)),
        sweep_rate=np.tile(trace.sweep_rate, (n_cycles, 1)),
        normal_angle=np.tile(trace.normal_angle, n_cycles) + turns,
        aoa=np.tile(trace.aoa, n_cycles),
        pitch_absolute=commanded,
        pitch_rate=np.tile(trace.pitch_rate, n_cycles),
    )
    forces = sample_forces(long_trace, plant.fin, plant.fluid, plant.damage, pitch, rate)
    d, _ = stem_direction(long_trace.sweep, long_trace.sweep_rate)
    normal = fin_normal(d, pitch)

    if rng is not None and plant.noise.force_noise_std > 0:
        noisy = forces[:, :3] + rng.normal(0.0, plant.noise.force_noise_std, size=(len(t), 3))
        forces = np.column_stack([noisy, np.sum(noisy * normal, axis=1)])

    aoa = pitch - long_trace.normal_angle
    discarded = np.arange(n_cycles) < N_DISCARDED_CYCLES
    return CycleSimulation(
        trace=trace,
        forces=forces.reshape(n_cycles, n, 4),
        aoa=aoa.reshape(n_cycles, n),
        normal=normal.reshape(n_cycles, n, 3),
        discarded=discarded,
    )


def run_cycles(params: TrajectoryParams, n_cycles: int, plant: PlantConfig,
               rng: np.random.Generator | None = None, n_samples: int = 360) -> CycleSimulation:
    return simulate_cycles(generate(params, n_samples), n_cycles, plant, rng)


# ---------------------------------------------------------------------------
# evaluation protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleRecord:
    """Averaged result of repeatedly actuating one trajectory.

    ``force_trace`` is ``(grid, 4)`` holding ``(Fx, Fy, Fz, Fn)`` and
    ``aoa_trace`` is in degrees; both are on the uniform azimuth grid
    ``phi_grid``.
    """

    mean_force: np.ndarray
    mean_normal_force_mag: float
    force_trace: np.ndarray
    aoa_trace: np.ndarray
    phi_grid: np.ndarray
    n_runs: int
    reynolds: float

    def summary(self) -> dict:
        return {
            "mean_force": [float(v) for v in self.mean_force],
            "mean_normal_force_mag": float(self.mean_normal_force_mag),
            "reynolds": float(self.reynolds),
            "n_runs": self.n_runs,
        }

    def to_dict(self) -> dict:
        out = self.summary()
        out["phi_grid"] = self.phi_grid.tolist()
        out["force_trace"] = self.force_trace.tolist()
        out["aoa_trace"] = self.aoa_trace.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CycleRecord":
        return cls(
            mean_force=np.asarray(data["mean_force"], dtype=float),
            mean_normal_force_mag=float(data["mean_normal_force_mag"]),
            force_trace=np.asarray(data["force_trace"], dtype=float),
            aoa_trace=np.asarray(data["aoa_trace"], dtype=float),
            phi_grid=np.asarray(data["phi_grid"], dtype=float),
            n_runs=int(data["n_runs"]),
            reynolds=float(data["reynolds"]),
        )


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def run_stream(seed, run: int) -> np.random.Generator:
    """Noise generator for repeat ``run``; pure function of ``(seed, run)``."""
    ss = _seed_sequence(seed)
    child = np.random.SeedSequence(entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (run,))
    return np.random.default_rng(child)


def reynolds_number(trace: KinematicsTrace, fin: FinSpec, fluid: FluidSpec) -> float:
    """Span-based Reynolds number from the cycle-mean fin-centroid speed."""
    _, d_dot = stem_direction(trace.sweep, trace.sweep_rate)
    speed = fin.centroid_radius * np.linalg.norm(d_dot, axis=1)
    return float(fin.span * speed.mean() / fluid.kinematic_viscosity)


def evaluate_trace(trace: KinematicsTrace, plant: PlantConfig, n_runs: int = 3, n_cycles: int = 6,
                   grid_size: int = 360, seed=None) -> CycleRecord:
    """Actuate ``trace`` ``n_runs`` times and average the retained cycles."""
    if n_runs < 3:
        raise ValueError("n_runs must be at least 3")
    if seed is None:
        seed = plant.noise.rng_seed
    retained_forces = []
    retained_aoa = []
    for run in range(n_runs):
        sim = simulate_cycles(trace, n_cycles, plant, run_stream(seed, run))
        retained_forces.append(sim.retained)
        retained_aoa.append(sim.aoa[~sim.discarded])
    forces = np.concatenate(retained_forces)  # (cycles, n, 4)
    aoa = np.concatenate(retained_aoa)

    mean_force = forces[:, :, :3].mean(axis=(0, 1))
    mean_fn_mag = float(np.abs(forces[:, :, 3]).mean())

    phi_grid = np.arange(grid_size) * (2.0 * math.pi / grid_size)
    cycle_force = forces.mean(axis=0)
    cycle_aoa = aoa.mean(axis=0)
    force_trace = np.column_stack([
        np.interp(phi_grid, trace.phi, cycle_force[:, j], period=2.0 * math.pi) for j in range(4)
    ])
    aoa_trace = np.interp(phi_grid, trace.phi, cycle_aoa, period=2.0 * math.pi)

    return CycleRecord(
        mean_force=mean_force,
        mean_normal_force_mag=mean_fn_mag,
        force_trace=force_trace,
        aoa_trace=aoa_trace,
        phi_grid=phi_grid,
        n_runs=n_runs,
        reynolds=reynolds_number(trace, plant.fin, plant.fluid),
    )


def evaluate(params: TrajectoryParams, plant: PlantConfig, n_runs: int = 3, n_cycles: int = 6,
             n_samples: int = 360, grid_size: int = 360, seed=None) -> CycleRecord:
    """Evaluate a trajectory with the repeated-actuation protocol.

    Each run uses its own noise substream derived from ``seed`` (default: the
    plant's noise seed), so results depend only on the arguments.
    """
    return evaluate_trace(generate(params, n_samples), plant, n_runs, n_cycles, grid_size, seed)
