"""Closed-loop optimization of flapping-fin trajectories on a simulated fin."""

from .errors import (
    AllCandidatesFailed,
    ConfigError,
    DegenerateForce,
    DegenerateTrajectory,
    FlapfinError,
    MissingSnapshot,
    NonUniformSampling,
    NotPositiveDefinite,
    OutOfBounds,
    SchemaMismatch,
)
from .fitness import Mode, Objective, fitness
from .harness import RunConfig, branch, damage_experiment, report, run
from .kinematics import TrajectoryParams, generate
from .plant import DamageState, PlantConfig, apply_damage, evaluate

__version__ = "0.1.0"
