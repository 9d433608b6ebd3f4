"""Force-tracking fitness with a geometric-efficiency penalty (lower is better)."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateForce
from .plant import CycleRecord

CLOSENESS_WEIGHT = 0.8
EFFICIENCY_WEIGHT = 0.2
MIN_NORMAL_FORCE = 1e-9


class Mode(str, enum.Enum):
    THRUST = "thrust"
    SIDE_FORCE = "side_force"


@dataclass(frozen=True)
class Objective:
    mode: Mode = Mode.THRUST
    f_target: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.f_target > 0:
            raise ValueError("f_target must be positive")

    def to_dict(self) -> dict:
        return {"mode": self.mode.value, "f_target": self.f_target}


@dataclass(frozen=True)
class FitnessValue:
    f: float
    closeness_term: float
    efficiency_term: float
    F_used: float
    F_n_used: float

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "closeness_term": self.closeness_term,
            "efficiency_term": self.efficiency_term,
            "F_used": self.F_used,
            "F_n_used": self.F_n_used,
        }


def objective_force(mean_force, mode: Mode) -> float:
    """Thrust is the signed z component; side force the x-y magnitude."""
    fx, fy, fz = (float(v) for v in mean_force)
    if Mode(mode) is Mode.THRUST:
        return fz
    return float(np.hypot(fx, fy))


def fitness_from_forces(F: float, F_n: float, objective: Objective) -> FitnessValue:
    """``0.8 |F_t - |F|| / F_t + 0.2 |1 - F / F_n|``.

    The closeness term uses the force magnitude, the efficiency term keeps its
    sign, so reversed thrust is penalised as inefficient.
    """
    if not F_n > MIN_NORMAL_FORCE:
        raise DegenerateForce(f"normal force {F_n!r} N is too small for an efficiency ratio")
    target = objective.f_target
    closeness = abs(target - abs(F)) / target
    efficiency = abs(1.0 - F / F_n)
    f = CLOSENESS_WEIGHT * closeness + EFFICIENCY_WEIGHT * efficiency
    return FitnessValue(f=f, closeness_term=closeness, efficiency_term=efficiency, F_used=F, F_n_used=F_n)


def fitness(record: CycleRecord, objective: Objective) -> FitnessValue:
    F = objective_force(record.mean_force, objective.mode)
    return fitness_from_forces(F, record.mean_normal_force_mag, objective)
