"""Elliptical flapping-fin trajectories.

A trajectory is described by nine optimizable parameters (plus a trajectory
type that is fixed to an ellipse). This module turns a parameter set into a
time-resolved description of one flapping period:

* the stem path ``(x, y)`` in degrees of lab-frame deflection,
* the azimuthal trajectory parameter ``phi`` and its rate,
* the fin pitch, both absolute and relative to the local trajectory normal
  (the angle of attack).

Angles of the path and pitch are in degrees; ``phi`` and ``rotation_phase``
are in radians.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DegenerateTrajectory, OutOfBounds

TWO_PI = 2.0 * math.pi

PARAMETER_NAMES = (
    "stroke_angle",
    "thickness_angle",
    "rotation_angle",
    "rotation_phase",
    "speed_code",
    "speed_up_value",
    "rotation_acceleration",
    "camber",
    "frequency",
)

PARAMETER_UNITS = ("deg", "deg", "deg", "rad", "-", "-", "-", "-", "Hz")

LOWER_BOUNDS = np.array([15.27, 0.0, -70.0, 0.0, 0.0, 1.1, 0.0, 0.0, 0.7])
UPPER_BOUNDS = np.array([32.18, 15.27, 70.0, TWO_PI - 0.1, 4.9, 1.3, 1.0, 1.0, 0.9])
CONVERGENCE_THRESHOLDS = np.array([3.0, 3.0, 3.0, 0.4, 0.9, 0.1, 0.2, 0.2, 0.01])

# squareness above this is numerically a step; tan() diverges at 1
_MAX_SQUARENESS = 0.995


@dataclass(frozen=True)
class TrajectoryParams:
    """The nine optimizable trajectory parameters.

    The trajectory type is carried for completeness but only ``"ellipse"``
    is supported.
    """

    stroke_angle: float
    thickness_angle: float
    rotation_angle: float
    rotation_phase: float
    speed_code: float
    speed_up_value: float
    rotation_acceleration: float
    camber: float
    frequency: float
    trajectory_type: str = "ellipse"

    def __post_init__(self):
        if self.trajectory_type != "ellipse":
            raise ValueError(f"unsupported trajectory type {self.trajectory_type!r}")

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAMETER_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "TrajectoryParams":
        values = np.asarray(values, dtype=float)
        if values.shape != (len(PARAMETER_NAMES),):
            raise ValueError(f"expected {len(PARAMETER_NAMES)} values, got shape {values.shape}")
        return cls(**{name: float(v) for name, v in zip(PARAMETER_NAMES, values)})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "TrajectoryParams":
        kwargs = {name: float(data[name]) for name in PARAMETER_NAMES}
        return cls(trajectory_type=data.get("trajectory_type", "ellipse"), **kwargs)

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


@dataclass(frozen=True)
class FieldCheck:
    name: str
    value: float
    ok: bool
    violated: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    fields: tuple[FieldCheck, ...]

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.fields)

    @property
    def violations(self) -> dict[str, str]:
        return {f.name: f.violated for f in self.fields if not f.ok}

    def __bool__(self):
        return self.ok


def validate(params: TrajectoryParams) -> ValidationReport:
    """Check every parameter against its closed ``[minimum, maximum]`` range."""
    checks = []
    for name, value, lo, hi in zip(PARAMETER_NAMES, params.to_array(), LOWER_BOUNDS, UPPER_BOUNDS):
        if not np.isfinite(value):
            checks.append(FieldCheck(name, value, False, "not finite"))
        elif value < lo:
            checks.append(FieldCheck(name, value, False, f"minimum {lo:g}"))
        elif value > hi:
            checks.append(FieldCheck(name, value, False, f"maximum {hi:g}"))
        else:
            checks.append(FieldCheck(name, value, True))
    return ValidationReport(tuple(checks))


def require_valid(params: TrajectoryParams) -> None:
    report = validate(params)
    if not report.ok:
        detail = ", ".join(f"{k} ({v})" for k, v in report.violations.items())
        raise OutOfBounds(f"parameters out of range: {detail}")


def clip_to_bounds(values) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=float), LOWER_BOUNDS, UPPER_BOUNDS)


# ---------------------------------------------------------------------------
# path geometry
# ---------------------------------------------------------------------------

def base_ellipse(params: TrajectoryParams, phi):
    """Stem position ``(x, y)`` in degrees at azimuth ``phi``.

    The camber adds a ``sin(phi)**2`` bow so the ends of the major axis
    (``phi`` = 0, pi) stay put while mid-span moves by ``camber * thickness``.
    """
    phi = np.asarray(phi, dtype=float)
    s = np.sin(phi)
    x = params.stroke_angle * np.cos(phi)
    y = params.thickness_angle * (s + params.camber * s * s)
    return x, y


def _path_derivatives(params: TrajectoryParams, phi):
    """First and second derivatives of the path with respect to ``phi``."""
    a, b, c = params.stroke_angle, params.thickness_angle, params.camber
    s, co = np.sin(phi), np.cos(phi)
    dx = -a * s
    ddx = -a * co
    dy = b * (co + c * np.sin(2.0 * phi))
    ddy = b * (-s + 2.0 * c * np.cos(2.0 * phi))
    return dx, dy, ddx, ddy


# ---------------------------------------------------------------------------
# angle of attack
# ---------------------------------------------------------------------------

def _squareness_gain(a: float) -> float:
    return math.tan(math.pi * min(a, _MAX_SQUARENESS) / 2.0)


def squared_sine(x, a: float):
    """Unit-amplitude sinusoid morphed toward a square wave as ``a -> 1``.

    ``tanh(beta sin x) / tanh(beta)`` with ``beta = tan(pi a / 2)``; exactly
    ``sin x`` at ``a = 0``.
    """
    x = np.asarray(x, dtype=float)
    if a <= 0.0:
        return np.sin(x)
    beta = _squareness_gain(a)
    return np.tanh(beta * np.sin(x)) / math.tanh(beta)


def _squared_sine_slope(x, a: float):
    if a <= 0.0:
        return np.cos(x)
    beta = _squareness_gain(a)
    return beta * np.cos(x) / np.cosh(beta * np.sin(x)) ** 2 / math.tanh(beta)


def aoa_trace(params: TrajectoryParams, phi):
    """Angle of attack in degrees at azimuth ``phi``.

    Peaks at ``rotation_angle`` exactly when ``phi == rotation_phase``.
    """
    x = np.asarray(phi, dtype=float) - params.rotation_phase + math.pi / 2.0
    return params.rotation_angle * squared_sine(x, params.rotation_acceleration)


# ---------------------------------------------------------------------------
# timing
# ---------------------------------------------------------------------------

def speed_section(params: TrajectoryParams) -> tuple[float, float] | None:
    """Azimuth interval ``(start, end)`` traversed at the elevated rate.

    ``None`` when ``floor(speed_code) == 0`` (uniform rate). The interval for
    code 4 wraps past ``2 pi``.
    """
    code = int(math.floor(params.speed_code))
    if code <= 0:
        return None
    code = min(code, 4)
    start = (code - 1) * math.pi / 2.0
    return start, start + math.pi


def _warp_breakpoints(params: TrajectoryParams):
    """Azimuth breakpoints, their times, and the per-segment azimuthal rate."""
    section = speed_section(params)
    if section is None:
        rate = TWO_PI * params.frequency
        return np.array([0.0, TWO_PI]), np.array([0.0, 1.0 / params.frequency]), np.array([rate])

    s = params.speed_up_value
    # equal azimuth extents: T = pi/w0 * (1 + 1/s)
    base_rate = math.pi * params.frequency * (1.0 + 1.0 / s)
    start, end = section
    edges = {0.0, TWO_PI, start % TWO_PI, end % TWO_PI}
    phi_b = np.array(sorted(edges))
    mids = 0.5 * (phi_b[:-1] + phi_b[1:])
    inside = ((mids - start) % TWO_PI) < math.pi
    rates = np.where(inside, s * base_rate, base_rate)
    t_b = np.concatenate([[0.0], np.cumsum(np.diff(phi_b) / rates)])
    return phi_b, t_b, rates


def time_warp(params: TrajectoryParams, t):
    """Azimuth ``phi(t)`` for ``0 <= t < period``; piecewise linear in time."""
    phi_b, t_b, _ = _warp_breakpoints(params)
    return np.interp(np.asarray(t, dtype=float), t_b, phi_b)


def azimuth_rate(params: TrajectoryParams, t):
    """``dphi/dt`` in rad/s; at a breakpoint the rate of the following segment."""
    _, t_b, rates = _warp_breakpoints(params)
    idx = np.searchsorted(t_b, np.asarray(t, dtype=float), side="right") - 1
    return rates[np.clip(idx, 0, len(rates) - 1)]


def section_times(params: TrajectoryParams) -> tuple[float, float] | None:
    """Entry and exit time of the sped-up section within one period.

    For the wrapped section (code 4) the entry is later than the exit.
    """
    section = speed_section(params)
    if section is None:
        return None
    phi_b, t_b, _ = _warp_breakpoints(params)
    start, end = section
    if end > TWO_PI:
        end -= TWO_PI
    return float(np.interp(start, phi_b, t_b)), float(np.interp(end, phi_b, t_b))


# ---------------------------------------------------------------------------
# full trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KinematicsTrace:
    """One period of fin motion sampled uniformly in time.

    All arrays have length ``n``. ``sweep`` and ``sweep_rate`` are ``(n, 2)``
    holding the x and y deflections.
    """

    params: TrajectoryParams
    period: float
    t: np.ndarray
    phi: np.ndarray
    phi_rate: np.ndarray  # rad/s
    sweep: np.ndarray  # deg
    sweep_rate: np.ndarray  # deg/s
    normal_angle: np.ndarray  # deg, unwrapped
    aoa: np.ndarray  # deg
    pitch_absolute: np.ndarray  # deg
    pitch_rate: np.ndarray  # deg/s

    def __len__(self):
        return len(self.t)

    @property
    def dt(self) -> float:
        return self.period / len(self.t)

    def retimed(self, factor: float) -> "KinematicsTrace":
        """Same path traversed ``factor`` times faster.

        Bypasses parameter bounds; meant for plant-only scaling experiments.
        """
        return dataclasses.replace(
            self,
            period=self.period / factor,
            t=self.t / factor,
            phi_rate=self.phi_rate * factor,
            sweep_rate=self.sweep_rate * factor,
            pitch_rate=self.pitch_rate * factor,
        )

    def sample(self, i: int) -> dict:
        return {
            "t": float(self.t[i]),
            "phi": float(self.phi[i]),
            "sweep_xy": tuple(map(float, self.sweep[i])),
            "pitch_absolute": float(self.pitch_absolute[i]),
            "aoa": float(self.aoa[i]),
            "sweep_rate_xy": tuple(map(float, self.sweep_rate[i])),
            "pitch_rate": float(self.pitch_rate[i]),
        }


def generate(params: TrajectoryParams, n_samples: int = 360) -> KinematicsTrace:
    """Sample one period of the trajectory at ``n_samples`` uniform times.

    Raises
    ------
    DegenerateTrajectory
        If the path is flat (zero thickness angle), so that the tangent flips
        direction at the ends of the stroke.
    """
    require_valid(params)
    if n_samples < 360:
        raise ValueError("n_samples must be at least 360")
    # camber scales with thickness too, so the path is flat whenever thickness is 0
    if params.thickness_angle <= 0.0:
        raise DegenerateTrajectory("thickness angle of 0 gives a flat path with no defined normal")

    period = 1.0 / params.frequency
    t = np.arange(n_samples) * (period / n_samples)
    phi = time_warp(params, t)
    phi_rate = azimuth_rate(params, t)

    x, y = base_ellipse(params, phi)
    dx, dy, ddx, ddy = _path_derivatives(params, phi)
    sweep = np.column_stack([x, y])
    sweep_rate = np.column_stack([dx, dy]) * phi_rate[:, None]

    # outward normal of a counterclockwise path is the tangent turned by -90 deg
    tangent = np.unwrap(np.arctan2(dy, dx))
    normal = np.degrees(tangent) - 90.0
    normal -= 360.0 * np.round(normal[0] / 360.0)
    turn_rate = (dx * ddy - dy * ddx) / (dx * dx + dy * dy)

    aoa = aoa_trace(params, phi)
    xi = phi - params.rotation_phase + math.pi / 2.0
    aoa_rate = params.rotation_angle * _squared_sine_slope(xi, params.rotation_acceleration) * phi_rate

    pitch = normal + aoa
    pitch_rate = np.degrees(turn_rate * phi_rate) + aoa_rate

    return KinematicsTrace(
        params=params,
        period=period,
        t=t,
        phi=phi,
        phi_rate=phi_rate,
        sweep=sweep,
        sweep_rate=sweep_rate,
        normal_angle=normal,
        aoa=aoa,
        pitch_absolute=pitch,
        pitch_rate=pitch_rate,
    )
