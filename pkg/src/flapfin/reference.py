"""Published experimental values used as fixtures and sanity references.

Initial parameter sets, converged optima of the oil-tank experiments
(intact fin and five amputated fins, for thrust and for side force), and
the leading Fourier modes of the intact-fin thrust traces. Phases were
published unsigned, so only magnitudes are kept.
"""

from .kinematics import TrajectoryParams

THRUST_INITIALIZATION = TrajectoryParams(
    stroke_angle=25.43,
    thickness_angle=14.29,
    rotation_angle=-40.46,
    rotation_phase=6.18,
    speed_code=2.95,
    speed_up_value=1.10,
    rotation_acceleration=0.13,
    camber=0.20,
    frequency=0.71,
)

SIDE_FORCE_INITIALIZATION = TrajectoryParams(
    stroke_angle=26.12,
    thickness_angle=13.30,
    rotation_angle=-62.51,
    rotation_phase=2.63,
    speed_code=1.34,
    speed_up_value=1.18,
    rotation_acceleration=0.03,
    camber=0.18,
    frequency=0.72,
)

INITIALIZATIONS = {"thrust": THRUST_INITIALIZATION, "side_force": SIDE_FORCE_INITIALIZATION}


def _opt(stroke, thick, rot, phase, code, speedup, accel, camber, freq):
    return TrajectoryParams(stroke, thick, rot, phase, code, speedup, accel, camber, freq)


# (label, objective, params, closeness to setpoint, fitness)
CONVERGED_OPTIMA = [
    ("intact", "thrust", _opt(24.8, 12.9, 26.7, 5.3, 0, 1.2, 0.6, 0.6, 0.70), 0.0029, 0.1157),
    ("amputated_1", "thrust", _opt(31.7, 15.2, 51.8, 2.3, 1, 1.2, 0.8, 0.9, 0.78), 0.0130, 0.1088),
    ("amputated_2", "thrust", _opt(32.0, 14.8, 70.0, 2.7, 2, 1.2, 0.5, 0.7, 0.70), 0.0067, 0.0920),
    ("amputated_3", "thrust", _opt(31.5, 15.2, -68.2, 4.7, 2, 1.2, 0.5, 1.0, 0.72), 0.0032, 0.1049),
    ("amputated_4", "thrust", _opt(31.5, 13.6, -63.4, 6.1, 2, 1.2, 0.9, 0.7, 0.73), 0.0085, 0.0879),
    ("amputated_5", "thrust", _opt(30.0, 13.4, -70.0, 5.8, 1, 1.2, 0.5, 0.6, 0.79), 0.0016, 0.0810),
    ("intact", "side_force", _opt(15.2, 8.1, -70.0, 2.9, 3, 1.1, 0.2, 0.3, 0.86), -0.0062, 0.0087),
    ("amputated_1", "side_force", _opt(32.1, 15.0, -57.0, 2.9, 4, 1.2, 0.4, 0.4, 0.90), -0.1618, 0.1633),
    ("amputated_2", "side_force", _opt(31.3, 15.2, -70.0, 4.2, 3, 1.2, 0.4, 0.8, 0.70), -0.0091, 0.0854),
    ("amputated_3", "side_force", _opt(29.6, 13.1, -70.0, 4.3, 2, 1.1, 0.4, 0.7, 0.75), -0.0027, 0.0933),
    ("amputated_4", "side_force", _opt(18.7, 13.7, -70.0, 4.8, 3, 1.1, 0.3, 0.6, 0.86), -0.0189, 0.1059),
    ("amputated_5", "side_force", _opt(16.8, 11.6, -41.2, 4.4, 4, 1.1, 0.3, 0.4, 0.88), 0.0198, 0.0408),
]

# first five mode amplitudes and unsigned phases (deg), intact fin, thrust
INTACT_THRUST_FORCE_MODES = {
    "amplitude": (0.426, 0.398, 0.021, 0.011, 0.011),
    "phase": (159.56, 48.89, 177.34, 120.36, 161.67),
}
INTACT_THRUST_AOA_MODES = {
    "amplitude": (12.470, 1.307, 1.071, 0.104, 0.096),
    "phase": (157.52, 94.07, 29.12, 95.22, 177.38),
}

# dominant AOA mode shift between intact and amputated thrust optima (deg)
THRUST_AOA_PHASE_SHIFT = 110.6

# span-based Reynolds number band of all experimental optima
REYNOLDS_BAND = (440.0, 960.0)
