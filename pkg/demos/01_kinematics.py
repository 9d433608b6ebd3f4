"""
Fin stroke kinematics
=====================

A trajectory is nine numbers. This script builds the thrust starting
trajectory, samples one period and prints how the motion is distributed
around the stroke.
"""

import numpy as np

from flapfin.kinematics import generate, section_times, validate
from flapfin.reference import THRUST_INITIALIZATION

params = THRUST_INITIALIZATION
print(params)
print("valid:", validate(params).ok)

# %% one period, 360 samples evenly spaced in time
trace = generate(params, 360)
print(f"period {trace.period:.4f} s, dt {trace.dt * 1e3:.3f} ms")

# the stem sweeps an ellipse; x and y excursions in degrees
print("x excursion", np.ptp(trace.sweep[:, 0]).round(2), "y excursion", np.ptp(trace.sweep[:, 1]).round(2))

# %% speed-up section: part of the stroke runs faster than the rest
sec = section_times(params)
if sec is not None:
    t_in, t_out = sec
    print(f"faster section from t={t_in:.4f}s to t={t_out:.4f}s")
print("azimuthal rate range (rad/s):", trace.phi_rate.min().round(3), trace.phi_rate.max().round(3))

# %% the size of the angle of attack peaks at the rotation phase (radians)
peak = trace.phi[np.argmax(np.abs(trace.aoa))]
print(f"|AOA| max {np.abs(trace.aoa).max():.2f} deg at azimuth {peak:.3f} rad "
      f"(rotation phase {params.rotation_phase} rad)")

for i in range(0, 360, 45):
    s = trace.sample(i)
    print(f"  t={s['t']:.3f}  phi={np.degrees(s['phi']):6.1f}  aoa={s['aoa']:7.2f}")
