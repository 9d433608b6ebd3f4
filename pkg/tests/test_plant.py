import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import valid_params
from flapfin.kinematics import KinematicsTrace, generate
from flapfin.plant import (
    INTACT,
    CycleRecord,
    DamageState,
    FinSpec,
    FluidSpec,
    NoiseSpec,
    PlantConfig,
    apply_damage,
    evaluate,
    evaluate_trace,
    lagged_pitch,
    run_cycles,
    sample_forces,
    simulate_cycles,
    strip_areas,
    strip_forces,
)
from flapfin.reference import CONVERGED_OPTIMA, THRUST_INITIALIZATION

P = THRUST_INITIALIZATION
QUIET = PlantConfig(noise=NoiseSpec(force_noise_std=0.0))


def point_trace(sweep, sweep_rate, pitch, pitch_rate=0.0):
    """One-sample trace built by hand (angles in degrees)."""
    one = lambda v: np.array([v], dtype=float)  # noqa: E731
    return KinematicsTrace(
        params=P, period=1.0, t=one(0.0), phi=one(0.0), phi_rate=one(0.0),
        sweep=np.array([sweep], dtype=float), sweep_rate=np.array([sweep_rate], dtype=float),
        normal_angle=one(0.0), aoa=one(pitch), pitch_absolute=one(pitch), pitch_rate=one(pitch_rate),
    )


class TestStripForces:
    def test_no_motion_no_force(self):
        tr = point_trace([10.0, -5.0], [0.0, 0.0], 30.0)
        assert strip_forces(tr, FinSpec(), FluidSpec(), INTACT, 0) == (0.0, 0.0, 0.0, 0.0)

    def test_single_strip_hand_oracle(self):
        # stem straight down, swept along +x at 1 rad/s, fin pitched 30 deg
        fin, fluid = FinSpec(n_strips=1), FluidSpec()
        psi = math.radians(30.0)
        tr = point_trace([0.0, 0.0], [math.degrees(1.0), 0.0], 30.0)
        fx, fy, fz, fn = strip_forces(tr, fin, fluid, INTACT, 0)

        r = fin.root_offset + fin.span / 2
        U = np.array([r * 1.0, 0.0, 0.0])
        chord = np.array([math.cos(psi), math.sin(psi), 0.0])
        span_dir = np.array([0.0, 0.0, -1.0])
        # angle between the flow and the fin plane
        plane_normal = np.cross(span_dir, chord)
        alpha = math.asin(abs(U @ plane_normal) / np.linalg.norm(U))
        mag = 0.5 * fluid.density * fluid.normal_force_coefficient * math.sin(alpha) * fin.area * (U @ U)
        expected = -math.copysign(mag, U @ plane_normal) * plane_normal

        assert alpha == pytest.approx(psi)
        assert (fx, fy, fz) == pytest.approx(tuple(expected), abs=1e-12)
        assert abs(fn) == pytest.approx(mag, abs=1e-12)
        assert mag == pytest.approx(0.5 * 880 * 3.4 * 0.5 * 0.01 * 0.325 ** 2, abs=1e-12)

    @given(valid_params())
    def test_density_linear(self, p):
        tr = generate(p, 360)
        a = sample_forces(tr, FinSpec(), FluidSpec(), INTACT)
        b = sample_forces(tr, FinSpec(), FluidSpec(density=1760.0), INTACT)
        assert np.max(np.abs(b - 2 * a)) <= 1e-12 * max(1.0, np.max(np.abs(a)))

    @given(valid_params(), st.sampled_from([INTACT, apply_damage(FinSpec(), 0.442)]))
    def test_force_along_normal(self, p, damage):
        sim = simulate_cycles(generate(p, 360), 4, QUIET.with_damage(damage))
        F = sim.forces[..., :3]
        n = sim.normal
        along = np.sum(F * n, axis=-1, keepdims=True)
        assert np.max(np.linalg.norm(F - along * n, axis=-1)) < 1e-12
        assert np.allclose(along[..., 0], sim.forces[..., 3], atol=1e-12)


class TestDamage:
    def test_retained_area(self):
        fin = FinSpec()
        d = apply_damage(fin, 0.442)
        assert d.retained_fraction == 0.558
        assert strip_areas(fin, d).sum() / fin.area == pytest.approx(0.558, abs=1e-15)

    def test_zero_fraction_is_intact(self):
        assert apply_damage(FinSpec(), 0.0) == INTACT
        assert apply_damage(FinSpec(), 1e-15).cp_lateral_offset == pytest.approx(0.0, abs=1e-15)

    def test_cp_offset_planform_centroid(self):
        # retained region of a chord-wise one-sided cut, integrated on a dense grid
        fin = FinSpec()
        f = 0.442
        lateral = np.linspace(-fin.chord / 2, fin.chord / 2, 200_001)
        keep = lateral <= fin.chord / 2 - f * fin.chord
        centroid = abs(lateral[keep].mean())
        assert apply_damage(fin, f).cp_lateral_offset == pytest.approx(centroid, abs=1e-7)
        assert keep.mean() == pytest.approx(1 - f, abs=1e-5)

    def test_intact_invariant(self):
        with pytest.raises(ValueError):
            DamageState(intact=True, area_loss_fraction=0.3)

    @given(valid_params(), st.floats(0.0, 0.95))
    def test_pure_area_loss_never_increases_force(self, p, frac):
        tr = generate(p, 360)
        d = DamageState(intact=frac == 0.0, area_loss_fraction=frac, cp_lateral_offset=0.0)
        full = evaluate_trace(tr, QUIET)
        cut = evaluate_trace(tr, QUIET.with_damage(d))
        assert np.linalg.norm(cut.mean_force) <= np.linalg.norm(full.mean_force) * (1 + 1e-12)


class TestCycles:
    def test_rigid_quiet_cycles_identical(self):
        sim = run_cycles(P, 5, QUIET)
        assert np.array_equal(sim.forces[0], sim.forces[4])
        assert list(sim.discarded) == [True, True, True, False, False]

    def test_needs_four_cycles(self):
        with pytest.raises(ValueError):
            run_cycles(P, 3, QUIET)

    def test_noise_seeded(self):
        plant = PlantConfig()
        a = run_cycles(P, 4, plant, np.random.default_rng(1)).forces
        b = run_cycles(P, 4, plant, np.random.default_rng(1)).forces
        c = run_cycles(P, 4, plant, np.random.default_rng(2)).forces
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_pitch_lag_transient(self):
        plant = dataclasses.replace(QUIET, fin=FinSpec(pitch_lag_tau=0.1))
        sim = run_cycles(P, 6, plant)
        first_vs_fourth = np.max(np.abs(sim.forces[0] - sim.forces[3]))
        fifth_vs_sixth = np.max(np.abs(sim.forces[4] - sim.forces[5]))
        assert first_vs_fourth > 1e-6
        assert fifth_vs_sixth < 1e-3 * first_vs_fourth

    def test_lag_filter_exact_on_ramp(self):
        # y' = (u - y)/tau with u = k t, y(0) = 0: y = k (t - tau (1 - exp(-t/tau)))
        tau, k = 0.2, 3.0
        t = np.linspace(0, 2, 41)
        y, rate = lagged_pitch(t, k * t, tau)
        assert np.allclose(y, k * (t - tau * (1 - np.exp(-t / tau))), atol=1e-12)
        assert np.allclose(rate, (k * t - y) / tau)


class TestEvaluate:
    def test_noiseless_repeat_count_irrelevant(self):
        a = evaluate(P, QUIET, n_runs=3)
        b = evaluate(P, QUIET, n_runs=10)
        assert np.allclose(a.mean_force, b.mean_force, rtol=1e-12, atol=1e-15)
        assert np.allclose(a.force_trace, b.force_trace, rtol=1e-12, atol=1e-15)

    def test_frequency_doubling_quadruples_force(self):
        tr = generate(P, 360)
        slow = evaluate_trace(tr, QUIET)
        fast = evaluate_trace(tr.retimed(2.0), QUIET)
        assert np.allclose(fast.mean_force, 4 * slow.mean_force, rtol=1e-6, atol=0)

    def test_zero_motion_zero_force(self):
        tr = generate(P, 360)
        still = dataclasses.replace(tr, sweep_rate=0 * tr.sweep_rate, pitch_rate=0 * tr.pitch_rate)
        rec = evaluate_trace(still, QUIET)
        assert np.all(rec.mean_force == 0.0) and rec.mean_normal_force_mag == 0.0

    def test_deterministic(self):
        a = evaluate(P, PlantConfig(), seed=7)
        b = evaluate(P, PlantConfig(), seed=7)
        c = evaluate(P, PlantConfig(), seed=8)
        assert a.to_dict() == b.to_dict()
        assert a.to_dict() != c.to_dict()

    def test_record_shape_and_roundtrip(self):
        rec = evaluate(P, PlantConfig(), seed=3)
        assert rec.force_trace.shape == (360, 4) and rec.aoa_trace.shape == (360,)
        assert rec.n_runs == 3
        again = CycleRecord.from_dict(rec.to_dict())
        assert again.to_dict() == rec.to_dict()

    def test_needs_three_runs(self):
        with pytest.raises(ValueError):
            evaluate(P, QUIET, n_runs=2)

    def test_reynolds_band(self):
        intact = CONVERGED_OPTIMA[0][2]
        re = evaluate(intact, QUIET).reynolds
        assert 200 <= re <= 2000

    def test_thrust_positive_at_initialization(self):
        assert evaluate(P, QUIET).mean_force[2] > 0

    def test_config_roundtrip(self):
        cfg = PlantConfig().with_damage(apply_damage(FinSpec()))
        assert PlantConfig.from_dict(cfg.to_dict()) == cfg
