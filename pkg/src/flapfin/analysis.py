"""Post-hoc analyses of converged runs.

* sensitivity of the optimal basin from the final search covariance,
* Fourier modes of periodic force and angle-of-attack traces,
* rotation of side-force results into a frame aligned with the mean force,
* nesting of angle-of-attack traces,
* classification of how damage changed each converged parameter.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DegenerateForce, NonUniformSampling, NotPositiveDefinite
from .kinematics import CONVERGENCE_THRESHOLDS, PARAMETER_NAMES, TrajectoryParams
from .plant import CycleRecord

MIN_PLANAR_FORCE = 1e-9


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityReport:
    correlation: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns match eigenvalues
    scree: np.ndarray
    radii: np.ndarray
    normalized_radii: np.ndarray

    def rows(self, names: Sequence[str] = PARAMETER_NAMES) -> list[dict]:
        return [
            {"parameter": name, "radius": float(r), "normalized_radius": float(rn)}
            for name, r, rn in zip(names, self.radii, self.normalized_radii)
        ]

    def scree_rows(self) -> list[dict]:
        return [
            {"component": k + 1, "eigenvalue": float(v), "fraction": float(s)}
            for k, (v, s) in enumerate(zip(self.eigenvalues, self.scree))
        ]


def sensitivity(C) -> SensitivityReport:
    """PCA of the standardized covariance and per-parameter basin radii.

    The covariance is scaled to a correlation matrix ``R``. The radius of
    parameter ``i`` is the distance from the centre to the surface
    ``x^T R^-1 x = 1`` along axis ``i``, i.e. ``(R^-1)_ii ** -0.5``; it is
    normalized by the longest semi-axis ``sqrt(lambda_1)``. Both the overall
    scale of ``C`` and per-parameter units cancel.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise NotPositiveDefinite("covariance must be a square matrix")
    if not np.allclose(C, C.T, rtol=1e-10, atol=1e-14 * np.abs(C).max()):
        raise NotPositiveDefinite("covariance is not symmetric")
    C = 0.5 * (C + C.T)
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("covariance is not positive-definite") from exc

    scale = 1.0 / np.sqrt(np.diag(C))
    R = C * np.outer(scale, scale)
    np.fill_diagonal(R, 1.0)

    vals, vecs = np.linalg.eigh(R)
    order = np.argsort(vals)[::-1]
    vals, vecs = np.maximum(vals[order], 0.0), vecs[:, order]

    radii = 1.0 / np.sqrt(np.diag(np.linalg.inv(R)))
    return SensitivityReport(
        correlation=R,
        eigenvalues=vals,
        eigenvectors=vecs,
        scree=vals / vals.sum(),
        radii=radii,
        normalized_radii=radii / math.sqrt(vals[0]),
    )


# ---------------------------------------------------------------------------
# Fourier modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierSpectrum:
    """Leading modes of ``mean + sum_k A_k cos(k phi + p_k)``.

    ``coefficients`` holds the full one-sided DFT divided by the sample
    count, enough to rebuild the input exactly.
    """

    modes: np.ndarray  # mode index, 1..n_modes
    amplitude: np.ndarray
    phase: np.ndarray  # deg, (-180, 180]
    mean: float
    coefficients: np.ndarray
    n_samples: int

    def rows(self) -> list[dict]:
        return [
            {"mode": int(k), "amplitude": float(a), "phase_deg": float(p)}
            for k, a, p in zip(self.modes, self.amplitude, self.phase)
        ]


def _check_uniform(phi, n: int) -> None:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (n,):
        raise NonUniformSampling("azimuth grid and values differ in length")
    step = 2.0 * math.pi / n
    expected = phi[0] + step * np.arange(n)
    if not np.allclose(phi, expected, rtol=0.0, atol=1e-9 * step + 1e-12):
        raise NonUniformSampling("samples are not uniformly spaced over one period")


def fourier(values, n_modes: int = 5, phi=None) -> FourierSpectrum:
    """First ``n_modes`` Fourier modes of one period of uniform samples.

    ``phi`` (radians), if given, is checked to be a uniform grid covering
    exactly one period; phases are then referred to ``phi = 0``.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2 * n_modes + 1:
        raise NonUniformSampling(f"{n} samples cannot resolve {n_modes} modes")
    offset = 0.0
    if phi is not None:
        _check_uniform(phi, n)
        offset = float(np.asarray(phi)[0])
    c = np.fft.rfft(x) / n
    if offset:
        c = c * np.exp(-1j * np.arange(len(c)) * offset)
    k = np.arange(1, n_modes + 1)
    phase = np.degrees(np.angle(c[k]))
    phase = np.where(phase <= -180.0, phase + 360.0, phase)
    return FourierSpectrum(
        modes=k,
        amplitude=2.0 * np.abs(c[k]),
        phase=phase,
        mean=float(c[0].real),
        coefficients=c,
        n_samples=n,
    )


def reconstruct(spectrum: FourierSpectrum, n_modes: int | None = None) -> np.ndarray:
    """Samples rebuilt from the spectrum, optionally truncated to ``n_modes``."""
    c = spectrum.coefficients.copy()
    if n_modes is not None:
        c[n_modes + 1:] = 0.0
    return np.fft.irfft(c * spectrum.n_samples, n=spectrum.n_samples)


def phase_difference(a_deg: float, b_deg: float) -> float:
    """Smallest absolute angle between two phases, in ``[0, 180]``."""
    d = (a_deg - b_deg) % 360.0
    return float(min(d, 360.0 - d))


# ---------------------------------------------------------------------------
# resultant frame
# ---------------------------------------------------------------------------

def rotate_to_resultant(records: Sequence[CycleRecord]) -> tuple[list[CycleRecord], np.ndarray]:
    """Rotate each record about z so its mean planar force lies along ``+x*``.

    Returns the rotated records and the rotation applied to each, in degrees
    (counterclockwise positive). Only force components change.
    """
    rotated, angles = [], []
    for rec in records:
        fx, fy = float(rec.mean_force[0]), float(rec.mean_force[1])
        if math.hypot(fx, fy) <= MIN_PLANAR_FORCE:
            raise DegenerateForce("mean planar force too small to define a heading")
        angle = -math.atan2(fy, fx)
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        mean = rec.mean_force.copy()
        mean[:2] = rot @ mean[:2]
        trace = rec.force_trace.copy()
        trace[:, :2] = trace[:, :2] @ rot.T
        rotated.append(dataclasses.replace(rec, mean_force=mean, force_trace=trace))
        angles.append(math.degrees(angle))
    return rotated, np.array(angles)


# ---------------------------------------------------------------------------
# nesting of angle-of-attack traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NestingReport:
    """Pairwise relations ``"outside"``, ``"inside"``, ``"coincident"`` or ``"crossing"``.

    ``relations[(i, j)] == "outside"`` means trace ``i`` encloses trace ``j``.
    ``chain`` lists trace indices from outermost to innermost when every pair
    is comparable, otherwise it is ``None``.
    """

    relations: dict
    chain: list[int] | None

    def rows(self) -> list[dict]:
        return [{"i": i, "j": j, "relation": r} for (i, j), r in sorted(self.relations.items())]


def nesting_order(aoa_traces, tolerance: float = 0.5, signed: bool = False) -> NestingReport:
    """Compare traces on a shared azimuth grid.

    By default traces are compared by magnitude, the radius they would have on
    a polar plot. Trace ``i`` encloses ``j`` if it is at least as large at every
    azimuth, within ``tolerance`` degrees.
    """
    traces = [np.asarray(t, dtype=float) for t in aoa_traces]
    if len({t.shape for t in traces}) > 1:
        raise ValueError("traces must share one azimuth grid")
    vals = traces if signed else [np.abs(t) for t in traces]

    relations = {}
    for i, j in combinations(range(len(vals)), 2):
        i_out = bool(np.all(vals[i] >= vals[j] - tolerance))
        j_out = bool(np.all(vals[j] >= vals[i] - tolerance))
        if i_out and j_out:
            relations[(i, j)] = "coincident"
        elif i_out:
            relations[(i, j)] = "outside"
        elif j_out:
            relations[(i, j)] = "inside"
        else:
            relations[(i, j)] = "crossing"

    chain = None
    if "crossing" not in relations.values():
        chain = sorted(range(len(vals)), key=lambda k: -float(np.mean(vals[k])))
    return NestingReport(relations, chain)


# ---------------------------------------------------------------------------
# adaptation
# ---------------------------------------------------------------------------

class Adaptation(str, enum.Enum):
    INCREASE = "Increase"
    DECREASE = "Decrease"
    NO_CHANGE = "NoChange"


def classify_change(intact: float, amputated: float, threshold: float) -> Adaptation:
    """A change counts only if strictly larger than the convergence threshold."""
    delta = amputated - intact
    if delta > threshold:
        return Adaptation.INCREASE
    if delta < -threshold:
        return Adaptation.DECREASE
    return Adaptation.NO_CHANGE


def classify_adaptation(intact: TrajectoryParams, amputated: Sequence[TrajectoryParams],
                        thresholds=CONVERGENCE_THRESHOLDS) -> list[dict[str, Adaptation]]:
    """Per-run, per-parameter change of the damaged optima against the intact one."""
    base = intact.to_array()
    out = []
    for params in amputated:
        vals = params.to_array()
        out.append({
            name: classify_change(b, v, t)
            for name, b, v, t in zip(PARAMETER_NAMES, base, vals, thresholds)
        })
    return out


def adaptation_rows(labels: Sequence[str], intact: TrajectoryParams, amputated: Sequence[TrajectoryParams],
                    thresholds=CONVERGENCE_THRESHOLDS, force_change: Sequence[str] | None = None) -> list[dict]:
    """One summary row per damaged run: amplitude, frequency (and force) change plus every parameter."""
    rows = []
    for k, (label, cls) in enumerate(zip(labels, classify_adaptation(intact, amputated, thresholds))):
        row = {
            "run": label,
            "amplitude_change": cls["stroke_angle"].value,
            "frequency_change": cls["frequency"].value,
        }
        if force_change is not None:
            row["force_change"] = force_change[k]
        row.update({name: c.value for name, c in cls.items()})
        rows.append(row)
    return rows
