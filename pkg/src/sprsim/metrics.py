"""Resonance-curve metrics: dip angle, width, sensitivity, figure of merit.

The dip is the global reflectance minimum above the critical angle,
refined by a three-point parabola. Width is the half-depth full width:
the distance between the two crossings of (R_base + R_min)/2, where
R_base is the lower of the two maxima flanking the dip (this is the
standard SPR convention and stays defined for shallow dips). Sensitivity
is a central difference of the dip angle over the sensing index, and the
figure of merit is exactly sensitivity / width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .tmm import ReflectanceCurve, Stack, angular_sweep


class MetricError(ValueError):
    """A metric could not be extracted from the curve."""


class DipNotFoundError(MetricError):
    """No bracketed reflectance minimum inside the swept window."""


class HalfWidthError(MetricError):
    """Fewer than two half-depth crossings inside the swept window."""


@dataclass(frozen=True)
class MetricConfig:
    """Sweep and differencing settings for metric extraction.

    ``n_s`` overrides the stack's sensing index; ``theta_min`` of None
    means 2 degrees below the critical angle. The 0.001-degree default
    step gives the sub-millidegree dip resolution the sensitivities call
    for, and ``delta_n`` is the central-difference step in RIU.
    """

    n_s: float | None = None
    theta_min: float | None = None
    theta_max: float = 89.0
    step_deg: float = 1e-3
    delta_n: float = 1e-4


@dataclass(frozen=True)
class ResonanceMetrics:
    """One coherent performance record for a stack and analyte."""

    theta_spr_deg: float
    r_min: float
    fwhm_deg: float
    sensitivity_deg_per_riu: float
    fom_per_riu: float

    def to_dict(self) -> dict:
        return {
            "theta_spr_deg": self.theta_spr_deg,
            "r_min": self.r_min,
            "fwhm_deg": self.fwhm_deg,
            "sensitivity_deg_per_riu": self.sensitivity_deg_per_riu,
            "fom_per_riu": self.fom_per_riu,
        }


def estimate_resonance_angle(n_p: float, n_s: float) -> float:
    """Critical-angle approximation arcsin(n_s / n_p), in degrees.

    Equals the onset of total internal reflection and is a strict lower
    bound on the true dip angle of metal-backed stacks: an estimator,
    never the dip solver.
    """
    if not 0 < n_s < n_p:
        raise ValueError(f"need 0 < n_s < n_p, got n_s={n_s}, n_p={n_p}")
    return math.degrees(math.asin(n_s / n_p))


def _restricted(curve: ReflectanceCurve, theta_floor):
    theta = curve.theta_deg
    lo = 0 if theta_floor is None else int(np.searchsorted(theta, theta_floor, side="left"))
    if theta.size - lo < 3:
        raise DipNotFoundError("need at least 3 samples above the angular floor")
    return lo


def _dip_index(curve: ReflectanceCurve, theta_floor):
    lo = _restricted(curve, theta_floor)
    refl = curve.reflectance
    i = lo + int(np.argmin(refl[lo:]))
    if i == lo or i == refl.size - 1:
        raise DipNotFoundError(
            "reflectance minimum sits on the window edge; the sweep misses the resonance"
        )
    return lo, i


def _parabolic_vertex(theta, refl, i):
    a, b, c = refl[i - 1], refl[i], refl[i + 1]
    step = theta[i + 1] - theta[i]
    curv = a - 2.0 * b + c
    if curv <= 0:  # flat triple: no curvature to refine against
        return float(theta[i]), float(b)
    offset = 0.5 * (a - c) / curv
    # vertex may undershoot 0 by roundoff on near-zero dips; R is physical
    value = max(0.0, b - 0.125 * (a - c) ** 2 / curv)
    return float(theta[i] + offset * step), float(value)


def find_dip(curve: ReflectanceCurve, theta_floor: float | None = None) -> tuple[float, float]:
    """(theta_spr, R_min): grid minimum refined by a 3-point parabola.

    Only samples at or above ``theta_floor`` are considered; ties go to
    the smaller angle. Raises :class:`DipNotFoundError` when the minimum
    lands on the boundary of the considered samples.
    """
    _, i = _dip_index(curve, theta_floor)
    return _parabolic_vertex(curve.theta_deg, curve.reflectance, i)


def fwhm(curve: ReflectanceCurve, theta_floor: float | None = None) -> float:
    """Half-depth full width of the dip, by linear interpolation.

    The half level is (R_base + R_min)/2 with R_base the lower of the two
    flanking maxima; crossings are scale-free, so the result is invariant
    under affine rescaling of the curve.
    """
    lo, i = _dip_index(curve, theta_floor)
    theta = curve.theta_deg
    refl = curve.reflectance
    _, r_min = _parabolic_vertex(theta, refl, i)
    base = min(refl[lo:i].max(), refl[i + 1 :].max())
    half = 0.5 * (base + r_min)

    left = np.nonzero(refl[lo:i] >= half)[0]
    right = np.nonzero(refl[i + 1 :] >= half)[0]
    if left.size == 0 or right.size == 0:
        raise HalfWidthError("fewer than two half-depth crossings inside the window")
    j = lo + int(left[-1])  # last sample >= half on the left flank
    theta_left = theta[j] + (refl[j] - half) / (refl[j] - refl[j + 1]) * (theta[j + 1] - theta[j])
    j = i + 1 + int(right[0])  # first sample >= half on the right flank
    theta_right = theta[j - 1] + (half - refl[j - 1]) / (refl[j] - refl[j - 1]) * (
        theta[j] - theta[j - 1]
    )
    return float(theta_right - theta_left)


def figure_of_merit(sensitivity_deg_per_riu: float, fwhm_deg: float) -> float:
    """Ratio of sensitivity to width, 1/RIU."""
    if not fwhm_deg > 0:
        raise ValueError("fwhm must be positive")
    return sensitivity_deg_per_riu / fwhm_deg


def central_difference(fn, x: float, step: float) -> float:
    """Symmetric O(step**2) difference quotient of ``fn`` at ``x``."""
    if step <= 0:
        raise ValueError("difference step must be positive")
    return (fn(x + step / 2.0) - fn(x - step / 2.0)) / step


def _resolve_window(stack: Stack, n_s: float, config: MetricConfig):
    n_p = stack.prism_index
    floor = estimate_resonance_angle(n_p, n_s) if n_s < n_p else None
    if config.theta_min is not None:
        lo = config.theta_min
    elif floor is not None:
        lo = max(floor - 2.0, 0.0)
    else:
        raise ValueError("no critical angle: an explicit theta_min is required")
    return lo, config.theta_max, floor


def _dip_angle(stack: Stack, n_s: float, lo: float, hi: float, step: float) -> float:
    work = stack if n_s == stack.sensing_index else replace(stack, sensing_index=n_s)
    n_p = work.prism_index
    floor = estimate_resonance_angle(n_p, n_s) if n_s < n_p else None
    curve = angular_sweep(work, lo, hi, step)
    return find_dip(curve, theta_floor=floor)[0]


def sensitivity(stack: Stack, config: MetricConfig | None = None) -> float:
    """d(theta_spr)/d(n_s) in degrees/RIU, from two full dip solves."""
    cfg = config or MetricConfig()
    n_s = cfg.n_s if cfg.n_s is not None else stack.sensing_index
    lo, hi, _ = _resolve_window(stack, n_s, cfg)
    return central_difference(
        lambda n: _dip_angle(stack, n, lo, hi, cfg.step_deg), n_s, cfg.delta_n
    )


def full_metrics(stack: Stack, config: MetricConfig | None = None) -> ResonanceMetrics:
    """Extract every metric from one stack + analyte configuration.

    The figure of merit is recomputed from the record's own sensitivity
    and width fields, so fom * fwhm == sensitivity exactly.
    """
    cfg = config or MetricConfig()
    n_s = cfg.n_s if cfg.n_s is not None else stack.sensing_index
    work = stack if n_s == stack.sensing_index else replace(stack, sensing_index=n_s)
    lo, hi, floor = _resolve_window(work, n_s, cfg)
    curve = angular_sweep(work, lo, hi, cfg.step_deg)
    theta_spr, r_min = find_dip(curve, theta_floor=floor)
    width = fwhm(curve, theta_floor=floor)
    sens = sensitivity(work, replace(cfg, n_s=n_s))
    return ResonanceMetrics(
        theta_spr_deg=theta_spr,
        r_min=r_min,
        fwhm_deg=width,
        sensitivity_deg_per_riu=sens,
        fom_per_riu=figure_of_merit(sens, width),
    )
