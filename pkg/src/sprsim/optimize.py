"""Grid sweeps and golden-section refinement over sensor design parameters.

A swept parameter is addressed by a target string: ``sensing_index`` or
``layer:<i>:thickness``. Objectives are maximized for sensitivity, fom
and dip_depth, minimized for fwhm. Grid points whose dip falls outside
the sweep window are recorded as failed data, not fatal errors.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .metrics import MetricConfig, MetricError, ResonanceMetrics, full_metrics
from .tmm import Stack

OBJECTIVES = ("sensitivity", "fom", "min_fwhm", "dip_depth")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class OptimizationError(RuntimeError):
    """Sweep produced no usable optimum."""


def parse_target(target: str):
    """Split a target string into ('sensing_index', None) or ('thickness', i)."""
    if target == "sensing_index":
        return "sensing_index", None
    parts = target.split(":")
    if len(parts) == 3 and parts[0] == "layer" and parts[2] == "thickness":
        try:
            return "thickness", int(parts[1])
        except ValueError:
            pass
    raise ValueError(
        f"bad parameter target {target!r}: use 'sensing_index' or 'layer:<i>:thickness'"
    )


def apply_parameter(stack: Stack, target: str, value: float) -> Stack:
    """Return a copy of ``stack`` with the targeted field set to ``value``."""
    kind, index = parse_target(target)
    if kind == "sensing_index":
        return replace(stack, sensing_index=float(value))
    if not 0 <= index < len(stack.layers):
        raise ValueError(f"layer index {index} out of range for {len(stack.layers)} layers")
    layers = list(stack.layers)
    layers[index] = replace(layers[index], thickness_nm=float(value))
    return replace(stack, layers=tuple(layers))


@dataclass(frozen=True)
class ParameterSpec:
    """One swept parameter: target path, inclusive grid and refinement budget."""

    target: str
    lo: float
    hi: float
    step: float
    refine_tol: float = 0.01
    max_iterations: int = 100

    def __post_init__(self):
        parse_target(self.target)
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if not 0 < self.step <= self.hi - self.lo:
            raise ValueError("need 0 < step <= hi - lo")
        if self.refine_tol <= 0 or self.max_iterations < 1:
            raise ValueError("refine_tol must be > 0 and max_iterations >= 1")


def grid_values(spec: ParameterSpec) -> np.ndarray:
    count = int(math.floor((spec.hi - spec.lo) / spec.step + 1e-9)) + 1
    return spec.lo + spec.step * np.arange(count)


def objective_score(metrics: ResonanceMetrics, objective: str) -> float:
    """Higher-is-better scalar used to rank sweep points."""
    if objective == "sensitivity":
        return metrics.sensitivity_deg_per_riu
    if objective == "fom":
        return metrics.fom_per_riu
    if objective == "min_fwhm":
        return -metrics.fwhm_deg
    if objective == "dip_depth":
        return 1.0 - metrics.r_min
    raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


@dataclass(frozen=True)
class SweepPoint:
    value: float
    metrics: ResonanceMetrics | None
    status: str  # "ok" or "failed"


@dataclass(frozen=True)
class SweepResult:
    spec: ParameterSpec
    objective: str
    points: tuple[SweepPoint, ...]
    best_index: int

    @property
    def best(self) -> SweepPoint:
        return self.points[self.best_index]

    def to_csv_text(self) -> str:
        return _points_csv("value", self.points)

    def to_json_obj(self) -> dict:
        return {
            "target": self.spec.target,
            "lo": self.spec.lo,
            "hi": self.spec.hi,
            "step": self.spec.step,
            "objective": self.objective,
            "best_index": self.best_index,
            "best_value": self.best.value,
            "points": [
                {
                    "value": p.value,
                    "status": p.status,
                    "metrics": p.metrics.to_dict() if p.metrics else None,
                }
                for p in self.points
            ],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _fmt(x: float) -> str:
    return repr(float(x))


_CSV_METRIC_COLUMNS = (
    "theta_spr_deg",
    "r_min",
    "fwhm_deg",
    "sensitivity_deg_per_riu",
    "fom_per_riu",
)


def _points_csv(key_column: str, rows) -> str:
    lines = [f"{key_column}," + ",".join(_CSV_METRIC_COLUMNS) + ",status"]
    for key, metrics, status in (
        (r.value if hasattr(r, "value") else r.name, r.metrics, r.status) for r in rows
    ):
        key_text = _fmt(key) if isinstance(key, float) else str(key)
        if metrics is None:
            lines.append(key_text + "," * len(_CSV_METRIC_COLUMNS) + "," + status)
        else:
            d = metrics.to_dict()
            cells = ",".join(_fmt(d[c]) for c in _CSV_METRIC_COLUMNS)
            lines.append(f"{key_text},{cells},{status}")
    return "\n".join(lines) + "\n"


def _evaluate(stack, target, value, config):
    try:
        return SweepPoint(float(value), full_metrics(apply_parameter(stack, target, value), config), "ok")
    except MetricError:
        return SweepPoint(float(value), None, "failed")


def sweep_parameter(
    stack: Stack,
    spec: ParameterSpec,
    objective: str,
    config: MetricConfig | None = None,
    workers: int = 1,
) -> SweepResult:
    """Evaluate metrics on the grid and select the best point by objective.

    Point evaluations are independent, so any worker count produces the
    identical points list; failed points are kept but never win.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    values = grid_values(spec)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(lambda v: _evaluate(stack, spec.target, v, config), values))
    else:
        points = tuple(_evaluate(stack, spec.target, v, config) for v in values)
    scored = [
        (objective_score(p.metrics, objective), i)
        for i, p in enumerate(points)
        if p.status == "ok"
    ]
    if not scored:
        raise OptimizationError("all sweep points failed: no bracketed dip anywhere on the grid")
    best_score = max(s for s, _ in scored)
    best_index = min(i for s, i in scored if s == best_score)
    return SweepResult(spec=spec, objective=objective, points=points, best_index=best_index)


def golden_section_maximize(fn, lo: float, hi: float, tol: float, max_iterations: int = 100):
    """Golden-section search for a maximum of a unimodal ``fn`` on [lo, hi].

    Returns the best (x, fn(x)) among all evaluated points once the
    bracket is narrower than ``tol`` or the budget is exhausted.
    """
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    best = max((fc, c), (fd, d))
    iterations = 0
    while (b - a) > tol and iterations < max_iterations:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
            best = max(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
            best = max(best, (fd, d))
        iterations += 1
    return best[1], best[0]


def refine_optimum(
    stack: Stack,
    spec: ParameterSpec,
    objective: str,
    config: MetricConfig | None = None,
    sweep: SweepResult | None = None,
):
    """Golden-section refinement inside the best grid cell of a sweep.

    Returns (value, metrics); never worse on the objective than the grid
    best it starts from. Raises :class:`OptimizationError` if the grid
    best sits on the sweep boundary (no bracket).
    """
    result = sweep or sweep_parameter(stack, spec, objective, config)
    i = result.best_index
    if i == 0 or i == len(result.points) - 1:
        raise OptimizationError("grid optimum at sweep boundary: no bracket to refine in")
    seed = result.points[i]
    cache: dict[float, ResonanceMetrics] = {seed.value: seed.metrics}

    def scored(value: float) -> float:
        metrics = cache.get(value)
        if metrics is None:
            metrics = full_metrics(apply_parameter(stack, spec.target, value), config)
            cache[value] = metrics
        return objective_score(metrics, objective)

    value, score = golden_section_maximize(
        scored, seed.value - spec.step, seed.value + spec.step, spec.refine_tol, spec.max_iterations
    )
    if score < objective_score(seed.metrics, objective):
        return seed.value, seed.metrics
    return value, cache[value]


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    metrics: ResonanceMetrics | None
    status: str


def compare_configurations(
    named_stacks, config: MetricConfig | None = None
) -> tuple[ComparisonRow, ...]:
    """Metrics for each named stack, one row per input, failures kept."""
    rows = []
    for name, stack in named_stacks:
        try:
            rows.append(ComparisonRow(name, full_metrics(stack, config), "ok"))
        except MetricError:
            rows.append(ComparisonRow(name, None, "failed"))
    return tuple(rows)


def comparison_csv_text(rows) -> str:
    return _points_csv("name", rows)
