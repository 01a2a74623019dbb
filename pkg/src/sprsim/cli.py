"""Command-line surface: simulate, metrics, sweep, optimize, field, bench.

Stack documents are JSON:

    {"prism": "bk7",
     "layers": [{"material": "ag", "thickness_nm": 50}],
     "medium": {"n": 1.33},
     "wavelength_nm": 633}

Material identifiers resolve against the materials directory (bundled
data by default, overridable with --materials or $SPRSIM_MATERIALS).
Angles are degrees, lengths nm. Curves and sweeps are emitted as CSV,
metrics as JSON. Every failure exits nonzero after printing exactly one
diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import run_table1, table1_csv_text
from .materials import find_material
from .metrics import MetricConfig, estimate_resonance_angle, find_dip, full_metrics
from .optimize import OBJECTIVES, ParameterSpec, refine_optimum, sweep_parameter
from .tmm import Layer, Stack, angular_sweep, field_profile


class StackConfigError(ValueError):
    """A stack document failed validation."""


def parse_stack_config(text: str, materials_dir=None) -> Stack:
    """Parse and fully resolve a JSON stack document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StackConfigError(f"stack document is not valid JSON: {exc}") from None
    try:
        prism_id = doc["prism"]
        layer_docs = doc["layers"]
        medium_n = doc["medium"]["n"]
        wavelength = doc["wavelength_nm"]
    except (KeyError, TypeError) as exc:
        raise StackConfigError(f"stack document missing field: {exc}") from None

    prism = find_material(str(prism_id), materials_dir)
    layers = []
    for i, layer_doc in enumerate(layer_docs):
        try:
            ident = str(layer_doc["material"])
            thickness = float(layer_doc["thickness_nm"])
        except (KeyError, TypeError) as exc:
            raise StackConfigError(f"layer {i}: missing field: {exc}") from None
        if not thickness > 0:
            raise StackConfigError(f"layer {i}: thickness_nm must be > 0, got {thickness}")
        layers.append(Layer(find_material(ident, materials_dir), thickness))
    if not float(medium_n) >= 1:
        raise StackConfigError(f"medium.n must be >= 1, got {medium_n}")
    return Stack(
        prism=prism,
        layers=tuple(layers),
        sensing_index=float(medium_n),
        wavelength_nm=float(wavelength),
    )


def stack_document(stack: Stack) -> dict:
    """Serialize a stack back to its JSON document form (round-trips)."""
    return {
        "prism": stack.prism.name,
        "layers": [
            {"material": layer.material.name, "thickness_nm": layer.thickness_nm}
            for layer in stack.layers
        ],
        "medium": {"n": stack.sensing_index},
        "wavelength_nm": stack.wavelength_nm,
    }


def _load_stack(args) -> Stack:
    text = Path(args.stack).read_text(encoding="utf-8")
    return parse_stack_config(text, args.materials)


def _window(args, stack: Stack):
    lo = args.theta_min
    if lo is None:
        lo = max(estimate_resonance_angle(stack.prism_index, stack.sensing_index) - 2.0, 0.0)
    return lo, args.theta_max


def _write(path: str, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _metric_config(args) -> MetricConfig:
    return MetricConfig(
        theta_min=args.theta_min,
        theta_max=args.theta_max,
        step_deg=args.step,
        delta_n=args.delta_n,
    )


def cmd_simulate(args) -> int:
    stack = _load_stack(args)
    lo, hi = _window(args, stack)
    curve = angular_sweep(stack, lo, hi, args.step)
    lines = ["theta_deg,reflectance"]
    lines += [
        f"{theta!r},{refl!r}"
        for theta, refl in zip(curve.theta_deg.tolist(), curve.reflectance.tolist())
    ]
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_metrics(args) -> int:
    stack = _load_stack(args)
    record = full_metrics(stack, _metric_config(args))
    text = json.dumps(record.to_dict(), indent=2)
    if args.out:
        _write(args.out, text + "\n")
    else:
        print(text)
    return 0


def cmd_sweep(args) -> int:
    stack = _load_stack(args)
    spec = ParameterSpec(target=args.param, lo=args.lo, hi=args.hi, step=args.grid_step)
    result = sweep_parameter(
        stack, spec, args.objective, _metric_config(args), workers=args.workers
    )
    _write(args.out, result.to_csv_text())
    if args.json_out:
        _write(args.json_out, result.to_json_text() + "\n")
    return 0


def cmd_optimize(args) -> int:
    stack = _load_stack(args)
    spec = ParameterSpec(
        target=args.param,
        lo=args.lo,
        hi=args.hi,
        step=args.grid_step,
        refine_tol=args.refine_tol,
    )
    config = _metric_config(args)
    sweep = sweep_parameter(stack, spec, args.objective, config, workers=args.workers)
    if args.sweep_out:
        _write(args.sweep_out, sweep.to_csv_text())
    value, metrics = refine_optimum(stack, spec, args.objective, config, sweep=sweep)
    print(json.dumps({"value": value, "metrics": metrics.to_dict()}, indent=2))
    return 0


def cmd_field(args) -> int:
    stack = _load_stack(args)
    theta = args.theta
    if theta is None:
        lo, hi = _window(args, stack)
        floor = estimate_resonance_angle(stack.prism_index, stack.sensing_index)
        theta, _ = find_dip(angular_sweep(stack, lo, hi, args.step), theta_floor=floor)
    profile = field_profile(stack, theta, args.resolution)
    lines = ["z_nm,layer_index,h_magnitude"]
    lines += [
        f"{z!r},{idx},{mag!r}"
        for z, idx, mag in zip(
            profile.z_nm.tolist(), profile.layer_index.tolist(), profile.magnitude.tolist()
        )
    ]
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_bench(args) -> int:
    rows = run_table1(args.materials, MetricConfig(step_deg=args.step, delta_n=args.delta_n))
    _write(args.out, table1_csv_text(rows))
    print(f"wrote {args.out}: configuration reproduction, not value reproduction")
    return 0


class _Parser(argparse.ArgumentParser):
    # one diagnostic line on the error stream, nonzero exit
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _add_common(sub, *, step_default: float):
    sub.add_argument("--stack", required=True, help="path to a JSON stack document")
    sub.add_argument("--materials", default=None, help="materials directory override")
    sub.add_argument("--theta-min", type=float, default=None, help="sweep start, deg")
    sub.add_argument("--theta-max", type=float, default=89.0, help="sweep end, deg")
    sub.add_argument("--step", type=float, default=step_default, help="sweep step, deg")
    sub.add_argument("--delta-n", type=float, default=1e-4, help="sensitivity step, RIU")


def _add_sweep_args(sub):
    sub.add_argument(
        "--param", required=True, help="'sensing_index' or 'layer:<i>:thickness'"
    )
    sub.add_argument("--lo", type=float, required=True)
    sub.add_argument("--hi", type=float, required=True)
    sub.add_argument("--grid-step", type=float, required=True, help="parameter grid step")
    sub.add_argument("--objective", choices=OBJECTIVES, default="fom")
    sub.add_argument("--workers", type=int, default=1, help="parallel point evaluations")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sprsim", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("simulate", help="angular reflectance sweep to CSV")
    _add_common(sub, step_default=0.01)
    sub.add_argument("--out", required=True, help="output curve CSV")
    sub.set_defaults(func=cmd_simulate)

    sub = commands.add_parser("metrics", help="resonance metrics as JSON")
    _add_common(sub, step_default=1e-3)
    sub.add_argument("--out", default=None, help="write JSON here instead of stdout")
    sub.set_defaults(func=cmd_metrics)

    sub = commands.add_parser("sweep", help="parameter sweep to CSV")
    _add_common(sub, step_default=1e-3)
    _add_sweep_args(sub)
    sub.add_argument("--out", required=True, help="output sweep CSV")
    sub.add_argument("--json-out", default=None, help="also write the sweep as JSON")
    sub.set_defaults(func=cmd_sweep)

    sub = commands.add_parser("optimize", help="sweep plus golden-section refinement")
    _add_common(sub, step_default=1e-3)
    _add_sweep_args(sub)
    sub.add_argument("--refine-tol", type=float, default=0.01, help="bracket width target")
    sub.add_argument("--sweep-out", default=None, help="write the seeding sweep CSV")
    sub.set_defaults(func=cmd_optimize)

    sub = commands.add_parser("field", help="|H_y(z)| profile to CSV")
    _add_common(sub, step_default=1e-3)
    sub.add_argument("--theta", type=float, default=None, help="angle, deg (default: the dip)")
    sub.add_argument("--resolution", type=float, default=1.0, help="z sample spacing, nm")
    sub.add_argument("--out", required=True, help="output field CSV")
    sub.set_defaults(func=cmd_field)

    sub = commands.add_parser("bench", help="stock-configuration comparison harness")
    sub.add_argument("suite", choices=["table1"], help="benchmark suite name")
    sub.add_argument("--materials", default=None)
    sub.add_argument("--step", type=float, default=1e-3)
    sub.add_argument("--delta-n", type=float, default=1e-4)
    sub.add_argument("--out", required=True, help="output report CSV")
    sub.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
