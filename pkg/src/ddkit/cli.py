"""Command-line front end.

Subcommands: sequence (compile a schedule to JSON), moos (build/validate an
operation set), scan (time sweep + slope fits, CSV output), pulse design /
pulse scan (envelope design and its error scaling), accept (run the built-in
acceptance suite).

Exit codes: 0 success, 1 usage error, 2 violated precondition, 3 unfittable
fit or design/criterion failure (accept returns the number of failed
criteria).  A JSON config file may be passed with --config or the
DDKIT_CONFIG environment variable; flags override config values.
"""

import argparse
import json
import math
import os
import sys
from collections import Counter
from dataclasses import dataclass, fields

import numpy as np

from .errors import PreconditionError, UnfittableError
from .operators import Moos, build_moos, lie_closure, moos_to_json
from .pulseshape import (
    PulseDesignError,
    design_pulse,
    eta_integrals,
    pulse_error_scan,
    pulse_from_json,
    pulse_to_json,
    rectangular_pulse,
)
from .model import random_model
from .sequences import (
    Schedule,
    cdd_nested,
    cdd_uniform,
    first_order_schedule,
    nudd,
    schedule_to_json,
    sdd_schedule,
    udd_schedule,
)
from .simulate import ModelSpec, RunConfig, ScalingResult, order_scan

__all__ = ["main", "Config"]

_SCHEMES = ("udd", "free", "first_order", "sdd", "cdd", "cdd_nested", "nudd")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser using exit code 1 for usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


@dataclass(frozen=True)
class Config:
    """Defaults loadable from a JSON file; every field optional.

    Schema: {"bath_dim": int, "norm_bound": float, "seeds": [int, ...],
    "t_min": float, "t_max": float, "t_points": int, "error_floor": float,
    "error_ceiling": float, "threads": int}.  Unknown keys are rejected.
    """

    bath_dim: int = 4
    norm_bound: float = 1.0
    seeds: tuple[int, ...] = tuple(range(8))
    t_min: float = 0.02
    t_max: float = 0.6
    t_points: int = 12
    error_floor: float = 1e-12
    error_ceiling: float = 1e-2
    threads: int = 1

    def run_config(self) -> RunConfig:
        return RunConfig(
            t_grid=tuple(np.geomspace(self.t_min, self.t_max, self.t_points)),
            seeds=self.seeds,
            error_floor=self.error_floor,
            error_ceiling=self.error_ceiling,
            threads=self.threads,
        )


def load_config(path: str | None) -> Config:
    """Config from --config, else DDKIT_CONFIG, else built-in defaults."""
    path = path or os.environ.get("DDKIT_CONFIG")
    if not path:
        return Config()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read config {path!r}: {exc}")
    if not isinstance(doc, dict):
        raise PreconditionError(f"config {path!r} must be a JSON object")
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise PreconditionError(
            f"unknown config keys {unknown}; known keys are {sorted(known)}"
        )
    if "seeds" in doc:
        doc["seeds"] = tuple(int(s) for s in doc["seeds"])
    return Config(**doc)


def _parse_orders(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise PreconditionError(f"malformed orders {text!r}, want e.g. '2' or '2,3'")


def parse_model_spec(text: str, cfg: Config) -> ModelSpec:
    """'structure:SYSxBATH' -> ModelSpec, e.g. 'general:2x4'."""
    structure, _, dims = text.partition(":")
    try:
        sys_dim, _, bath_dim = dims.partition("x")
        return ModelSpec(structure, int(sys_dim), int(bath_dim), cfg.norm_bound)
    except ValueError:
        raise PreconditionError(
            f"malformed model spec {text!r}, want 'structure:SYSxBATH'"
        )


def build_schedule(scheme, orders, moos: Moos, op=None, allow_odd_inner=False,
                   include_closing=False) -> Schedule:
    """Dispatch a scheme name + order vector to the sequence compilers."""
    if scheme == "udd":
        if len(orders) != 1:
            raise PreconditionError("udd takes exactly one order")
        label = op or moos.labels[0]
        moos.by_label(label)  # raises KeyError for a bad label
        return udd_schedule(label, orders[0])
    if scheme == "free":
        return Schedule("free", (0,), (), (), 1)
    if scheme == "first_order":
        return first_order_schedule(moos, include_closing=include_closing)
    if scheme == "sdd":
        return sdd_schedule(first_order_schedule(moos, include_closing=include_closing))
    if scheme == "cdd":
        if len(orders) != 1:
            raise PreconditionError("cdd takes exactly one order")
        return cdd_uniform(moos, orders[0])
    if scheme == "cdd_nested":
        return cdd_nested(moos, orders)
    if scheme == "nudd":
        return nudd(moos, orders, allow_odd_inner=allow_odd_inner)
    raise PreconditionError(f"unknown scheme {scheme!r}; choose from {_SCHEMES}")


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def _fit_doc(result: ScalingResult) -> dict:
    return {
        label: {
            "slope": None if math.isnan(fit.slope) else fit.slope,
            "intercept": None if math.isnan(fit.intercept) else fit.intercept,
            "rms_residual": None if math.isnan(fit.rms_residual) else fit.rms_residual,
            "points_used": fit.points_used,
            "status": fit.status,
        }
        for label, fit in sorted(result.fits.items())
    }


def _write_scan(result: ScalingResult, scheme: str, orders, out: str) -> str:
    """CSV rows + companion fit JSON; returns the fit file path."""
    order_str = ",".join(str(n) for n in orders)
    lines = ["scheme,orders,operator,T,seed,error"]
    for label, t, seed, err in result.rows():
        lines.append(f"{scheme},{order_str},{label},{t!r},{seed},{err!r}")
    _write(out, "\n".join(lines) + "\n")
    fit_path = (out[: -len(".csv")] if out.endswith(".csv") else out) + ".fits.json"
    _write(fit_path, json.dumps(_fit_doc(result), indent=2) + "\n")
    return fit_path


def _print_fits(result: ScalingResult):
    for label, fit in sorted(result.fits.items()):
        if fit.status == "exact":
            print(f"  {label}: error at floor everywhere (exact)")
        elif math.isnan(fit.slope):
            print(f"  {label}: unfittable (too few points in the fit window)")
        else:
            print(
                f"  {label}: slope {fit.slope:.4f}  rms {fit.rms_residual:.4f}  "
                f"points {fit.points_used}  [{fit.status}]"
            )


def cmd_sequence(args, cfg: Config) -> int:
    moos = build_moos(args.moos)
    sched = build_schedule(
        args.scheme, _parse_orders(args.orders), moos, op=args.op,
        allow_odd_inner=args.allow_odd_inner, include_closing=args.include_closing,
    )
    counts = Counter(sched.op_labels)
    print(f"scheme {sched.scheme}, orders {list(sched.orders)}")
    print(f"intervals: {sched.intervals}")
    print("pulse multiset: " + (
        ", ".join(f"{lab} x{n}" for lab, n in sorted(counts.items())) or "(none)"
    ))
    if args.out:
        _write(args.out, schedule_to_json(sched) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_moos(args, cfg: Config) -> int:
    moos = build_moos(args.spec)
    print(f"dim {moos.dim}, {len(moos)} elements: {', '.join(moos.labels)}")
    print("signature (+1 commute / -1 anticommute):")
    for row in moos.signature:
        print("  " + " ".join(f"{v:+d}" for v in row))
    if args.closure:
        print(f"Lie closure dimension: {len(lie_closure(moos))}")
    if args.out:
        _write(args.out, moos_to_json(moos) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_scan(args, cfg: Config) -> int:
    moos = build_moos(args.moos)
    sched = build_schedule(
        args.scheme, _parse_orders(args.orders), moos, op=args.op,
        allow_odd_inner=args.allow_odd_inner,
    )
    spec = parse_model_spec(args.model, cfg)
    if moos.dim != spec.sys_dim:
        raise PreconditionError(
            f"MOOS dimension {moos.dim} != model system dimension {spec.sys_dim}"
        )
    run_cfg = cfg.run_config()
    if args.seeds is not None:
        run_cfg = RunConfig(
            t_grid=run_cfg.t_grid, seeds=tuple(range(args.seeds)),
            error_floor=run_cfg.error_floor, error_ceiling=run_cfg.error_ceiling,
            threads=run_cfg.threads,
        )
    operators = [moos.by_label(args.op)] if args.op else None
    result = order_scan(sched, moos, spec, run_cfg, operators=operators)
    fit_path = _write_scan(result, sched.scheme, sched.orders, args.out)
    print(f"wrote {args.out} and {fit_path}")
    _print_fits(result)
    if any(f.status == "unfittable" for f in result.fits.values()):
        raise UnfittableError("one or more operators could not be fitted")
    return 0


def cmd_pulse_design(args, cfg: Config) -> int:
    shape = design_pulse(args.family, args.tau_p, args.seed)
    e11, e12 = eta_integrals(shape)
    print(f"family {args.family}: amplitudes {[a for _, a in shape.segments]}")
    print(f"area = {shape.area!r} (target pi/2), eta11 = {e11:.3e}, eta12 = {e12:.3e}")
    if args.out:
        _write(args.out, pulse_to_json(shape) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_pulse_scan(args, cfg: Config) -> int:
    if args.pulse == "rect":
        shape = rectangular_pulse()
    else:
        with open(args.pulse) as fh:
            shape = pulse_from_json(fh.read())
    spec = parse_model_spec(args.model, cfg)
    model = random_model(
        spec.structure, spec.sys_dim, spec.bath_dim, spec.norm_bound, args.seed
    )
    moos = build_moos(args.moos)
    omega = moos.by_label(args.op) if args.op else moos.elements[0]
    tau_grid = np.geomspace(args.tau_min, args.tau_max, args.tau_points)
    result = pulse_error_scan(shape, model, omega, tau_grid)
    fit_path = _write_scan(result, "pulse", (), args.out)
    print(f"wrote {args.out} and {fit_path}")
    _print_fits(result)
    if any(f.status == "unfittable" for f in result.fits.values()):
        raise UnfittableError("pulse error scaling could not be fitted")
    return 0


def cmd_accept(args, cfg: Config) -> int:
    from .acceptance import run_all

    results = run_all()
    failures = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"[{mark}] {r.number:2d}. {r.name}")
        print(f"        {r.details}")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} criteria passed")
    return failures


def _build_parser() -> _Parser:
    parser = _Parser(prog="ddkit", description=__doc__)
    parser.add_argument("--config", help="JSON config file (or set DDKIT_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sequence", help="compile a pulse schedule")
    p.add_argument("--scheme", required=True, choices=_SCHEMES)
    p.add_argument("--orders", help="comma-separated order vector, e.g. 2,3")
    p.add_argument("--moos", default="qubit_full:1", help="MOOS spec, family:size")
    p.add_argument("--op", help="protected operator label (udd only)")
    p.add_argument("--allow-odd-inner", action="store_true")
    p.add_argument("--include-closing", action="store_true")
    p.add_argument("--out", help="schedule JSON output path")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("moos", help="build and validate an operation set")
    p.add_argument("--spec", required=True, help="MOOS spec, family:size")
    p.add_argument("--closure", action="store_true", help="also report the Lie closure dimension")
    p.add_argument("--out", help="MOOS JSON output path")
    p.set_defaults(func=cmd_moos)

    p = sub.add_parser("scan", help="time sweep and decoupling-order fit")
    p.add_argument("--scheme", required=True, choices=_SCHEMES)
    p.add_argument("--orders", help="comma-separated order vector")
    p.add_argument("--moos", default="qubit_full:1")
    p.add_argument("--op", help="protected operator label (udd only)")
    p.add_argument("--allow-odd-inner", action="store_true")
    p.add_argument("--model", default="general:2x4", help="structure:SYSxBATH")
    p.add_argument("--seeds", type=int, help="number of model seeds (0..n-1)")
    p.add_argument("--threads", type=int, help="worker thread cap")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("pulse", help="finite-amplitude pulse tools")
    psub = p.add_subparsers(dest="pulse_command", required=True)

    pd = psub.add_parser("design", help="solve for a first-order-corrected envelope")
    pd.add_argument("--family", default="sym3", choices=("sym3", "sym5", "rect"))
    pd.add_argument("--tau-p", type=float, default=1.0)
    pd.add_argument("--seed", type=int, default=0)
    pd.add_argument("--out", help="pulse JSON output path")
    pd.set_defaults(func=cmd_pulse_design)

    ps = psub.add_parser("scan", help="pulse error vs duration")
    ps.add_argument("--pulse", required=True, help="pulse JSON path, or 'rect'")
    ps.add_argument("--model", default="general:2x4")
    ps.add_argument("--moos", default="qubit_full:1")
    ps.add_argument("--op", help="pulse axis operator label")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--tau-min", type=float, default=0.003)
    ps.add_argument("--tau-max", type=float, default=0.1)
    ps.add_argument("--tau-points", type=int, default=10)
    ps.add_argument("--out", required=True, help="CSV output path")
    ps.set_defaults(func=cmd_pulse_scan)

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        if getattr(args, "threads", None):
            cfg = Config(**{**{f.name: getattr(cfg, f.name) for f in fields(Config)},
                            "threads": args.threads})
        return args.func(args, cfg)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PreconditionError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"precondition violated: {msg}", file=sys.stderr)
        return 2
    except (UnfittableError, PulseDesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
