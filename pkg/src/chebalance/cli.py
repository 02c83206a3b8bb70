"""Command-line front end: ``solve``, ``run``, ``validate``, ``bench``.

Exit codes: 0 success, 1 input error, 2 infeasible stance / halted run /
failed validation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from chebalance import scenario_io, trace
from chebalance.cheby import ChebySolver, Scaling, Weights, augment, wrench_range
from chebalance.contacts import ContactError, SignConvention, assemble
from chebalance.friction import FilterKind
from chebalance.harness import RunConfig, ScenarioError, run
from chebalance.scenario_io import ParseError
from chebalance.validation import validate_random, validate_scenario

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2

_WEIGHT_KEYS = {"com", "force", "torque", "radius_ratio"}
_SCALE_KEYS = {"force", "torque", "length"}
_SIGN = {"paper": SignConvention.ALONG_VELOCITY, "oppose": SignConvention.OPPOSE_VELOCITY}


class InputError(ValueError):
    pass


def load_weights(path) -> Weights:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"weights file {path}: {e}") from None
    if not isinstance(data, dict):
        raise InputError(f"weights file {path}: expected a JSON object")
    for key in data:
        if key not in _WEIGHT_KEYS:
            raise InputError(f"weights file {path}: unknown key {key!r}")
    try:
        return Weights(**{k: float(v) for k, v in data.items()})
    except (TypeError, ValueError) as e:
        raise InputError(f"weights file {path}: {e}") from None


def parse_scales(items) -> Scaling:
    kw = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or key not in _SCALE_KEYS:
            raise InputError(f"unknown scale override {item!r} (use force=, torque=, length=)")
        try:
            kw[key] = float(val)
        except ValueError:
            raise InputError(f"scale {key!r}: expected a number, got {val!r}") from None
    try:
        return Scaling(**kw)
    except ValueError as e:
        raise InputError(str(e)) from None


def _config(args) -> RunConfig:
    weights = load_weights(args.weights) if args.weights else Weights()
    return RunConfig(weights=weights, scaling=parse_scales(args.scale), filter=FilterKind(args.filter),
                     sign=_SIGN[args.sign], seed=args.seed)


def _stance_problem(scenario, cfg: RunConfig):
    contacts = [c.build(c.mode, cfg.sign) for c in scenario.contacts]
    blocks = assemble(scenario.mass, scenario.gravity, contacts)
    y_des = np.zeros(blocks.n_vars)
    y_des[:3] = scenario.com
    return augment(blocks, y_des, cfg.weights, cfg.scaling)


def _v(xs) -> str:
    return " ".join(f"{x:.6f}" for x in xs)


def cmd_solve(args, out) -> int:
    scenario = scenario_io.load(args.file)
    cfg = _config(args)
    problem = _stance_problem(scenario, cfg)
    sol = ChebySolver().solve(problem)
    print(f"status {sol.status.value}", file=out)
    print(f"solve_time_us {sol.solve_time * 1e6:.1f}", file=out)
    if not sol.optimal:
        return EXIT_INFEASIBLE
    print(f"com {_v(sol.com)}", file=out)
    for c in problem.blocks.contacts:
        w = sol.contact_wrench(c.id)
        f_local = c.rotation.T @ w[:3]
        print(f"contact {c.id} {c.mode.value} force {_v(w[:3])} torque {_v(w[3:])} f_z {f_local[2]:.6f}",
              file=out)
    print(f"radius {sol.radius:.9g}", file=out)
    print(f"r_w {wrench_range(sol).r_w:.9g}", file=out)
    return EXIT_OK


def cmd_run(args, out) -> int:
    scenario = scenario_io.load(args.file)
    cfg = _config(args)
    rows, summary = run(scenario, cfg)
    if args.format == "json":
        text = trace.to_json(rows, scenario, summary, timing=args.timing)
    else:
        text = trace.to_csv(rows, scenario, timing=args.timing)
    report = out
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
        report = sys.stderr
    print(f"ticks {summary.ticks} completed {str(summary.completed).lower()}", file=report)
    print(f"min_radius {summary.min_radius:.9g}", file=report)
    print(f"max_equilibrium_residual {summary.max_equilibrium_residual:.3g}", file=report)
    print(f"mean_solve_time_us {summary.mean_solve_time * 1e6:.1f}", file=report)
    print(f"max_solve_time_us {summary.max_solve_time * 1e6:.1f}", file=report)
    if summary.halt_reason:
        print(f"halted: {summary.halt_reason}", file=report)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_validate(args, out) -> int:
    scaling = parse_scales(args.scale)
    if args.random:
        checks = validate_random(args.random, seed=args.seed, samples=args.samples, scaling=scaling)
    elif args.file:
        scenario = scenario_io.load(args.file)
        checks = validate_scenario(scenario, _SIGN[args.sign], scaling, samples=args.samples)
    else:
        raise InputError("validate needs a file or --random N")
    if args.format == "json":
        doc = {"passed": all(c.passed for c in checks),
               "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]}
        out.write(json.dumps(doc, indent=1) + "\n")
    else:
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}", file=out)
    failed = sum(not c.passed for c in checks)
    if args.format != "json":
        print(f"{len(checks) - failed}/{len(checks)} checks passed", file=out)
    return EXIT_OK if failed == 0 else EXIT_INFEASIBLE


def _stats(ts):
    ts = np.asarray(ts) * 1e6
    return float(np.median(ts)), float(np.percentile(ts, 99))


def cmd_bench(args, out) -> int:
    scenario = scenario_io.load(args.file)
    cfg = _config(args)
    problem = _stance_problem(scenario, cfg)
    solver = ChebySolver()
    first = solver.solve(problem)
    if not first.optimal:
        print(f"stance is {first.status.value}; nothing to benchmark", file=out)
        return EXIT_INFEASIBLE
    n = args.iterations
    if n < 1:
        raise InputError("--iterations must be at least 1")
    if n == 1:
        t0 = time.perf_counter()
        solver.solve(problem)
        print(f"solve_us {(time.perf_counter() - t0) * 1e6:.1f}", file=out)
        return EXIT_OK
    cold, warm = [], []
    for _ in range(n):
        t0 = time.perf_counter()
        solver.solve(problem)
        cold.append(time.perf_counter() - t0)
    prev = first
    for _ in range(n):
        t0 = time.perf_counter()
        prev = solver.solve(problem, solver.warm_start(prev, problem))
        warm.append(time.perf_counter() - t0)
    for name, ts in (("cold", cold), ("warm", warm)):
        med, p99 = _stats(ts)
        print(f"{name} iterations {n} median_us {med:.1f} p99_us {p99:.1f}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebalance", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--weights", help="JSON file with com/force/torque/radius_ratio weights")
        p.add_argument("--scale", action="append", metavar="KEY=VALUE",
                       help="characteristic magnitude override: force=, torque=, length=")
        p.add_argument("--sign", choices=sorted(_SIGN), default="oppose",
                       help="sliding friction direction convention")
        p.add_argument("--filter", choices=[k.value for k in FilterKind], default="paper",
                       help="friction estimator variant")
        p.add_argument("--seed", type=int, default=0, help="noise / corpus seed")

    p = sub.add_parser("solve", help="solve one stance and print the result")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run", help="play a scenario and write its trace")
    p.add_argument("file")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--timing", action="store_true", help="include wall-clock solve times in the trace")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check the QP against the oracles")
    p.add_argument("file", nargs="?")
    p.add_argument("--random", type=int, metavar="N", help="validate N random stances instead of a file")
    p.add_argument("--samples", type=int, default=10_000, help="ball-sampling probes per stance")
    p.add_argument("--format", choices=["text", "json"], default="text")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="time cold and warm solves of a stance")
    p.add_argument("file")
    p.add_argument("--iterations", "-n", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, InputError, ScenarioError, ContactError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
