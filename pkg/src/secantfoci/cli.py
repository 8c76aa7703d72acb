"""Command-line entry point: ``secantfoci <verb> [flags]``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .canonical import adjoint_basis, make_pencil, sweep_pencil
from .curves import dumps_curve, feasibility_params, load_curve, random_nodal_curve, validate_curve
from .errors import FociError
from .experiments import (
    PRESETS,
    FiberTask,
    run_tasks,
    select_fibers,
    census,
    derive_seed,
    fiber_rnc_experiment,
    pencil_summary,
    run_preset,
    torelli_reconstruct,
)
from .field import DEFAULT_PRIME
from .report import dumps_report, validate_report


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _curve(args):
    if args.curve:
        return load_curve(args.curve)
    if args.g is None or args.d is None:
        raise SystemExit("error: give a curve file or --g and --d")
    return random_nodal_curve(feasibility_params(args.g, args.d), args.seed, args.prime)


def _fiber_tasks(args, curve, second_order: bool) -> list:
    sweep = sweep_pencil(make_pencil(curve, args.node))
    info = pencil_summary(curve, adjoint_basis(curve), args.node, sweep, curve.params.rho)
    if len(info["vertex_fibers"]) < 2:
        return []
    rng = random.Random(derive_seed(args.seed, "cli", args.node))
    ref = info["vertex_fibers"][0]
    chosen = select_fibers(sweep.split, args.fibers, {ref}, rng)
    text = dumps_curve(curve)
    return [
        FiberTask(text, args.node, t, ref, info["vertex"], args.tmax, second_order, f"{args.seed}:cli:{args.node}:{t}")
        for t in chosen
    ]


def cmd_gen(args) -> int:
    curve = random_nodal_curve(feasibility_params(args.g, args.d), args.seed, args.prime)
    _emit(dumps_curve(curve), args.out)
    return 0


def cmd_validate(args) -> int:
    curve = load_curve(args.curve, verify=False)
    _emit(_dump(validate_curve(curve, seed=args.seed).to_dict()), args.out)
    return 0


def cmd_focal(args, second_order: bool = False) -> int:
    curve = _curve(args)
    records = run_tasks(_fiber_tasks(args, curve, second_order), args.threads)
    _emit(_dump({"census": census(records), "fibers": records}), args.out)
    return 0


def cmd_fiber_rnc(args) -> int:
    curve = _curve(args)
    frame = adjoint_basis(curve)
    sweeps = {}
    for node in range(curve.delta):
        sweeps[node] = sweep_pencil(make_pencil(curve, node)).split
        if sum(len(v) - 1 for v in sweeps.values()) >= args.fibers:
            break
    _emit(_dump(fiber_rnc_experiment(curve, frame, sweeps, args.fibers, derive_seed(args.seed, "cli-control"))), args.out)
    return 0


def cmd_torelli(args) -> int:
    curve = _curve(args)
    records = []
    for node in range(min(2, curve.delta)):
        args.node = node
        records += run_tasks(_fiber_tasks(args, curve, True), args.threads)
    _emit(_dump(torelli_reconstruct(records)), args.out)
    return 0


def cmd_preset(args) -> int:
    report = run_preset(args.name, args.seed, threads=args.threads, timing=args.timing, p=args.prime, tmax=args.tmax, fibers_per_curve=args.fibers)
    validate_report(report)
    _emit(dumps_report(report), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=DEFAULT_PRIME, help="field characteristic")
    common.add_argument("--seed", type=int, default=42, help="master seed")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--fibers", type=int, default=None, help="fibers per curve")
    common.add_argument("--tmax", type=int, default=5, help="Hilbert function cutoff")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing in reports")

    parser = argparse.ArgumentParser(prog="secantfoci", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a random nodal plane model")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", parents=[common], help="run the curve validation checks")
    p.add_argument("curve")
    p.set_defaults(func=cmd_validate)

    for verb, func in [
        ("focal", cmd_focal),
        ("second-order", lambda a: cmd_focal(a, second_order=True)),
        ("fiber-rnc", cmd_fiber_rnc),
        ("torelli", cmd_torelli),
    ]:
        p = sub.add_parser(verb, parents=[common])
        p.add_argument("curve", nargs="?", help="curve JSON file; omit to generate from --g/--d")
        p.add_argument("--g", type=int)
        p.add_argument("--d", type=int)
        p.add_argument("--node", type=int, default=0, help="node whose line pencil is used")
        p.set_defaults(func=func)

    p = sub.add_parser("preset", parents=[common], help="run a named experiment preset")
    p.add_argument("name", choices=sorted(PRESETS))
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb != "preset" and args.fibers is None:
        args.fibers = 10 if args.verb != "fiber-rnc" else 30
    try:
        return args.func(args)
    except FociError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
