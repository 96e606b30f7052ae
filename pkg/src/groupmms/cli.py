"""``groupmms`` command line.

Exit codes: 0 success, 1 usage or input error, 2 size guard, 3 verification
failure (a claim or guarantee that did not hold).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algorithms import ShapeError, solve
from .core import InstanceError, format_rational, parse_instance
from .experiments import ExperimentConfig, markdown_table, run_experiment, write_csv
from .hard import NAMES, PARAMS, HardInstanceSpec, generate, verify_claim
from .maximin import SizeGuardError, best_egalitarian_ratio, certify, mms

EXIT_USAGE, EXIT_GUARD, EXIT_VERIFY = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2)


def _load_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def _hard_spec(args) -> HardInstanceSpec:
    params = {}
    if args.param is not None:
        if args.name not in PARAMS:
            raise UsageError(f"{args.name} takes no parameter")
        params[PARAMS[args.name][0]] = args.param
    elif args.name in PARAMS:
        raise UsageError(f"{args.name} needs --param {PARAMS[args.name][0]}")
    return HardInstanceSpec(args.name, params)


def cmd_mms(args) -> int:
    instance = _load_instance(args.instance)
    vector = instance.utility(args.group, args.agent)
    k = instance.k if args.k is None else args.k
    result = mms(vector, k)
    if args.json:
        print(_dump({"group": args.group, "agent": args.agent, "k": k, **result.to_dict()}))
    else:
        print(f"maximin share: {format_rational(result.value)}")
        print("witness: " + " | ".join("{" + ", ".join(map(str, sorted(b))) + "}" for b in result.witness))
    return 0


def cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    allocation, name, ratio = solve(instance, args.algorithm)
    report = certify(instance, allocation)
    ok = report.min_ratio >= ratio
    if args.json:
        print(_dump({
            "algorithm": name,
            "guarantee": format_rational(ratio),
            "assignment": list(allocation.assignment),
            "report": report.to_dict(),
            "guarantee_met": ok,
        }))
    else:
        print(f"algorithm: {name} (guarantee {format_rational(ratio)})")
        for i, bundle in enumerate(allocation.bundles(instance.k)):
            print(f"group {i}: {sorted(bundle)}")
        for r in report.per_agent:
            print(
                f"  agent ({r.group},{r.agent}): utility {format_rational(r.achieved)}, "
                f"mms {format_rational(r.mms)}, ratio {format_rational(r.ratio)}"
            )
        print(f"min ratio: {format_rational(report.min_ratio)}")
    if not ok:
        print("guarantee violated", file=sys.stderr)
        return EXIT_VERIFY
    return 0


def cmd_best_ratio(args) -> int:
    instance = _load_instance(args.instance)
    result = best_egalitarian_ratio(instance, n_jobs=args.jobs)
    if args.json:
        print(_dump({
            "best_ratio": format_rational(result.best_ratio),
            "assignment": list(result.argmax_allocation.assignment),
        }))
    else:
        print(f"best ratio: {format_rational(result.best_ratio)}")
        print(f"allocation: {list(result.argmax_allocation.assignment)}")
    return 0


def cmd_hard(args) -> int:
    instance = generate(_hard_spec(args))
    text = instance.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    report = verify_claim(_hard_spec(args), n_jobs=args.jobs)
    if args.json:
        print(_dump(report.to_dict()))
    else:
        print(f"{report.spec.label}: {report.message()}")
    return 0 if report.ok else EXIT_VERIFY


def cmd_experiment(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid config JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    try:
        config = ExperimentConfig.from_dict(doc)
    except TypeError as exc:
        raise UsageError(f"bad config: {exc}") from None
    table = run_experiment(config, n_jobs=args.jobs)
    path = write_csv(table, args.out_dir)
    if args.json:
        print(_dump(table.to_dict()))
    elif args.markdown:
        sys.stdout.write(markdown_table([table]))
    else:
        sys.stdout.write(table.to_csv())
    print(f"wrote {path} ({table.wall_time:.1f}s)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groupmms", description="Maximin share allocation for groups of agents.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mms", help="maximin share of one agent")
    p.add_argument("--instance", required=True)
    p.add_argument("--group", type=int, required=True)
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--k", type=int, help="number of bundles (default: number of groups)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("solve", help="run the approximation algorithm for the instance's shape")
    p.add_argument("--instance", required=True)
    p.add_argument(
        "--algorithm",
        default="auto",
        choices=["auto", "cut-and-choose", "two-one", "many-one", "two-two", "three-two", "singletons"],
    )
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("best-ratio", help="exhaustive best egalitarian MMS ratio")
    p.add_argument("--instance", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_best_ratio)

    p = sub.add_parser("hard", help="write a catalog instance as JSON")
    p.add_argument("--name", required=True, choices=NAMES)
    p.add_argument("--param", type=int, help="n1 for thm2_manyone, k for thm7_multigroup")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hard)

    p = sub.add_parser("verify", help="verify a catalog instance's claimed best ratio")
    p.add_argument("--name", required=True, choices=NAMES)
    p.add_argument("--param", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="run a random-instance experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--markdown", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, InstanceError, ShapeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
