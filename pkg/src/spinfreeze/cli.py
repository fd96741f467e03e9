"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 numerical-contract violation.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import NumericalError, ValidationError
from .expr import evaluate
from .runner import execute, oracle_check, sweep_flip_times
from .scenario import load_scenario, parse_grid

log = logging.getLogger("spinfreeze")


class _Parser(argparse.ArgumentParser):
    # Bad arguments are invalid input (exit 1); 2 is reserved for numerics.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _alpha(text: str) -> float:
    try:
        return evaluate(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text: str):
    try:
        return parse_grid(text, locus="grid")
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip().isidentifier():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), _alpha(value)


def _emit(table, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(table.to_csv())
    else:
        table.write(out)
        log.info("wrote %d rows to %s", len(table.rows), out)


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario, alpha=args.alpha)
    _emit(execute(scenario, overrides=dict(args.param)), args.out)
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario, alpha=args.alpha)
    spec = scenario.sweep_spec(args.t1, args.t2, args.readout)
    _emit(sweep_flip_times(scenario, spec, jobs=args.jobs), args.out)
    return 0


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario, alpha=args.alpha)
    net = scenario.network
    print(f"{scenario.name}: ok")
    print(f"  sites={net.n_sites} edges={len(net.edges)} alpha={net.alpha:g}")
    print(f"  init={scenario.init_label} events={len(scenario.events)} samples={len(scenario.sample_times)}")
    print(f"  columns={','.join(scenario.columns)}")
    return 0


def cmd_oracle_check(args) -> int:
    scenario = load_scenario(args.scenario, alpha=args.alpha)
    report = oracle_check(scenario, max_n=args.max_n, overrides=dict(args.param))
    for line in report.lines():
        print(line)
    if not report.passed:
        raise NumericalError("single-excitation engine disagrees with the full-space oracle")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_alpha, default=None, help="override the scenario's coupling scale")
    common.add_argument("-v", "--verbose", action="store_true")
    params = argparse.ArgumentParser(add_help=False)
    params.add_argument(
        "--param", type=_param, action="append", default=[], metavar="NAME=VALUE",
        help="bind an event-time parameter (alpha*t units); repeatable",
    )

    parser = _Parser(
        prog="spinfreeze",
        description="Entanglement distribution and freezing in XY spin networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common, params], help="run a scenario and write its observables as CSV")
    p.add_argument("scenario")
    p.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="tabulate frozen E_F over flip times (t1, t2)")
    p.add_argument("scenario")
    p.add_argument("--t1", type=_grid, default=None, metavar="START:STOP:N", help="alpha*t grid for t1")
    p.add_argument("--t2", type=_grid, default=None, metavar="START:STOP:N", help="alpha*t grid for t2")
    p.add_argument("--readout", type=_alpha, default=None, help="alpha*t at which the state is read out")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", parents=[common], help="parse and check a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle-check", parents=[common, params], help="compare against full 2^N evolution")
    p.add_argument("scenario")
    p.add_argument("--max-n", type=int, default=12)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
