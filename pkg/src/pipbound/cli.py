"""Command line: ``analyze``, ``simulate`` and ``check``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .check import dominance_violations, parse_state, state_grid
from .driver import AnalysisConfig, AnalysisReport, analyze
from .parser import ParseError, load_program
from .pip import PIP, validate
from .sim import Scheduler, SimStats, estimate

EXIT_OK, EXIT_ERROR, EXIT_INFINITE, EXIT_UNSOUND = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit with 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _build() -> argparse.ArgumentParser:
    ap = _Parser(prog="pipbound", description="Expected runtime and size bounds for probabilistic integer programs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def analysis_flags(sp):
        sp.add_argument("file")
        sp.add_argument("--rounds", type=int, default=5, help="maximal improvement rounds (default 5)")
        sp.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds")
        sp.add_argument("--no-invariants", action="store_true", help="skip interval invariants")

    def sim_flags(sp, required: bool):
        sp.add_argument("--x0", required=required, action="append" if not required else None,
                        help="initial state: k for all variables or x=..,y=..")
        sp.add_argument("--trials", type=int, default=10_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--cap", type=int, default=100_000, help="step cap per trial")
        sp.add_argument("--box", type=int, default=16, help="temporaries range over [-box, box]")

    a = sub.add_parser("analyze", help="infer bounds")
    analysis_flags(a)
    a.add_argument("--json", action="store_true", help="print the report as JSON")

    s = sub.add_parser("simulate", help="Monte-Carlo estimates")
    s.add_argument("file")
    sim_flags(s, required=True)
    s.add_argument("--scheduler", choices=("first", "random"), default="first")

    c = sub.add_parser("check", help="analyze, simulate and compare")
    analysis_flags(c)
    sim_flags(c, required=False)
    c.add_argument("--scheduler", choices=("first", "random", "all"), default="all")
    return ap


def _load(path: str) -> PIP:
    p = load_program(path)
    errors = validate(p)
    if errors:
        raise ValueError("; ".join(errors))
    return p


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(max_rounds=args.rounds, timeout=args.timeout, no_invariants=args.no_invariants)


def format_report(r: AnalysisReport) -> str:
    lines = []
    if not r.program.general_transitions:
        lines.append("No transitions after preprocessing.")
    for g in r.program.general_transitions:
        lines.append(f"RT_E({g.id}) = {r.rt_e[g.id]}")
    for a, b in r.sz_e.items():
        lines.append(f"S_E({a.g}, {a.loc}, {a.var}) = {b}")
    if r.removed:
        lines.append("Removed: " + ", ".join(r.removed))
    if r.timed_out:
        lines.append("Timed out: bounds are sound but may be weak.")
    lines.append(f"Total: {r.total}")
    lines.append(f"Class: {r.cls}")
    return "\n".join(lines)


def format_stats(st: SimStats) -> str:
    lines = [f"trials {st.trials}  completed {st.completed}  cap hits {st.cap_hits}  faults {st.faults}",
             f"{'quantity':<28}{'mean':>14}{'se':>12}"]
    for gid, m in st.rt_mean.items():
        lines.append(f"{'R(' + gid + ')':<28}{m:>14.4f}{st.rt_se[gid]:>12.4f}")
    for a, m in st.size_mean.items():
        lines.append(f"{'S' + str(a):<28}{m:>14.4f}{st.size_se[a]:>12.4f}")
    return "\n".join(lines)


def _analyze(args) -> int:
    r = analyze(_load(args.file), _config(args))
    if args.json:
        print(json.dumps(r.to_json(), indent=2))
    else:
        print(format_report(r))
    return EXIT_OK if r.total.is_finite else EXIT_INFINITE


def _simulate(args) -> int:
    p = _load(args.file)
    s0 = parse_state(args.x0, p.pv)
    sch = Scheduler(args.scheduler, seed=args.seed, box=args.box)
    print(format_stats(estimate(p, s0, sch, args.trials, args.cap, args.seed)))
    return EXIT_OK


def _check(args) -> int:
    p = _load(args.file)
    r = analyze(p, _config(args))
    print(f"Total: {r.total}")
    states = [parse_state(x, p.pv) for x in args.x0] if args.x0 else list(state_grid(p))
    strategies = ("first", "random") if args.scheduler == "all" else (args.scheduler,)
    failed = 0
    for strategy in strategies:
        sch = Scheduler(strategy, seed=args.seed, box=args.box)
        for s0 in states:
            st = estimate(p, s0, sch, args.trials, args.cap, args.seed)
            bad = dominance_violations(r, st, s0)
            label = ",".join(f"{x}={v}" for x, v in s0.items()) or "-"
            status = "ok" if not bad else "FAIL"
            print(f"{sch} s0[{label}]: {status} (completed {st.completed}/{st.trials})")
            for v in bad:
                print(f"  {v}")
            failed += bool(bad)
    return EXIT_UNSOUND if failed else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _build().parse_args(argv)
    try:
        return {"analyze": _analyze, "simulate": _simulate, "check": _check}[args.command](args)
    except (ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
