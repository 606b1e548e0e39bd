"""``artifact`` command line: completeness, soundness, cascade and repeat runs."""

from __future__ import annotations

import argparse
import sys

from ..adversaries import ADVERSARIES
from ..errors import ArtifactError
from .experiments import DPCPS, ExperimentConfig, run_cascade, run_completeness, run_soundness
from .report import emit_report


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--circuit", default="and", help="builtin name (and, or, five, five_fn) or a .circ path")
    sp.add_argument("--field", type=int, default=101, help="prime modulus p")
    sp.add_argument("--dpcp", choices=DPCPS, default="qh")
    sp.add_argument("--recipe", default=None, help="composition chain such as qh*qh or rm*qh")
    sp.add_argument("--h", type=int, default=2, help="RM subcube side")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--batch-size", type=int, default=100)
    sp.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte-identity)")
    _output(sp)


def _output(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out", default=None, help="report path; '-' or absent prints to stdout")
    sp.add_argument("--format", choices=("json", "csv"), default="json")


def _adversary(sp: argparse.ArgumentParser, required: bool) -> None:
    sp.add_argument("--adversary", choices=sorted(ADVERSARIES), required=required)
    sp.add_argument("--rho", type=float, default=0.1, help="corruption fraction for corrupted-honest")


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description="Decodable PCP experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("completeness", help="honest proofs; expects acceptance and correctness 1.0")
    _common(sp)
    sp = sub.add_parser("soundness", help="adversarial Monte-Carlo against the decoder envelope")
    _common(sp)
    _adversary(sp, True)
    sp = sub.add_parser("repeat", help="sequential repetition of a soundness (or honest) run")
    _common(sp)
    _adversary(sp, False)
    sp.add_argument("--rounds", type=int, default=2)
    sp = sub.add_parser("cascade", help="Stage I-III parameter calculator")
    sp.add_argument("--L", type=float, default=2.0 ** 20, help="lg N")
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--field-bits", type=float, default=None, help="lg |F|; default L^(1-eps)")
    sp.add_argument("--c", type=float, default=1.0, help="randomness constant")
    sp.add_argument("--stages", default="I,II,III")
    sp.add_argument("--digits", type=int, default=15)
    _output(sp)
    return ap


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        circuit=args.circuit, p=args.field, dpcp=args.dpcp, recipe=args.recipe, h=args.h, trials=args.trials,
        seed=args.seed, adversary=getattr(args, "adversary", None), rho=getattr(args, "rho", 0.1),
        rounds=getattr(args, "rounds", 1), batch_size=args.batch_size, timing=args.timing,
    )


def _summary(report: dict) -> str:
    verdict = "PASS" if report["passed"] else "FAIL"
    if report["kind"] == "cascade":
        s = report["summary"]
        return f"{verdict} cascade: i*={report['i_star']} m0={s['m0']} delta_I={s['delta_I_display']}"
    env = report["envelope"]
    rate = report["statistic_rate"]
    adv = (report.get("adversary") or {}).get("name")
    head = f"{verdict} {report['kind']} {report['decoder']['decoder']}" + (f" vs {adv}" if adv else "")
    return (f"{head}: acceptance {report['acceptance_rate']:.4f} ({report['accepted']}/{report['trials']}), "
            f"{report['statistic']} {rate:.4f} vs {env['label']} threshold {env['threshold']:.4f}")


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        if args.command == "cascade":
            report = run_cascade(args.L, args.eps, lg_field=args.field_bits, c=args.c, stages=args.stages,
                                 digits=args.digits)
        else:
            cfg = _config(args)
            if args.command == "completeness" or (args.command == "repeat" and not cfg.adversary):
                report = run_completeness(cfg)
            else:
                report = run_soundness(cfg)
        to_stdout = args.out in (None, "-")
        emit_report(report, args.format, "-" if to_stdout else args.out)
        print(_summary(report), file=sys.stderr if to_stdout else sys.stdout)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
