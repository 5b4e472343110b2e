"""Command-line entry point: ``robust-bai <command> ...``.

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..complexity import complexity_report
from ..core import BaiError, DomainError, gaps_from_means
from ..environments import preset
from .config import ConfigError, ExperimentConfig, load_config, validate
from .engine import monte_carlo
from .report import emit_csv, format_table1, table1

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("robust_bai")


def _means_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of reals: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robust-bai", description="Fixed-budget best-arm identification experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table1", help="complexities of the eight benchmark setups")
    t.add_argument("--rounded-gaps", action="store_true", help="round setup C gaps to three decimals")
    t.add_argument("--setup-e-mode", choices=("table", "printed"), default="table")

    c = sub.add_parser("complexity", help="complexity measures of one instance")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--setup", choices=list("ABCDEFGH"))
    g.add_argument("--means", type=_means_arg)
    c.add_argument("--setup-e-mode", choices=("table", "printed"), default="table")
    c.add_argument("--setup-c-gaps", choices=("exact", "rounded3"), default="exact")

    s = sub.add_parser("simulate", help="Monte Carlo error rates from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int)
    s.add_argument("--out")

    a = sub.add_parser("adversary", help="error rates against an adversarial construction")
    a.add_argument("--kind", required=True, choices=("switch", "two-phase", "deception"))
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--setup", choices=list("ABCDEFGH"))
    g.add_argument("--means", type=_means_arg)
    a.add_argument("--bar-k", type=int)
    a.add_argument("--i", type=int)
    a.add_argument("--learner", action="append", required=True, help="repeat or comma-separate")
    a.add_argument("-n", type=int, required=True)
    a.add_argument("-R", "--repetitions", type=int, default=1000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--member", help="sto|adv for switch, adv1|adv2 for two-phase")
    a.add_argument("--switch-round", type=int)
    a.add_argument("--pre-switch-mean", type=float)
    a.add_argument("--post-switch-mean", type=float)
    a.add_argument("--blackout-until", type=int)
    a.add_argument("--workers", type=int)
    a.add_argument("--out")
    return p


def _cmd_table1(args) -> int:
    sys.stdout.write(format_table1(table1(rounded_gaps=args.rounded_gaps, setup_e_mode=args.setup_e_mode)))
    return EXIT_OK


def _cmd_complexity(args) -> int:
    if args.setup:
        means = preset(args.setup, setup_e_mode=args.setup_e_mode, setup_c_gaps=args.setup_c_gaps)
    else:
        means = args.means
    try:
        profile = gaps_from_means(means)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    r = complexity_report(profile)
    alloc = np.asarray(r.argmin_allocation.a[:-1])
    print(f"K       {profile.K}")
    print(f"H1      {r.h1:.10g}")
    print(f"H_SR    {r.h_sr:.10g}")
    print(f"H_BOB   {r.h_bob:.10g}")
    print(f"H_UNIF  {r.h_unif:.10g}")
    print(f"H_P1    {r.h_p1:.10g}  ({r.argmin_allocation.family})")
    print("a       " + ",".join("%.6g" % x for x in alloc))
    return EXIT_OK


def _run(cfg: ExperimentConfig) -> int:
    report = monte_carlo(cfg)
    for row in report.rows:
        log.info("%s %s: %d/%d errors in %.2fs (%d tied episodes skipped)",
                 row.setup, row.learner, row.errors, row.repetitions, row.wall_time, row.tied)
    emit_csv(report, cfg.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = args.out
    return _run(cfg)


def _cmd_adversary(args) -> int:
    learners = tuple(x.strip() for item in args.learner for x in item.split(",") if x.strip())
    cfg = ExperimentConfig(
        setup=args.setup,
        means=args.means,
        learners=learners,
        n=args.n,
        repetitions=args.repetitions,
        master_seed=args.seed,
        workers=args.workers or 1,
        out=args.out,
        adversary=args.kind,
        member=args.member,
        bar_k=args.bar_k,
        i=args.i,
        switch_round=args.switch_round,
        pre_switch_mean=args.pre_switch_mean,
        post_switch_mean=args.post_switch_mean,
        blackout_until=args.blackout_until,
    )
    return _run(validate(cfg))


_COMMANDS = {
    "table1": _cmd_table1,
    "complexity": _cmd_complexity,
    "simulate": _cmd_simulate,
    "adversary": _cmd_adversary,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BaiError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
