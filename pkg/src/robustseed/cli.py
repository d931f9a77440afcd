"""Command line entry point: ``robustseed {gen,prep,run,suite,verify}``.

Exit codes: 0 success, 1 usage or config error, 2 runtime error, 3 verify failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench, data
from .seeding import Algorithm

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "markdown", "json"], default="markdown")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="parallel repetitions")
    p.add_argument("--no-timing", action="store_true", help="omit the time column (for diffing)")
    p.add_argument("--cost-scale", type=float, default=1.0, help="divide printed costs by this")


def _add_synthetic(p: argparse.ArgumentParser, prefix: str = "") -> None:
    p.add_argument(f"--{prefix}n", type=int, default=1000, help="inlier count")
    p.add_argument(f"--{prefix}d", type=int, default=2)
    p.add_argument("--side", type=float, default=100.0)
    p.add_argument("--sigma", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robustseed", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic planted instance as CSV plus manifest")
    _add_synthetic(g)
    g.add_argument("--k", type=int, default=20)
    g.add_argument("--z", type=int, default=25)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    pr = sub.add_parser("prep", help="apply a real-data outlier recipe to a raw file")
    pr.add_argument("--recipe", choices=data.RECIPES, required=True)
    pr.add_argument("--input", required=True, help="raw downloaded data file")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--noise-sigma", type=float, help="absolute noise std (default 5x column std)")
    pr.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run one experiment (or all five methods) and print a table")
    r.add_argument("--data", help="CSV written by gen/prep; default: synthetic from the flags below")
    _add_synthetic(r)
    r.add_argument("--data-seed", type=int, default=0)
    r.add_argument("--algorithm", default="ROBUST", help="RAND, KMPP, TKMPP, RKMPP, ROBUST or 'all'")
    r.add_argument("--k", type=int, default=20)
    r.add_argument("--z", type=int, default=25)
    r.add_argument("--t", type=int)
    r.add_argument("--eta", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--eta-mapping", choices=["inverse", "equal", "both"], default="inverse",
                   help="how eta follows from beta when --eta is absent")  # fmt: skip
    r.add_argument("--alpha", type=float, default=0.5)
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--c", type=float)
    r.add_argument("--cost-guess", type=float)
    r.add_argument("--marked", type=int, help="number of predicted outliers (default z)")
    r.add_argument("--reps", type=int, default=10)
    r.add_argument("--seed", type=int, default=0, help="base seed; repetition r uses seed+r")
    r.add_argument("--lloyd", action="store_true", help="one trimmed Lloyd pass after seeding")
    _add_output(r)

    s = sub.add_parser("suite", help="run a JSON list of experiment configs")
    s.add_argument("config")
    _add_output(s)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--level", choices=["fast", "full"], default="fast")
    return parser


def _dataset_source(args) -> bench.DatasetSource:
    if args.data:
        return bench.DatasetSource(kind="csv", path=args.data)
    return bench.synthetic_source(
        n=args.n, d=args.d, k=args.k, z=args.z, seed=args.data_seed, side=args.side, sigma=args.sigma
    )


def _run_configs(args) -> list[bench.ExperimentConfig]:
    src = _dataset_source(args)
    mappings = ("inverse", "equal") if args.eta_mapping == "both" else (args.eta_mapping,)
    if args.algorithm.lower() == "all":
        if args.beta is None:
            raise UsageError("--algorithm all needs --beta (shared by TKM++ and the robust seeder)")
        cfgs = bench.table_configs(
            src, args.k, args.z, args.beta, args.alpha, args.delta, args.reps, args.seed,
            eta_mappings=mappings, n_marked=args.marked,
        )  # fmt: skip
        for cfg in cfgs:
            cfg.t, cfg.c, cfg.lloyd = args.t, args.c, args.lloyd
        return cfgs
    common = dict(
        algorithm=args.algorithm, k=args.k, z=args.z, dataset=src, t=args.t, eta=args.eta,
        beta=args.beta, alpha=args.alpha, delta=args.delta, c=args.c, cost_guess=args.cost_guess,
        n_marked=args.marked, repetitions=args.reps, base_seed=args.seed, lloyd=args.lloyd,
    )  # fmt: skip
    if Algorithm.parse(args.algorithm) is Algorithm.ROBUST and args.eta is None:
        return [bench.ExperimentConfig(eta_from_beta=m, **common) for m in mappings]
    return [bench.ExperimentConfig(**common)]


def cmd_gen(args) -> int:
    spec = data.SyntheticSpec(
        n=args.n, d=args.d, k=args.k, z=args.z, side=args.side, sigma=args.sigma, rng_seed=args.seed
    )
    ds = data.generate_synthetic(spec)
    data.write_csv(args.out, ds)
    data.write_manifest(args.out + ".manifest.json", ds.manifest(rng_seed=args.seed, label_recipe="planted"))
    return EXIT_OK


def cmd_prep(args) -> int:
    ds = data.prepare(args.recipe, args.input, seed=args.seed, noise_sigma=args.noise_sigma)
    data.write_csv(args.out, ds)
    data.write_manifest(args.out + ".manifest.json", ds.manifest())
    return EXIT_OK


def _report(rows, args) -> int:
    text = bench.format_rows(rows, args.format, cost_scale=args.cost_scale, timing=not args.no_timing)
    _emit(text, args.out)
    return EXIT_RUNTIME if any(r.error for r in rows) else EXIT_OK


def cmd_run(args) -> int:
    try:
        cfgs = _run_configs(args)
    except (ValueError, UsageError) as exc:
        raise UsageError(str(exc)) from exc
    if len(cfgs) == 1:
        rows = [bench.run_experiment(cfgs[0], threads=args.threads)]
    else:
        rows = bench.run_suite(cfgs, threads=args.threads)
    return _report(rows, args)


def cmd_suite(args) -> int:
    try:
        cfgs = bench.load_suite(args.config)
    except (ValueError, TypeError, OSError) as exc:
        raise UsageError(f"bad suite file: {exc}") from exc
    return _report(bench.run_suite(cfgs, threads=args.threads), args)


def cmd_verify(args) -> int:
    from .verification import verify

    results = verify(args.level)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"gen": cmd_gen, "prep": cmd_prep, "run": cmd_run, "suite": cmd_suite, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("robustseed: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"robustseed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).debug("runtime failure", exc_info=True)
        print(f"robustseed: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
