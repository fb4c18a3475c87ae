"""Command line entry point: ``permsat {solve,suite,analyze,profile,shadow}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .cnf import DimacsError, read_dimacs
from .harness import SuiteConfig, analyze, read_results, run_suite
from .policy import (LbdAtMost, SizeAtMost, add_policy_arguments, policy_from_args,
                     read_config_file, shadow_admission_counts, LBD_GRID, SIZE_GRID)
from .solver import Budget, Solver, Status
from .stats import CentralityUnavailable, emit_stats, usage_centrality_profile

EXIT_CODES = {Status.SAT: 10, Status.UNSAT: 20, Status.UNKNOWN: 0}


def _cmd_solve(args) -> int:
    f = read_dimacs(args.file)
    cfg = policy_from_args(args)
    solver = Solver(f, cfg, seed=args.seed, snapshot_period=args.snapshot_period)
    res = solver.solve(Budget(conflicts=args.conflicts, seconds=args.timeout))
    if args.stats_out:
        emit_stats(res.rows, args.stats_out)
    if args.centrality_out and solver.centrality is not None:
        solver.centrality.to_csv(args.centrality_out)
    st = res.stats
    print(f"c config {cfg.label}")
    print(f"c conflicts {st.conflicts} decisions {st.decisions} propagations {st.propagations} "
          f"restarts {st.restarts} time {st.wall_time:.3f}s")
    if res.final_row is not None:
        r = res.final_row
        print(f"c core {r.core} tier2 {r.tier2} local {r.local} learned {r.learned_total} "
              f"perm_fraction {r.perm_fraction:.4f} hc {r.hc_admitted} aux {r.aux_emitted}")
    if res.status is Status.SAT:
        print("s SATISFIABLE")
        model = res.model
        for i in range(0, len(model), 10):
            print("v " + " ".join(map(str, model[i:i + 10])))
        print("v 0")
    elif res.status is Status.UNSAT:
        print("s UNSATISFIABLE")
    else:
        print("s UNKNOWN")
    return EXIT_CODES[res.status]


def _instance_list(source: str) -> list[str]:
    p = Path(source)
    if p.is_dir():
        return sorted(str(x) for x in p.iterdir() if x.suffix in (".cnf", ".dimacs")
                      or x.name.endswith(".cnf.gz"))
    with open(p) as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]


def _cmd_suite(args) -> int:
    sc = SuiteConfig(_instance_list(args.instances), read_config_file(args.configs),
                     args.timeout, args.jobs, args.seed, args.out)
    results = run_suite(sc)
    solved = sum(r.solved for r in results)
    print(f"{len(results)} runs, {solved} solved, results in {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    results = read_results(args.results)
    everything = not (args.par2 or args.cactus or args.perm_histogram)
    written = analyze(results, args.out_dir, do_par2=args.par2 or everything,
                      do_cactus=args.cactus or everything,
                      do_perm_hist=args.perm_histogram or everything,
                      lc_baseline=args.lc_baseline)
    for key, path in written.items():
        print(f"{key}: {path}")
    return 0


def _cmd_profile(args) -> int:
    f = read_dimacs(args.file)
    cfg = policy_from_args(args)
    try:
        prof = usage_centrality_profile(f, args.conflicts, args.bins, cfg,
                                        budget_ms=args.centrality_budget_ms, seed=args.seed)
    except CentralityUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    prof.to_csv(args.out)
    print(f"{prof.conflicts} conflicts, {prof.learned_total} learned clauses, "
          f"{len(prof.bins)} bins -> {args.out}")
    return 0


def _cmd_shadow(args) -> int:
    """Replay one baseline run's learned-clause stream through the criteria grid."""
    f = read_dimacs(args.file)
    solver = Solver(f, policy_from_args(args), seed=args.seed, record_learned=True)
    solver.solve(Budget(conflicts=args.conflicts, seconds=args.timeout))
    stream = solver.learned_log
    criteria = [SizeAtMost(k) for k in SIZE_GRID] + [LbdAtMost(k) for k in LBD_GRID]
    counts = shadow_admission_counts(stream, criteria)
    with open(args.out, "w") as fh:
        fh.write("criterion,family,k,admitted,stream_length\n")
        for cr in criteria:
            family = "size" if isinstance(cr, SizeAtMost) else "lbd"
            fh.write(f"{cr},{family},{cr.k},{counts[str(cr)]},{len(stream)}\n")
    print(f"{len(stream)} learned clauses replayed -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permsat", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one DIMACS file")
    p.add_argument("file")
    add_policy_arguments(p)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--conflicts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stats-out", default=None)
    p.add_argument("--snapshot-period", type=int, default=1000)
    p.add_argument("--centrality-out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("suite", help="run instances x configurations")
    p.add_argument("--instances", required=True, help="directory or list file")
    p.add_argument("--configs", required=True, help="one policy flag line per configuration")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results.csv")
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("analyze", help="PAR-2, cactus and PERM histograms from results")
    p.add_argument("--results", required=True)
    p.add_argument("--par2", action="store_true")
    p.add_argument("--cactus", action="store_true")
    p.add_argument("--perm-histogram", action="store_true")
    p.add_argument("--lc-baseline", default=None, help="config label used to tag LC instances")
    p.add_argument("--out-dir", default="analysis")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("profile", help="clause usage vs centrality with deletion off")
    p.add_argument("file")
    add_policy_arguments(p)
    p.add_argument("--conflicts", type=int, default=50_000)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="usage_profile.csv")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("shadow", help="criteria grid over a recorded learned-clause stream")
    p.add_argument("file")
    add_policy_arguments(p)
    p.add_argument("--conflicts", type=int, default=None)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="shadow.csv")
    p.set_defaults(func=_cmd_shadow)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DimacsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
