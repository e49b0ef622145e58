"""Command-line front end.

Exit codes: 0 on success, 2 for unreadable or malformed input, 3 when the
model is infeasible (the population never queries a category the user does).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import io as qio
from .errors import QForgeError, UnsupportedCategory
from .optimizer import critical_redundancy, linear_grid, solve, tradeoff_curve, verify_kkt
from .profile import Profile, check_rho, estimate_profile, kl_divergence
from .simulate import SimulationConfig, convergence_report, generate_stream
from .types_lab import enumerate_types, type_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


class InputError(Exception):
    pass


def parse_grid(spec: str) -> list[float]:
    """Parse ``start:stop:steps`` into an inclusive, evenly spaced grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must look like start:stop:steps, got {spec!r}")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InputError(f"bad grid {spec!r}: {exc}") from exc
    return linear_grid(start, stop, steps)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_pair(args) -> tuple[Profile, Profile]:
    q, p = qio.align(qio.load_profile(args.user), qio.load_profile(args.population))
    return q, p


def cmd_solve(args) -> int:
    q, p = _load_pair(args)
    rho = check_rho(args.rho)
    point = solve(q, p, rho)
    report = verify_kkt(q, p, rho, point, oracle_iterations=args.oracle_iters, seed=args.seed)
    if args.format == "csv":
        _emit(qio.curve_to_csv([point]), args.output)
    else:
        _emit(qio.dumps(qio.point_to_dict(point, report)), args.output)
    if args.plot:
        from .plotting import plot_profiles

        plot_profiles({"user": q, "forged": point.r_opt, "apparent": point.s_opt, "population": p}, args.plot)
    return EXIT_OK


def cmd_curve(args) -> int:
    grid = parse_grid(args.grid)
    q, p = _load_pair(args)
    points = tradeoff_curve(q, p, grid)
    if args.format == "json":
        _emit(qio.dumps([qio.point_to_dict(pt) for pt in points]), args.output)
    else:
        _emit(qio.curve_to_csv(points), args.output)
    if args.plot:
        from .plotting import plot_curve

        plot_curve(points, args.plot, rho_crit=critical_redundancy(q, p))
    return EXIT_OK


def cmd_rho_crit(args) -> int:
    q, p = _load_pair(args)
    value = critical_redundancy(q, p)
    if value >= 1.0:
        print("warning: the user queries categories absent from the population; zero risk is unattainable",
              file=sys.stderr)
    _emit(qio.fmt(value) + "\n", args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, loaded = qio.load_simulation(args.config)
    seed = args.seed if args.seed is not None else loaded["seed"]
    q = loaded["user"]
    forged = cfg.r if cfg else None
    population = qio.load_profile(args.population) if args.population else loaded.get("population")
    if population is None:
        population = Profile.uniform(q.categories)
    aligned = qio.align(*[x for x in (q, population, forged) if x is not None])
    q, population = aligned[0], aligned[1]
    if forged is None:
        forged = solve(q, population, loaded["rho"]).r_opt
    else:
        forged = aligned[2]
    cfg = SimulationConfig(q, forged, loaded["rho"], loaded["total_queries"], seed, loaded["exact_forgery"])
    stream = generate_stream(cfg)
    rep = convergence_report(stream, cfg.q, cfg.r, cfg.rho, population)
    out = qio.report_to_dict(rep)
    out.update({
        "rho": cfg.rho,
        "seed": cfg.seed,
        "forged_count": int(stream.forged.sum()),
        "forged": list(cfg.r.pmf),
        "initial_risk": kl_divergence(cfg.q, population),
    })
    _emit(qio.dumps(out), args.output)
    if args.stream:
        with open(args.stream, "w", encoding="utf-8") as fh:
            stream.write_jsonl(fh)
    return EXIT_OK


def cmd_types(args) -> int:
    if args.tbar:
        tbar = qio.load_profile(args.tbar)
        n = args.n if args.n is not None else tbar.n
        if n != tbar.n:
            raise InputError(f"--n {n} disagrees with the {tbar.n} categories of {args.tbar}")
    else:
        if args.n is None:
            raise InputError("types needs --n or --tbar")
        n = args.n
        tbar = Profile.uniform([f"c{i}" for i in range(n)])
    reports = [type_report(tv, tbar) for tv in enumerate_types(n, args.k)]
    if args.format == "csv":
        _emit(qio.type_reports_to_csv(reports), args.output)
    else:
        _emit(qio.dumps([qio.type_report_to_dict(r) for r in reports]), args.output)
    return EXIT_OK


def cmd_estimate(args) -> int:
    prof = estimate_profile(qio.load_counts(args.counts))
    _emit(qio.dumps(qio.profile_to_dict(prof)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qforge", description="Query-forgery privacy toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def pair(sp):
        sp.add_argument("--user", required=True, help="user profile JSON")
        sp.add_argument("--population", required=True, help="population profile JSON")

    sp = sub.add_parser("solve", help="optimal forged profile at one redundancy")
    pair(sp)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--oracle-iters", type=int, default=None,
                    help="also run the exponentiated-gradient cross-check for this many iterations")
    sp.add_argument("--seed", type=int, default=0, help="oracle starting point seed")
    sp.add_argument("--plot", help="write a PNG comparing user, forged, apparent and population profiles")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("curve", help="privacy-redundancy curve over a grid")
    pair(sp)
    sp.add_argument("--grid", required=True, help="start:stop:steps, inclusive")
    sp.add_argument("--format", choices=["json", "csv"], default="csv")
    sp.add_argument("--plot", help="write a PNG of the curve")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("rho-crit", help="smallest redundancy reaching zero risk")
    pair(sp)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_rho_crit)

    sp = sub.add_parser("simulate", help="simulate a mixed query stream")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--population", help="population profile JSON (overrides the config)")
    sp.add_argument("--stream", help="also write the stream as JSON Lines")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("types", help="exhaustive method-of-types report")
    sp.add_argument("--n", type=int, default=None, help="alphabet size (uniform source unless --tbar)")
    sp.add_argument("--k", type=int, required=True, help="number of draws")
    sp.add_argument("--tbar", help="source profile JSON")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_types)

    sp = sub.add_parser("estimate", help="relative-frequency profile from counts")
    sp.add_argument("--counts", required=True)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_estimate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedCategory as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, QForgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
