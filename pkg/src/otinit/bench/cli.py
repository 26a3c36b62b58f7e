"""``otinit`` command line: ``bench`` runs a suite, ``solve`` one problem."""

from __future__ import annotations

import argparse
import logging
import sys

from ..initializers import initialize, parse_initializer
from ..measures import MeasureError, build_cost_sqeuclidean, read_measure, read_point_clouds
from ..sinkhorn import (
    SinkhornConfig,
    coupling_from_duals,
    dual_objective,
    marginal_error,
    parse_acceleration,
    sinkhorn_solve,
)
from .runner import ConfigError, ExperimentConfig, load_config, run_suite

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _build_parser():
    p = argparse.ArgumentParser(prog="otinit", description="Warm-started Sinkhorn benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run an initializer x acceleration suite and write CSV")
    b.add_argument("--config", help="flat key = value file mirroring the experiment fields")
    b.add_argument("--dataset")
    b.add_argument("--n", help="comma-separated sizes")
    b.add_argument("--epsilon", help="comma-separated regularization values")
    b.add_argument("--tau", type=float)
    b.add_argument("--init", help="comma-separated initializer tags")
    b.add_argument("--accel", help="comma-separated acceleration tags")
    b.add_argument("--seeds", type=int)
    b.add_argument("--max-iters", type=int)
    b.add_argument("--master-seed", type=int)
    b.add_argument("--jobs", type=int)
    b.add_argument("--out", help="per-run CSV path (summary written next to it)")

    s = sub.add_parser("solve", help="solve one problem read from measure files")
    s.add_argument("--mu", required=True, help="measure file, or a paired file holding both measures")
    s.add_argument("--nu", help="measure file for nu (omit when --mu is a paired file)")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--init", default="zero")
    s.add_argument("--accel", default="none")
    s.add_argument("--tau", type=float, default=0.01)
    s.add_argument("--max-iters", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    return p


def _bench_config(args) -> ExperimentConfig:
    overrides = {
        "dataset": args.dataset, "sizes": args.n, "epsilon": args.epsilon, "tau": args.tau,
        "initializers": args.init, "accelerations": args.accel, "seeds": args.seeds,
        "max_iters": args.max_iters, "master_seed": args.master_seed, "jobs": args.jobs,
        "out_path": args.out,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        base = load_config(args.config)
        values = {**base.__dict__, **overrides}
        return ExperimentConfig(**values)
    missing = [k for k in ("dataset", "sizes", "epsilon") if k not in overrides]
    if missing:
        raise ConfigError("without --config, --dataset, --n and --epsilon are required")
    return ExperimentConfig(**overrides)


def _bench(args) -> int:
    try:
        config = _bench_config(args)
    except ConfigError as exc:
        print(f"otinit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    records = run_suite(config)
    failed = [r for r in records if not r.converged]
    for r in records:
        print(f"{r.dataset} n={r.n} eps={r.epsilon:g} init={r.init} accel={r.accel} "
              f"seed={r.seed} iters={r.iterations} converged={str(r.converged).lower()}"
              + (f" ({r.note})" if r.note else ""))
    if config.out_path:
        print(f"wrote {config.out_path}")
    return EXIT_FAILED if failed else EXIT_OK


def _solve(args) -> int:
    try:
        if args.nu is None:
            mu, nu = read_point_clouds(args.mu)
        else:
            mu, nu = read_measure(args.mu), read_measure(args.nu)
        spec = parse_initializer(args.init)
        accel = parse_acceleration(args.accel)
        config = SinkhornConfig(args.epsilon, tau=args.tau, max_iters=args.max_iters, acceleration=accel)
        if mu.dim != nu.dim:
            raise MeasureError("measures live in different dimensions")
    except (OSError, ValueError) as exc:
        print(f"otinit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    C = build_cost_sqeuclidean(mu.support, nu.support)
    try:
        start = initialize(spec, mu, nu, C, args.epsilon, tau=args.tau, seed=args.seed)
    except Exception as exc:
        print(f"otinit: initializer failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    dp, report = sinkhorn_solve(mu, nu, C, config, init=start)
    err = marginal_error(coupling_from_duals(dp, C), mu, nu)
    print(f"iterations: {report.iterations}")
    print(f"converged: {str(report.converged).lower()}")
    print(f"dual_objective: {dual_objective(dp, mu, nu, C):.12g}")
    print(f"marginal_error: {err:.6g}")
    if report.failure:
        print(f"failure: {report.failure}", file=sys.stderr)
    return EXIT_OK if report.converged else EXIT_FAILED


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return _bench(args) if args.command == "bench" else _solve(args)


if __name__ == "__main__":
    sys.exit(main())
