"""Experiment configuration, the run loop and CSV output."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from pathlib import Path

import numpy as np

from ..initializers import initialize, parse_initializer
from ..measures import build_cost_sqeuclidean
from ..sinkhorn import SinkhornConfig, parse_acceleration, sinkhorn_solve
from .datasets import make_pair, parse_dataset

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "load_config",
    "run_one",
    "run_suite",
    "summarize",
    "write_records",
    "write_summary",
]

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _list(value, cast):
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    elif not isinstance(value, (list, tuple)):
        value = [value]
    return tuple(cast(v.strip() if isinstance(v, str) else v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    sizes: tuple
    epsilon: tuple
    tau: float = 0.01
    initializers: tuple = ("zero",)
    accelerations: tuple = ("none",)
    seeds: int = 1
    out_path: str | None = None
    master_seed: int = 0
    max_iters: int = 10000
    jobs: int = 1

    def __post_init__(self):
        try:
            object.__setattr__(self, "sizes", _list(self.sizes, int))
            object.__setattr__(self, "epsilon", _list(self.epsilon, float))
            object.__setattr__(self, "initializers", _list(self.initializers, str))
            object.__setattr__(self, "accelerations", _list(self.accelerations, str))
            parse_dataset(self.dataset)
            for tag in self.initializers:
                parse_initializer(tag)
            for tag in self.accelerations:
                parse_acceleration(tag)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not (self.sizes and self.epsilon and self.initializers and self.accelerations):
            raise ConfigError("sizes, epsilon, initializers and accelerations must be nonempty")
        if any(n < 1 for n in self.sizes) or any(e <= 0 for e in self.epsilon):
            raise ConfigError("sizes and epsilon values must be positive")
        if int(self.seeds) < 1 or self.tau <= 0 or self.max_iters < 1 or self.jobs < 1:
            raise ConfigError("seeds, tau, max_iters and jobs must be positive")

    def points(self):
        """Every (n, epsilon, init, accel, seed) combination in output order."""
        return list(product(self.sizes, self.epsilon, self.initializers, self.accelerations, range(self.seeds)))


_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}
_ALIASES = {"n": "sizes", "size": "sizes", "eps": "epsilon", "init": "initializers",
            "accel": "accelerations", "out": "out_path"}


def load_config(path) -> ExperimentConfig:
    """Read a flat ``key = value`` file (``#`` starts a comment)."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        key = _ALIASES.get(key.strip(), key.strip())
        if not sep or key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: cannot parse {line!r}")
        values[key] = value.strip()
    if "dataset" not in values or "sizes" not in values or "epsilon" not in values:
        raise ConfigError("config needs at least dataset, sizes and epsilon")
    try:
        for key in ("tau",):
            if key in values:
                values[key] = float(values[key])
        for key in ("seeds", "master_seed", "max_iters", "jobs"):
            if key in values:
                values[key] = int(values[key])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(**values)


@dataclass
class RunRecord:
    dataset: str
    n: int
    m: int
    d: int
    epsilon: float
    init: str
    accel: str
    seed: int
    iterations: int
    init_time_s: float
    solve_time_s: float
    converged: bool
    note: str = field(default="")


TIME_COLUMNS = ("init_time_s", "solve_time_s")


def _seeds(master_seed: int, seed_index: int):
    """Data and initializer seeds for one seed index.

    Records that differ only in initializer or acceleration share the same
    data, so comparisons between them are paired.
    """
    data_seed, init_seed = np.random.SeedSequence([master_seed, seed_index]).generate_state(2)
    return int(data_seed), int(init_seed % (2**31 - 1))


def run_one(dataset, n, epsilon, init, accel, seed_index, tau=0.01, max_iters=10000, master_seed=0) -> RunRecord:
    data_seed, init_seed = _seeds(master_seed, seed_index)
    mu, nu = make_pair(dataset, n, data_seed)
    rec = RunRecord(dataset, mu.n, nu.n, mu.dim, epsilon, init, accel, seed_index, 0, 0.0, 0.0, False)
    C = build_cost_sqeuclidean(mu.support, nu.support)
    try:
        t0 = time.perf_counter()
        start = initialize(init, mu, nu, C, epsilon, tau=tau, seed=init_seed)
        t1 = time.perf_counter()
        cfg = SinkhornConfig(epsilon, tau=tau, max_iters=max_iters, acceleration=parse_acceleration(accel))
        _, report = sinkhorn_solve(mu, nu, C, cfg, init=start)
        t2 = time.perf_counter()
    except Exception as exc:  # recorded, the suite carries on
        logger.warning("run failed (%s n=%d eps=%g %s/%s seed=%d): %s", dataset, n, epsilon, init, accel, seed_index, exc)
        rec.note = f"{type(exc).__name__}: {exc}"
        return rec
    rec.iterations = report.iterations
    rec.init_time_s = t1 - t0
    rec.solve_time_s = t2 - t1
    rec.converged = report.converged
    if report.failure:
        rec.note = report.failure
    elif not report.converged:
        rec.note = f"max_iters reached, error {report.final_error:.3g}"
    return rec


def _run_point(args):
    return run_one(*args)


def run_suite(config: ExperimentConfig, summary_path=None) -> list[RunRecord]:
    """Run every configuration point; write the CSVs when ``out_path`` is set."""
    jobs = [
        (config.dataset, n, eps, init, accel, seed, config.tau, config.max_iters, config.master_seed)
        for n, eps, init, accel, seed in config.points()
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_run_point, jobs))
    else:
        records = [_run_point(job) for job in jobs]
    if config.out_path:
        out = Path(config.out_path)
        write_records(out, records)
        write_summary(summary_path or out.with_name(out.stem + "_summary.csv"), records)
    return records


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def write_records(path, records):
    names = [f.name for f in fields(RunRecord)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for r in records:
            row = asdict(r)
            w.writerow([f"{row[k]:.6f}" if k in TIME_COLUMNS else _fmt(row[k]) for k in names])


GROUP_KEYS = ("dataset", "n", "m", "d", "epsilon", "init", "accel")


def summarize(records) -> list[dict]:
    """Median and quartiles of the iteration counts per configuration group."""
    groups = {}
    for r in records:
        groups.setdefault(tuple(getattr(r, k) for k in GROUP_KEYS), []).append(r)
    rows = []
    for key, rs in groups.items():
        its = np.array([r.iterations for r in rs], dtype=float)
        q25, med, q75 = np.percentile(its, [25, 50, 75])
        rows.append({
            **dict(zip(GROUP_KEYS, key)),
            "runs": len(rs),
            "converged": sum(r.converged for r in rs),
            "median_iters": float(med),
            "q25": float(q25),
            "q75": float(q75),
            "median_init_time_s": float(np.median([r.init_time_s for r in rs])),
            "median_solve_time_s": float(np.median([r.solve_time_s for r in rs])),
        })
    return rows


def write_summary(path, records):
    rows = summarize(records)
    names = list(GROUP_KEYS) + ["runs", "converged", "median_iters", "q25", "q75",
                                "median_init_time_s", "median_solve_time_s"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([f"{row[k]:.6f}" if k.endswith("time_s") else _fmt(row[k]) for k in names])
