"""Benchmark harness: dataset generators, suite runner and CLI."""

from .datasets import (
    gen_blobs2d,
    gen_blobs_1d,
    gen_gaussian,
    gen_mixture,
    gen_s_curve_2d,
    gen_two_moons,
    make_pair,
    parse_dataset,
)
from .runner import (
    ConfigError,
    ExperimentConfig,
    RunRecord,
    load_config,
    run_one,
    run_suite,
    summarize,
)

__all__ = [
    "gen_blobs2d",
    "gen_blobs_1d",
    "gen_gaussian",
    "gen_mixture",
    "gen_s_curve_2d",
    "gen_two_moons",
    "make_pair",
    "parse_dataset",
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "load_config",
    "run_one",
    "run_suite",
    "summarize",
]
