"""Shared fixtures: disk-cached calibration tables for the slow suites."""

import pathlib

import pytest

from episcan import limits

CACHE_DIR = pathlib.Path(__file__).parent / "_table_cache"

MASTER_SEED = 12345
GRID_N = 2048
REPS = 10_000


def cached_table(alpha: float, master_seed: int = MASTER_SEED) -> limits.CriticalValueTable:
    """Build (or reload) the default-scale calibration table for alpha."""
    CACHE_DIR.mkdir(exist_ok=True)
    path = CACHE_DIR / f"a{alpha}_g{GRID_N}_r{REPS}_s{master_seed}.json"
    if path.exists():
        table = limits.load_table(path)
        if (table.grid_n, table.reps, table.master_seed) == (GRID_N, REPS, master_seed):
            return table
    table = limits.build_table(alpha, GRID_N, REPS, master_seed, threads=4)
    limits.save_table(table, path)
    return table


@pytest.fixture(scope="session")
def table_a0():
    return cached_table(0.0)


@pytest.fixture(scope="session")
def table_a025():
    return cached_table(0.25)
