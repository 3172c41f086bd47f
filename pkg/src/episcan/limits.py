"""Null-distribution calibration: Monte-Carlo limit law and Frechet quantiles.

The light-tail limit is the Brownian functional

    max over h in (0,1), t in [0, 1-h] of h**-alpha * |W_{t+h} - W_t - h W_1|

simulated by applying the discrete scan kernel to grid_n i.i.d. standard
Gaussians and rescaling by grid_n**(-1/2+alpha): the scan of the
Gaussian partial-sum polygon attains the continuous Hoelder norm at
vertices, so no separate (t, h) discretization is introduced.

The heavy-tail limit is the Frechet law P(T <= x) = exp(-x**-p) with
closed-form quantiles.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import CalibrationRequiredError, DataError, ParameterError
from .innovations import Stream
from .stats import LightTail, normalized_statistic, scan_statistic

FORMAT_VERSION = 1
DEFAULT_QUANTILE_LEVELS = (0.8, 0.9, 0.95, 0.99)


def _one_replicate(alpha: float, grid_n: int, master_seed: int, rep: int) -> float:
    rng = Stream(master_seed, rep, role="limit_law").rng()
    g = rng.standard_normal(grid_n)
    res = scan_statistic(g, alpha, k_min=0)
    return normalized_statistic(res.value, alpha, LightTail(sigma=1.0, n=grid_n))


def simulate_limit_law(
    alpha: float,
    grid_n: int,
    reps: int,
    master_seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Sorted sample of the Brownian limit functional; deterministic per seed.

    Replicates use disjoint substreams, so the result is independent of
    ``threads``.
    """
    if grid_n < 2:
        raise ParameterError(f"grid_n must be >= 2, got {grid_n}")
    if reps < 1:
        raise ParameterError(f"reps must be >= 1, got {reps}")
    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"alpha must be in [0,1), got {alpha}")
    if threads <= 1:
        sample = [_one_replicate(alpha, grid_n, master_seed, r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sample = list(
                pool.map(
                    lambda r: _one_replicate(alpha, grid_n, master_seed, r),
                    range(reps),
                )
            )
    out = np.asarray(sample)
    out.sort()
    return out


def empirical_quantile(sample: np.ndarray, q: float) -> float:
    """ceil(q * len(sample))-th order statistic (1-based) of a sorted sample."""
    if not 0.0 < q < 1.0:
        raise ParameterError(f"quantile level must be in (0,1), got {q}")
    idx = max(1, math.ceil(q * sample.size))
    return float(sample[idx - 1])


@dataclass
class CriticalValueTable:
    """Persisted Monte-Carlo calibration of the light-tail limit law."""

    alpha: float
    grid_n: int
    reps: int
    master_seed: int
    sample: Optional[np.ndarray] = None
    quantiles: Dict[float, float] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def sample_digest(self) -> str:
        if self.sample is None:
            return ""
        return hashlib.sha256(np.ascontiguousarray(self.sample).tobytes()).hexdigest()

    def quantile(self, q: float) -> float:
        if self.sample is not None:
            return empirical_quantile(self.sample, q)
        if q in self.quantiles:
            return self.quantiles[q]
        raise CalibrationRequiredError(
            f"table has no sample and no stored quantile at level {q}"
        )

    def p_value(self, value: float) -> float:
        """Fraction of calibration draws >= value."""
        if self.sample is None:
            raise CalibrationRequiredError("p-values require the full sample")
        return float(np.mean(self.sample >= value))


def build_table(
    alpha: float,
    grid_n: int = 2048,
    reps: int = 10_000,
    master_seed: int = 0,
    threads: int = 1,
) -> CriticalValueTable:
    sample = simulate_limit_law(alpha, grid_n, reps, master_seed, threads=threads)
    quants = {q: empirical_quantile(sample, q) for q in DEFAULT_QUANTILE_LEVELS}
    return CriticalValueTable(
        alpha=alpha,
        grid_n=grid_n,
        reps=reps,
        master_seed=master_seed,
        sample=sample,
        quantiles=quants,
    )


def critical_value(table: CriticalValueTable, alpha: float, q: float) -> float:
    """q-quantile rejection threshold from a calibration table.

    For a test at significance ``level``, pass q = 1 - level.
    """
    if table.alpha != alpha:
        raise CalibrationRequiredError(
            f"table calibrated for alpha={table.alpha}, requested {alpha}"
        )
    return table.quantile(q)


def save_table(table: CriticalValueTable, path, include_sample: bool = True) -> None:
    obj = {
        "format_version": table.format_version,
        "alpha": table.alpha,
        "grid_n": table.grid_n,
        "reps": table.reps,
        "master_seed": table.master_seed,
        "quantiles": {repr(q): v for q, v in table.quantiles.items()},
        "sample_digest": table.sample_digest,
    }
    if include_sample and table.sample is not None:
        obj["sample"] = table.sample.tolist()
    with open(path, "w") as fh:
        json.dump(obj, fh)


def load_table(path) -> CriticalValueTable:
    try:
        with open(path) as fh:
            obj = json.load(fh)
        if obj.get("format_version") != FORMAT_VERSION:
            raise DataError(
                f"table {path} has format_version {obj.get('format_version')}, "
                f"expected {FORMAT_VERSION}"
            )
        sample = np.asarray(obj["sample"]) if "sample" in obj else None
        table = CriticalValueTable(
            alpha=obj["alpha"],
            grid_n=obj["grid_n"],
            reps=obj["reps"],
            master_seed=obj["master_seed"],
            sample=sample,
            quantiles={float(q): v for q, v in obj["quantiles"].items()},
        )
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"cannot load table {path}: {exc}") from exc
    if sample is not None and obj.get("sample_digest"):
        if table.sample_digest != obj["sample_digest"]:
            raise DataError(f"table {path} sample digest mismatch")
    return table


def frechet_cdf(p: float, x: float) -> float:
    """P(T <= x) = exp(-x**-p) for x > 0, else 0."""
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p}")
    if x <= 0:
        return 0.0
    return math.exp(-(x**-p))


def frechet_quantile(p: float, q: float) -> float:
    """Exact inverse of the Frechet CDF: (-ln q)**(-1/p)."""
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p}")
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must be in (0,1), got {q}")
    return (-math.log(q)) ** (-1.0 / p)
