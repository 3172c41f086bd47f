"""Least-squares AR(1) fit, residual scan test, and detectability bounds.

The test statistic is the multiscale scan applied to the residuals
e_hat_k = y_k - phi_hat * y_{k-1}.  Two normalizations are available:

* light tail (finite moments of order p >= 2, alpha <= 1/2 - 1/p):
  n**(-1/2+alpha) / sigma times the statistic, compared against a
  Monte-Carlo table of the Brownian limit functional;
* heavy tail (regularly varying index p, alpha > 1/2 - 1/p): the
  statistic over b_n (the (1-1/n)-quantile of |e|), compared against
  closed-form Frechet quantiles.

sigma is plugged in as the residual sample standard deviation unless
supplied; b_n comes from a declared innovation law or is supplied
directly.  The reported localization (k_hat, ell_hat) is the argmax
window of the scan; it is a descriptive output, not an inferential
interval estimate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import innovations as innov
from .errors import ConfigError, DegenerateSeriesError, ParameterError
from .limits import CriticalValueTable, critical_value, frechet_cdf, frechet_quantile
from .stats import HeavyTail, LightTail, ScanResult, normalized_statistic, scan_statistic


@dataclass(frozen=True)
class FitResult:
    phi_hat: float
    residuals: np.ndarray
    sigma_hat: float
    denominator: float


def fit_ar1(y) -> FitResult:
    """Least-squares estimate of the AR coefficient and its residuals.

    ``y`` is the full series y_0..y_n (length n+1, n >= 2).
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise ParameterError("y must be a 1-d vector of length >= 3 (n >= 2)")
    lagged = y[:-1]
    denom = float(lagged @ lagged)
    if denom <= 0.0:
        raise DegenerateSeriesError("sum of squared lagged values is zero")
    phi_hat = float((y[1:] @ lagged) / denom)
    residuals = y[1:] - phi_hat * lagged
    sigma_hat = float(np.std(residuals, ddof=1))
    return FitResult(phi_hat, residuals, sigma_hat, denom)


@dataclass(frozen=True)
class LightTailMode:
    """Brownian-regime test; p declares the available moment order."""

    p: float = 2.0
    sigma: Optional[float] = None  # default: residual sample std


@dataclass(frozen=True)
class HeavyTailMode:
    """Frechet-regime test for regularly varying innovations of index p."""

    p: float
    b_n: Optional[float] = None
    spec: Optional[innov.InnovationSpec] = None


TestMode = Union[LightTailMode, HeavyTailMode]


@dataclass(frozen=True)
class TestReport:
    statistic: ScanResult
    normalized: float
    critical_value: float
    p_value: float
    decision: str  # "reject" | "accept"
    mode: str  # "light_tail" | "heavy_tail"
    localization: tuple[int, int]  # (k_hat, ell_hat), descriptive only
    phi_hat: float
    sigma_hat: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "statistic": json.loads(self.statistic.to_json()),
                "normalized": self.normalized,
                "critical_value": self.critical_value,
                "p_value": self.p_value,
                "decision": self.decision,
                "mode": self.mode,
                "localization": {
                    "k_hat": self.localization[0],
                    "ell_hat": self.localization[1],
                    "note": "argmax window, descriptive only",
                },
                "phi_hat": self.phi_hat,
                "sigma_hat": self.sigma_hat,
            }
        )

    def csv_row(self) -> str:
        return ",".join(
            repr(v)
            for v in (
                self.statistic.value,
                self.normalized,
                self.critical_value,
                self.p_value,
                self.decision,
                self.localization[0],
                self.localization[1],
            )
        )


def validate_mode(alpha: float, mode: TestMode) -> None:
    """Reject alpha / tail-regime mismatches before any computation."""
    if isinstance(mode, LightTailMode):
        ap = innov.alpha_p(mode.p)
        if alpha > ap:
            raise ConfigError(
                f"light-tail mode requires alpha <= {ap} for p={mode.p}, got {alpha}"
            )
    elif isinstance(mode, HeavyTailMode):
        ap = innov.alpha_p(mode.p)
        if alpha <= ap:
            raise ConfigError(
                f"heavy-tail mode requires alpha > {ap} for p={mode.p}, got {alpha}"
            )
        if mode.b_n is None and mode.spec is None:
            raise ConfigError("heavy-tail mode needs b_n or an innovation spec")
    else:
        raise ConfigError(f"unknown test mode {mode!r}")


def run_test(
    y,
    alpha: float,
    mode: TestMode,
    level: float = 0.05,
    table: Optional[CriticalValueTable] = None,
    k_min: int = 0,
    scale_ratio: Optional[float] = None,
) -> TestReport:
    """Fit, scan the residuals, and compare against the calibrated threshold.

    Rejects when the normalized statistic exceeds the (1-level)-quantile
    of the null law.
    """
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must be in (0,1), got {level}")
    validate_mode(alpha, mode)
    fit = fit_ar1(y)
    n = fit.residuals.size
    stat = scan_statistic(fit.residuals, alpha, k_min=k_min, scale_ratio=scale_ratio)
    if isinstance(mode, LightTailMode):
        sigma = mode.sigma if mode.sigma is not None else fit.sigma_hat
        if not sigma > 0:
            raise DegenerateSeriesError("residual standard deviation is zero")
        normalized = normalized_statistic(stat.value, alpha, LightTail(sigma, n))
        if table is None:
            raise ConfigError("light-tail mode requires a critical-value table")
        cv = critical_value(table, alpha, 1.0 - level)
        p_val = table.p_value(normalized)
        mode_name = "light_tail"
    else:
        b_n = mode.b_n if mode.b_n is not None else innov.quantile_b_n(mode.spec, n)
        normalized = normalized_statistic(stat.value, alpha, HeavyTail(b_n))
        cv = frechet_quantile(mode.p, 1.0 - level)
        p_val = 1.0 - frechet_cdf(mode.p, normalized)
        mode_name = "heavy_tail"
    decision = "reject" if normalized > cv else "accept"
    return TestReport(
        statistic=stat,
        normalized=normalized,
        critical_value=cv,
        p_value=p_val,
        decision=decision,
        mode=mode_name,
        localization=(stat.k_hat, stat.ell_hat),
        phi_hat=fit.phi_hat,
        sigma_hat=fit.sigma_hat,
    )


def epidemic_lower_bound(a: float, ell_star: int, alpha: float) -> float:
    """Guaranteed scan value of a pure epidemic signal: |a| * l*^(1-alpha) / 2.

    Valid whenever the epidemic occupies at most half the sample.
    """
    if ell_star < 1:
        raise ParameterError(f"ell_star must be >= 1, got {ell_star}")
    return 0.5 * abs(a) * ell_star ** (1.0 - alpha)


def tau_scan_upper_bound(a: float, ell_star: int, alpha: float, phi_n: float) -> float:
    """Deterministic cap on the scan of the drift: 5|a| l*^(1-alpha) / (1-phi)."""
    if ell_star < 1:
        raise ParameterError(f"ell_star must be >= 1, got {ell_star}")
    if not 0.0 < phi_n < 1.0:
        raise ParameterError(f"phi_n must lie in (0,1), got {phi_n}")
    return 5.0 * abs(a) * ell_star ** (1.0 - alpha) / (1.0 - phi_n)


def hill_tail_index(x, k: int) -> float:
    """Hill estimator of the tail index from the k largest |x|.

    Convenience helper for exploratory use; the test modes expect a
    user-declared p and never call this implicitly.
    """
    x = np.abs(np.ascontiguousarray(x, dtype=np.float64))
    if not 1 <= k < x.size:
        raise ParameterError(f"k must lie in [1, len(x)), got {k}")
    top = np.sort(x)[-(k + 1) :]
    if top[0] <= 0:
        raise ParameterError("Hill estimator needs positive order statistics")
    logs = np.log(top[1:]) - np.log(top[0])
    return float(1.0 / np.mean(logs))
