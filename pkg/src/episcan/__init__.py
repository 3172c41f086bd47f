"""Epidemic change detection in AR(1) innovations.

Multiscale uniform-increment scan statistics on least-squares
residuals, with Monte-Carlo calibration of the Brownian limit law and
closed-form Frechet calibration for regularly varying innovations.
"""

from .ar1 import (
    EpidemicSpec,
    FixedPhi,
    LogGamma,
    NearUnit,
    PowerLawGamma,
    SeriesBundle,
    drift_sum_closed_form,
    drift_tau,
    resolve_phi,
    simulate,
)
from .inference import (
    FitResult,
    HeavyTailMode,
    LightTailMode,
    TestReport,
    epidemic_lower_bound,
    fit_ar1,
    run_test,
    tau_scan_upper_bound,
)
from .innovations import (
    Gaussian,
    Stream,
    StudentT,
    SymmetricPareto,
    TruncatedPareto,
    alpha_p,
    quantile_b_n,
    sample_innovations,
)
from .limits import (
    CriticalValueTable,
    build_table,
    critical_value,
    frechet_cdf,
    frechet_quantile,
    load_table,
    save_table,
    simulate_limit_law,
)
from .stats import (
    HeavyTail,
    LightTail,
    ScanResult,
    holder_norm_polygonal,
    normalized_statistic,
    scan_statistic,
)

__version__ = "0.1.0"

__all__ = [
    "EpidemicSpec",
    "FixedPhi",
    "LogGamma",
    "NearUnit",
    "PowerLawGamma",
    "SeriesBundle",
    "drift_sum_closed_form",
    "drift_tau",
    "resolve_phi",
    "simulate",
    "FitResult",
    "HeavyTailMode",
    "LightTailMode",
    "TestReport",
    "epidemic_lower_bound",
    "fit_ar1",
    "run_test",
    "tau_scan_upper_bound",
    "Gaussian",
    "Stream",
    "StudentT",
    "SymmetricPareto",
    "TruncatedPareto",
    "alpha_p",
    "quantile_b_n",
    "sample_innovations",
    "CriticalValueTable",
    "build_table",
    "critical_value",
    "frechet_cdf",
    "frechet_quantile",
    "load_table",
    "save_table",
    "simulate_limit_law",
    "HeavyTail",
    "LightTail",
    "ScanResult",
    "holder_norm_polygonal",
    "normalized_statistic",
    "scan_statistic",
]
