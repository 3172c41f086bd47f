"""Replicated Monte-Carlo experiments: size, power, consistency, bounds.

Every experiment is a deterministic function of its configuration and a
master seed.  Replicate r of sweep cell c draws its innovations from
substream (role="experiment", replicate=c * reps + r), so results are
independent of thread scheduling and sweep order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import ar1, innovations as innov
from .errors import ConfigError
from .inference import epidemic_lower_bound, fit_ar1, tau_scan_upper_bound
from .limits import CriticalValueTable, build_table, critical_value
from .stats import LightTail, normalized_statistic, scan_statistic


@dataclass(frozen=True)
class CalibrationParams:
    grid_n: int = 2048
    reps: int = 10_000

    def table(
        self, alpha: float, master_seed: int, threads: int = 1
    ) -> CriticalValueTable:
        return build_table(
            alpha, self.grid_n, self.reps, master_seed, threads=threads
        )


def _replicate_normalized(
    model: ar1.ModelSpec,
    epidemic: ar1.EpidemicSpec,
    spec: innov.InnovationSpec,
    n: int,
    alphas: Sequence[float],
    master_seed: int,
    replicate: int,
) -> List[float]:
    """One simulated series; normalized residual statistic per alpha."""
    eps = innov.sample_innovations(
        spec, n, innov.Stream(master_seed, replicate, role="experiment")
    )
    bundle = ar1.simulate(model, epidemic, eps)
    fit = fit_ar1(bundle.y)
    out = []
    for alpha in alphas:
        value = scan_statistic(fit.residuals, alpha, k_min=0).value
        out.append(normalized_statistic(value, alpha, LightTail(fit.sigma_hat, n)))
    return out


def normalized_stats_batch(
    model: ar1.ModelSpec,
    epidemic: ar1.EpidemicSpec,
    spec: innov.InnovationSpec,
    n: int,
    alphas: Sequence[float],
    reps: int,
    master_seed: int,
    cell_index: int = 0,
    threads: int = 1,
) -> np.ndarray:
    """(reps, len(alphas)) array of normalized statistics, replicate-ordered."""
    base = cell_index * reps

    def worker(r: int) -> List[float]:
        return _replicate_normalized(
            model, epidemic, spec, n, alphas, master_seed, base + r
        )

    if threads <= 1:
        rows = [worker(r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(worker, range(reps)))
    return np.asarray(rows)


def rejection_rates(
    stats_per_alpha: np.ndarray,
    alphas: Sequence[float],
    tables: dict,
    level: float,
) -> List[float]:
    rates = []
    for j, alpha in enumerate(alphas):
        cv = critical_value(tables[alpha], alpha, 1.0 - level)
        rates.append(float(np.mean(stats_per_alpha[:, j] > cv)))
    return rates


def size_experiment(
    models: Sequence[ar1.ModelSpec],
    spec: innov.InnovationSpec,
    n_list: Sequence[int],
    alphas: Sequence[float],
    reps: int,
    level: float,
    tables: dict,
    master_seed: int,
    threads: int = 1,
) -> List[dict]:
    """Empirical rejection rate under the null, per (model, n, alpha)."""
    rows = []
    cell = 0
    for model in models:
        for n in n_list:
            stats = normalized_stats_batch(
                model,
                ar1.EpidemicSpec.null(),
                spec,
                n,
                alphas,
                reps,
                master_seed,
                cell_index=cell,
                threads=threads,
            )
            cell += 1
            rates = rejection_rates(stats, alphas, tables, level)
            for alpha, rate in zip(alphas, rates):
                rows.append(
                    {
                        "model": ar1.model_to_json(model),
                        "n": n,
                        "alpha": alpha,
                        "level": level,
                        "rejection_rate": rate,
                        "reps": reps,
                        "mc_stderr": float(np.sqrt(level * (1 - level) / reps)),
                    }
                )
    return rows


def default_beta(alpha: float) -> float:
    """Shortest detectable epidemic exponent for weight alpha."""
    return (0.5 - alpha) / (1.0 - alpha)


def _place_epidemic(n: int, ell_star: int, k_frac: float, amplitude: float):
    k_star = min(int(k_frac * n), n - ell_star)
    k_star = max(k_star, 0)
    return ar1.EpidemicSpec(k_star=k_star, ell_star=ell_star, amplitude=amplitude)


def power_experiment(
    model: ar1.ModelSpec,
    spec: innov.InnovationSpec,
    n_list: Sequence[int],
    alphas: Sequence[float],
    thetas: Sequence[float],
    amplitude: float,
    reps: int,
    level: float,
    tables: dict,
    master_seed: int,
    beta: Optional[float] = None,
    k_frac: float = 0.5,
    threads: int = 1,
) -> List[dict]:
    """Rejection rate under epidemics of length ceil(theta * n**beta)."""
    rows = []
    cell = 0
    for n in n_list:
        for theta in thetas:
            for alpha in alphas:
                b = default_beta(alpha) if beta is None else beta
                ell_star = int(np.ceil(theta * n**b))
                if ell_star > n // 2:
                    raise ConfigError(
                        f"ell_star={ell_star} exceeds n/2 for n={n}; power "
                        "studies assume short epidemics"
                    )
                epidemic = _place_epidemic(n, ell_star, k_frac, amplitude)
                stats = normalized_stats_batch(
                    model,
                    epidemic,
                    spec,
                    n,
                    [alpha],
                    reps,
                    master_seed,
                    cell_index=cell,
                    threads=threads,
                )
                cell += 1
                rate = rejection_rates(stats, [alpha], tables, level)[0]
                rows.append(
                    {
                        "n": n,
                        "alpha": alpha,
                        "beta": b,
                        "theta": theta,
                        "a": amplitude,
                        "ell_star": ell_star,
                        "rejection_rate": rate,
                    }
                )
    return rows


def consistency_experiment(
    model: ar1.ModelSpec,
    spec: innov.InnovationSpec,
    n_list: Sequence[int],
    alphas: Sequence[float],
    amplitude: float,
    beta: float,
    reps: int,
    level: float,
    tables: dict,
    master_seed: int,
    k_frac: float = 0.5,
    threads: int = 1,
) -> List[dict]:
    """Median normalized statistic under growing-n epidemics of length n**beta.

    Also reports the small-perturbation ratio a^2 l* / (n (1-phi)); the
    estimator stays consistent when this tends to zero.
    """
    rows = []
    for cell, n in enumerate(n_list):
        ell_star = int(np.ceil(n**beta))
        epidemic = _place_epidemic(n, ell_star, k_frac, amplitude)
        stats = normalized_stats_batch(
            model,
            epidemic,
            spec,
            n,
            alphas,
            reps,
            master_seed,
            cell_index=cell,
            threads=threads,
        )
        phi = ar1.resolve_phi(model, n)
        rates = rejection_rates(stats, alphas, tables, level)
        for j, alpha in enumerate(alphas):
            rows.append(
                {
                    "n": n,
                    "alpha": alpha,
                    "ell_star": ell_star,
                    "normalized_statistic_median": float(np.median(stats[:, j])),
                    "rejection_rate": rates[j],
                    "perturbation_ratio": amplitude**2 * ell_star / (n * (1 - phi)),
                }
            )
    return rows


DEFAULT_BOUND_GRID = {
    "phi": (0.5, 0.9, 0.99, 0.999),
    "alpha": (0.0, 0.1, 0.25, 0.4),
    "ell_frac": (0.01, 0.1, 0.5),
    "k_frac": (0.0, 0.2, 0.45, 0.49),
    "amplitude": (1.0, -2.5),
    "n": 400,
}


def verify_bounds(grid: Optional[dict] = None) -> List[dict]:
    """Deterministic checks of the drift-scan bounds and closed-form sums.

    For each configuration verifies:
      * scan of the drift tau_0..tau_{n-1} is at most
        5|a| l*^(1-alpha) / (1-phi), for both window-start conventions;
      * scan of the pure indicator signal is at least |a| l*^(1-alpha) / 2
        (window starts at 0, epidemic at most half the sample);
      * sum_{k=1..n} tau_{k-1} matches its closed form to 1e-10 relative.
    """
    g = dict(DEFAULT_BOUND_GRID)
    if grid:
        g.update(grid)
    n = g["n"]
    rows = []
    for phi in g["phi"]:
        model = ar1.FixedPhi(phi)
        for ell_frac in g["ell_frac"]:
            ell_star = max(1, int(round(ell_frac * n)))
            for k_frac in g["k_frac"]:
                k_star = min(int(k_frac * n), n - ell_star)
                for amp in g["amplitude"]:
                    epidemic = ar1.EpidemicSpec(k_star, ell_star, amp)
                    tau = ar1.drift_tau(model, epidemic, n)
                    sum_ok = np.isclose(
                        float(np.sum(tau[:-1])),
                        ar1.drift_sum_closed_form(phi, epidemic, n),
                        rtol=1e-10,
                        atol=1e-12,
                    )
                    indicator = ar1.drift_indicator(epidemic, n)
                    for alpha in g["alpha"]:
                        upper = tau_scan_upper_bound(amp, ell_star, alpha, phi)
                        upper_ok = all(
                            scan_statistic(tau[:-1], alpha, k_min=km).value
                            <= upper * (1 + 1e-12)
                            for km in (0, 1)
                        )
                        lower = epidemic_lower_bound(amp, ell_star, alpha)
                        lower_ok = (
                            scan_statistic(indicator, alpha, k_min=0).value
                            >= lower * (1 - 1e-12)
                            if ell_star <= n // 2
                            else True
                        )
                        rows.append(
                            {
                                "phi": phi,
                                "alpha": alpha,
                                "ell_star": ell_star,
                                "k_star": k_star,
                                "amplitude": amp,
                                "upper_bound_ok": bool(upper_ok),
                                "lower_bound_ok": bool(lower_ok),
                                "drift_sum_ok": bool(sum_ok),
                            }
                        )
    return rows
