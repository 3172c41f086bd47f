"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s``.  The two session
tables (alpha 0 and 0.25, grid 2048, 10^4 replicates) are built once and
cached on disk under tests/_table_cache/.
"""

import math

import numpy as np
import pytest
from scipy import stats as sps

from episcan import ar1, experiments, inference, innovations as innov, limits
from episcan.stats import holder_norm_polygonal, scan_statistic
from oracles import brute_force_scan

THREADS = 4


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name} failed: {detail}"


def test_criterion_1_holder_oracle_identity():
    rng = np.random.default_rng(2024)
    alphas = (0.0, 0.1, 0.25, 0.4)
    worst = 0.0
    checks = 0
    for alpha in alphas:
        for _ in range(125):
            n = int(rng.integers(2, 301))
            kind = rng.integers(0, 3)
            if kind == 0:
                x = rng.standard_normal(n)
            elif kind == 1:
                x = rng.standard_t(3, size=n)
            else:
                x = rng.integers(-4, 5, size=n).astype(float)
            lhs = holder_norm_polygonal(x, alpha)
            rhs = n**alpha * scan_statistic(x, alpha, k_min=0).value
            if rhs > 0:
                worst = max(worst, abs(lhs - rhs) / rhs)
            checks += 1
    _report(
        "1 holder-norm oracle identity",
        checks == 500 and worst < 1e-10,
        f"500 vectors, worst rel diff {worst:.2e}",
    )


def test_criterion_2_brute_force_equivalence():
    rng = np.random.default_rng(7)
    mismatches = 0
    for n in range(1, 65):
        x = rng.integers(-5, 6, size=n).astype(float)
        for alpha in (0.0, 0.25):
            for k_min in (0, 1):
                res = scan_statistic(x, alpha, k_min=k_min)
                value, k_hat, ell_hat = brute_force_scan(x, alpha, k_min=k_min)
                if (res.value, res.k_hat, res.ell_hat) != (value, k_hat, ell_hat):
                    mismatches += 1
    _report(
        "2 brute-force equivalence",
        mismatches == 0,
        f"n=1..64, exact match, {mismatches} mismatches",
    )


def test_criterion_3_deterministic_bounds():
    rows = experiments.verify_bounds()
    failures = [
        r
        for r in rows
        if not (r["upper_bound_ok"] and r["lower_bound_ok"] and r["drift_sum_ok"])
    ]
    _report(
        "3 deterministic drift bounds",
        len(rows) >= 200 and not failures,
        f"{len(rows)} configurations, {len(failures)} violations",
    )


def test_criterion_4_size_under_null(table_a0, table_a025):
    models = [
        ar1.FixedPhi(0.5),
        ar1.NearUnit(ar1.PowerLawGamma(c=1.0, d=0.5)),  # gamma_n = sqrt(n)
    ]
    rows = experiments.size_experiment(
        models=models,
        spec=innov.Gaussian(1.0),
        n_list=[2000],
        alphas=[0.0, 0.25],
        reps=2000,
        level=0.05,
        tables={0.0: table_a0, 0.25: table_a025},
        master_seed=777,
        threads=THREADS,
    )
    rates = {(str(r["model"]), r["alpha"]): r["rejection_rate"] for r in rows}
    ok = all(0.03 <= v <= 0.07 for v in rates.values())
    _report(
        "4 size under H0",
        ok,
        "rates " + ", ".join(f"{v:.4f}" for v in rates.values()),
    )


def test_criterion_5_estimator_rate():
    phi = 0.5
    n = 5000
    reps = 2000
    scaled = np.empty(reps)
    for r in range(reps):
        eps = innov.sample_innovations(innov.Gaussian(1.0), n, innov.Stream(888, r))
        b = ar1.simulate(ar1.FixedPhi(phi), ar1.EpidemicSpec.null(), eps)
        fit = inference.fit_ar1(b.y)
        scaled[r] = math.sqrt(n / (1 - phi**2)) * abs(fit.phi_hat - phi)
    med = float(np.median(scaled))
    _report(
        "5 estimator rate",
        0.55 <= med <= 0.80,
        f"median scaled |phi_hat - phi| = {med:.4f} (|N(0,1)| median 0.6745)",
    )


def test_criterion_6_frechet_calibration():
    # closed-form identity
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        p = float(rng.uniform(0.5, 8.0))
        q = float(rng.uniform(0.01, 0.99))
        x = limits.frechet_quantile(p, q)
        worst = max(worst, abs(limits.frechet_cdf(p, x) - q) / q)
    identity_ok = worst < 1e-12

    # empirical convergence of the heavy-tail law
    p = 3.0
    n = 100_000
    reps = 2000
    spec = innov.SymmetricPareto(p=p)
    b_n = innov.quantile_b_n(spec, n)
    values = np.empty(reps)
    for r in range(reps):
        eps = innov.sample_innovations(spec, n, innov.Stream(999, r))
        values[r] = (
            scan_statistic(eps, 0.4, k_min=1, scale_ratio=1.25).value / b_n
        )
    ks = float(sps.kstest(values, lambda x: np.exp(-np.clip(x, 1e-12, None) ** -p)).statistic)
    _report(
        "6 Frechet calibration",
        identity_ok and ks < 0.1,
        f"identity worst rel err {worst:.2e}, KS distance {ks:.4f}",
    )


def test_criterion_7_consistency_trend(table_a0, table_a025):
    n_list = [1000, 2000, 5000, 10000]
    rows = experiments.consistency_experiment(
        model=ar1.NearUnit(ar1.PowerLawGamma(c=1.0, d=0.5)),
        spec=innov.Gaussian(1.0),
        n_list=n_list,
        alphas=[0.0, 0.25],
        amplitude=1.0,
        beta=0.4,
        reps=400,
        level=0.05,
        tables={0.0: table_a0, 0.25: table_a025},
        master_seed=4242,
        threads=THREADS,
    )
    by = {(r["n"], r["alpha"]): r for r in rows}
    medians = [by[(n, 0.25)]["normalized_statistic_median"] for n in n_list]
    inversions = sum(1 for lo, hi in zip(medians, medians[1:]) if hi < lo)
    rate_lo = by[(1000, 0.25)]["rejection_rate"]
    rate_hi = by[(10000, 0.25)]["rejection_rate"]
    power_jump = rate_hi - rate_lo
    cusum_rate = by[(10000, 0.0)]["rejection_rate"]
    se = math.sqrt(0.05 * 0.95 / 400)
    cusum_weak = cusum_rate < 0.5 * rate_hi or abs(cusum_rate - 0.05) <= 3 * se
    ok = inversions <= 1 and power_jump >= 0.3 and cusum_weak
    _report(
        "7 consistency trend",
        ok,
        f"medians {['%.3f' % m for m in medians]}, inversions {inversions}, "
        f"power jump {power_jump:.3f}, alpha=0 rate {cusum_rate:.3f} vs "
        f"alpha=0.25 rate {rate_hi:.3f}",
    )


def test_criterion_8_residual_innovation_gap():
    rng = np.random.default_rng(5150)
    specs = [innov.Gaussian(1.0), innov.SymmetricPareto(p=3), innov.StudentT(4.0)]
    models = [
        ar1.FixedPhi(0.5),
        ar1.FixedPhi(-0.6),
        ar1.FixedPhi(0.95),
        ar1.NearUnit(ar1.PowerLawGamma(c=1.0, d=0.5)),
    ]
    worst = -np.inf
    checks = 0
    for rep in range(60):
        spec = specs[rep % len(specs)]
        model = models[rep % len(models)]
        n = int(rng.integers(100, 1000))
        phi = ar1.resolve_phi(model, n)
        eps = innov.sample_innovations(spec, n, innov.Stream(31337, rep))
        b = ar1.simulate(model, ar1.EpidemicSpec.null(), eps)
        fit = inference.fit_ar1(b.y)
        for alpha in (0.0, 0.25, 0.4):
            lhs = abs(
                scan_statistic(fit.residuals, alpha).value
                - scan_statistic(eps, alpha).value
            )
            rhs = abs(fit.phi_hat - phi) * scan_statistic(b.y[:-1], alpha).value
            worst = max(worst, lhs - rhs * (1 + 1e-10))
            checks += 1
    _report(
        "8 residual-innovation gap",
        worst <= 1e-12,
        f"{checks} bundle/alpha checks, worst excess {worst:.2e}",
    )
