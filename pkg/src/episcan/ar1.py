"""AR(1) simulation with an optional epidemic drift in the innovations.

The observed series follows

    y_0 = 0,    y_k = phi_n * y_{k-1} + e_k + a_k,   k = 1..n,

where a_k equals a fixed amplitude inside the epidemic window
(k_star, k_star + ell_star] and zero outside.  The coefficient is either
a fixed phi in (-1,1) or a near-unit sequence phi_n = 1 - gamma_n / n
with gamma_n = c * n**d or c * ln(n), both diverging.

The deterministic drift tau accumulates the epidemic through the AR
filter: tau_0 = 0, tau_k = phi * tau_{k-1} + a_k.  Subtracting it,
z = y - tau is an AR(1) series driven by the innovations alone, i.e. a
null-hypothesis series; this decomposition is what the consistency
experiments exploit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.signal import lfilter

from .errors import DataError, ParameterError


@dataclass(frozen=True)
class FixedPhi:
    phi: float

    def validate(self) -> None:
        if not -1.0 < self.phi < 1.0:
            raise ParameterError(f"phi must lie in (-1,1), got {self.phi}")


@dataclass(frozen=True)
class PowerLawGamma:
    """gamma_n = c * n**d with d in (0,1)."""

    c: float
    d: float

    def validate(self) -> None:
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if not 0.0 < self.d < 1.0:
            raise ParameterError(f"d must lie in (0,1), got {self.d}")

    def gamma(self, n: int) -> float:
        return self.c * n**self.d


@dataclass(frozen=True)
class LogGamma:
    """gamma_n = c * ln(n)."""

    c: float

    def validate(self) -> None:
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c}")

    def gamma(self, n: int) -> float:
        return self.c * math.log(n)


GammaSchedule = Union[PowerLawGamma, LogGamma]


@dataclass(frozen=True)
class NearUnit:
    """phi_n = 1 - gamma_n / n, kept inside (0,1)."""

    schedule: GammaSchedule

    def validate(self) -> None:
        self.schedule.validate()


ModelSpec = Union[FixedPhi, NearUnit]


def n_min(model: ModelSpec) -> int:
    """Smallest sample size for which the coefficient stays in its domain."""
    model.validate()
    if isinstance(model, FixedPhi):
        return 1
    sched = model.schedule
    if isinstance(sched, PowerLawGamma):
        # need c * n**d < n  <=>  n > c**(1/(1-d)); gamma > 0 always
        return max(1, math.floor(sched.c ** (1.0 / (1.0 - sched.d))) + 1)
    # logarithmic: need 0 < c*ln(n) < n; ln(1) = 0 excludes n = 1
    n = 2
    while not 0.0 < sched.gamma(n) < n:
        n += 1
        if n > 10**9:  # c*ln(n) < n holds long before this
            raise ParameterError("no admissible n for schedule")
    return n


def resolve_phi(model: ModelSpec, n: int) -> float:
    """Coefficient phi_n used for a series of length n."""
    model.validate()
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if isinstance(model, FixedPhi):
        return model.phi
    if n < n_min(model):
        raise ParameterError(
            f"n={n} below n_min={n_min(model)} for near-unit schedule"
        )
    return 1.0 - model.schedule.gamma(n) / n


def model_to_json(model: ModelSpec) -> dict:
    model.validate()
    if isinstance(model, FixedPhi):
        return {"regime": "fixed", "phi": model.phi}
    sched = model.schedule
    if isinstance(sched, PowerLawGamma):
        return {
            "regime": "near_unit",
            "schedule": {"kind": "power_law", "c": sched.c, "d": sched.d},
        }
    return {"regime": "near_unit", "schedule": {"kind": "logarithmic", "c": sched.c}}


def model_from_json(obj: dict) -> ModelSpec:
    try:
        if obj["regime"] == "fixed":
            model: ModelSpec = FixedPhi(obj["phi"])
        elif obj["regime"] == "near_unit":
            sched = obj["schedule"]
            if sched["kind"] == "power_law":
                model = NearUnit(PowerLawGamma(sched["c"], sched["d"]))
            elif sched["kind"] == "logarithmic":
                model = NearUnit(LogGamma(sched["c"]))
            else:
                raise KeyError(sched["kind"])
        else:
            raise KeyError(obj["regime"])
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"invalid model spec {obj!r}: {exc}") from exc
    model.validate()
    return model


@dataclass(frozen=True)
class EpidemicSpec:
    """Mean shift of the innovations over (k_star, k_star + ell_star]."""

    k_star: int
    ell_star: int
    amplitude: float

    def validate(self, n: int) -> None:
        if self.ell_star < 1:
            raise ParameterError(f"ell_star must be >= 1, got {self.ell_star}")
        if not 0 <= self.k_star < n:
            raise ParameterError(f"k_star={self.k_star} outside [0, {n})")
        if self.k_star + self.ell_star > n:
            raise ParameterError(
                f"epidemic window ({self.k_star}, {self.k_star + self.ell_star}] "
                f"exceeds n={n}"
            )

    @property
    def m_star(self) -> int:
        return self.k_star + self.ell_star

    @classmethod
    def null(cls) -> "EpidemicSpec":
        return cls(k_star=0, ell_star=1, amplitude=0.0)

    def to_json(self) -> dict:
        return {
            "k_star": self.k_star,
            "ell_star": self.ell_star,
            "amplitude": self.amplitude,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EpidemicSpec":
        try:
            return cls(obj["k_star"], obj["ell_star"], obj["amplitude"])
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"invalid epidemic spec {obj!r}: {exc}") from exc


def drift_indicator(epidemic: EpidemicSpec, n: int) -> np.ndarray:
    """a_1..a_n: amplitude inside the epidemic window, 0 outside."""
    epidemic.validate(n)
    a = np.zeros(n)
    a[epidemic.k_star : epidemic.m_star] = epidemic.amplitude
    return a


@dataclass(frozen=True)
class SeriesBundle:
    """Simulated series plus its exact drift decomposition.

    All of ``y``, ``tau``, ``z`` have length n+1 with index 0 equal to
    zero; ``eps`` has length n (innovation at index k drives y_k).
    """

    y: np.ndarray
    tau: np.ndarray
    z: np.ndarray
    eps: Optional[np.ndarray] = field(default=None)

    @property
    def n(self) -> int:
        return self.y.size - 1


def _ar_filter(phi: float, driver: np.ndarray) -> np.ndarray:
    """Zero-initialized AR(1) recursion; returns length n+1 with [0]=0."""
    out = np.empty(driver.size + 1)
    out[0] = 0.0
    out[1:] = lfilter([1.0], [1.0, -phi], driver)
    return out


def drift_tau(model: ModelSpec, epidemic: EpidemicSpec, n: int) -> np.ndarray:
    """Drift vector tau_0..tau_n from the recursion tau_k = phi*tau_{k-1} + a_k."""
    phi = resolve_phi(model, n)
    return _ar_filter(phi, drift_indicator(epidemic, n))


def drift_tau_direct(phi: float, epidemic: EpidemicSpec, n: int) -> np.ndarray:
    """O(n^2) direct geometric summation of the drift; test oracle only."""
    epidemic.validate(n)
    a = drift_indicator(epidemic, n)
    tau = np.zeros(n + 1)
    for k in range(1, n + 1):
        tau[k] = sum(phi ** (k - j) * a[j - 1] for j in range(1, k + 1))
    return tau


def drift_sum_closed_form(phi: float, epidemic: EpidemicSpec, n: int) -> float:
    """Closed form for sum_{k=1..n} tau_{k-1}.

    Equals a/(1-phi) * (ell_star - phi**(n-m_star) * (1-phi**ell_star)/(1-phi)).
    """
    epidemic.validate(n)
    if phi == 1.0:
        raise ParameterError("phi must differ from 1")
    a, ell, m = epidemic.amplitude, epidemic.ell_star, epidemic.m_star
    return a / (1.0 - phi) * (ell - phi ** (n - m) * (1.0 - phi**ell) / (1.0 - phi))


def simulate(
    model: ModelSpec, epidemic: EpidemicSpec, innovations: np.ndarray
) -> SeriesBundle:
    """Run the AR(1) recursion and return the full drift decomposition."""
    eps = np.ascontiguousarray(innovations, dtype=np.float64)
    if eps.ndim != 1 or eps.size < 1:
        raise ParameterError("innovations must be a non-empty 1-d vector")
    n = eps.size
    phi = resolve_phi(model, n)
    a = drift_indicator(epidemic, n)
    y = _ar_filter(phi, eps + a)
    tau = _ar_filter(phi, a)
    return SeriesBundle(y=y, tau=tau, z=y - tau, eps=eps)


def bundle_to_csv(bundle: SeriesBundle, path) -> None:
    """Write columns (index, y, eps, tau, z); eps is empty at index 0."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "y", "eps", "tau", "z"])
        for k in range(bundle.n + 1):
            eps_val = (
                "" if k == 0 or bundle.eps is None else repr(float(bundle.eps[k - 1]))
            )
            writer.writerow(
                [
                    k,
                    repr(float(bundle.y[k])),
                    eps_val,
                    repr(float(bundle.tau[k])),
                    repr(float(bundle.z[k])),
                ]
            )


def bundle_from_csv(path) -> SeriesBundle:
    """Read a bundle written by :func:`bundle_to_csv`."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["index", "y", "eps", "tau", "z"]:
                raise DataError(f"unexpected CSV header {header!r} in {path}")
            rows = [row for row in reader if row]
        y, eps, tau, z = [], [], [], []
        for i, row in enumerate(rows):
            if int(row[0]) != i:
                raise DataError(f"non-contiguous index at row {i} in {path}")
            y.append(float(row[1]))
            tau.append(float(row[3]))
            z.append(float(row[4]))
            if i > 0:
                eps.append(float(row[2]) if row[2] != "" else math.nan)
    except (OSError, ValueError, IndexError, StopIteration) as exc:
        raise DataError(f"cannot parse series CSV {path}: {exc}") from exc
    if len(y) < 2:
        raise DataError(f"series in {path} too short")
    eps_arr: Optional[np.ndarray] = np.asarray(eps)
    if np.isnan(eps_arr).any():
        eps_arr = None
    return SeriesBundle(
        y=np.asarray(y), tau=np.asarray(tau), z=np.asarray(z), eps=eps_arr
    )
