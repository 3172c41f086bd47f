"""Innovation distributions, reproducible substreams and tail normalizers.

Supported innovation laws and their tail classes:

* ``Gaussian(sigma)`` -- all moments finite; valid for the light-tail
  regime at any moment index.
* ``SymmetricPareto(p, a)`` -- regularly varying with index ``p``:
  the magnitude is standard Pareto on [1, inf) with P(|e| > t) = t**-p,
  the sign is +1 with probability ``a`` and -1 otherwise.  For a != 1/2
  the analytic mean (2a-1)*p/(p-1) is subtracted so that E e = 0
  (requires p > 1).
* ``StudentT(nu)`` -- regularly varying with index ``nu``; symmetric,
  so mean zero for nu > 1; finite variance requires nu > 2.
* ``TruncatedPareto(p, cutoff)`` -- symmetric Pareto magnitude
  conditioned to [1, cutoff]; bounded support, hence
  t**q * P(|e| > t) -> 0 for every q (light-tail class at index p).

All sampling is driven by named substreams derived from a single master
seed, so replicated Monte Carlo runs are reproducible and
embarrassingly parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats as sps

from .errors import ParameterError

# Stable role codes for substream derivation.  Substream identity is
# SeedSequence(master_seed, spawn_key=(role_code, replicate)); this mapping
# is part of the on-disk reproducibility contract and must not be reordered.
ROLE_CODES = {
    "innovations": 0,
    "limit_law": 1,
    "experiment": 2,
}


@dataclass(frozen=True)
class Stream:
    """Identifies one reproducible random substream."""

    master_seed: int
    replicate: int = 0
    role: str = "innovations"

    def seed_sequence(self) -> np.random.SeedSequence:
        if self.role not in ROLE_CODES:
            raise ParameterError(f"unknown stream role {self.role!r}")
        return np.random.SeedSequence(
            self.master_seed, spawn_key=(ROLE_CODES[self.role], self.replicate)
        )

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence())


@dataclass(frozen=True)
class Gaussian:
    sigma: float = 1.0

    def validate(self) -> None:
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class SymmetricPareto:
    """Signed Pareto magnitude; regularly varying with index p.

    Tail balance: P(e > x) ~ a * x**-p and P(e < -x) ~ (1-a) * x**-p.
    """

    p: float
    a: float = 0.5

    def validate(self) -> None:
        if not self.p > 0:
            raise ParameterError(f"tail index p must be positive, got {self.p}")
        if not 0.0 < self.a < 1.0:
            raise ParameterError(f"tail asymmetry a must be in (0,1), got {self.a}")
        if self.a != 0.5 and not self.p > 1:
            raise ParameterError("centering an asymmetric Pareto requires p > 1")

    @property
    def mean_shift(self) -> float:
        """Analytic mean of the signed, uncentered variable."""
        if self.a == 0.5:
            return 0.0
        return (2.0 * self.a - 1.0) * self.p / (self.p - 1.0)


@dataclass(frozen=True)
class StudentT:
    nu: float

    def validate(self) -> None:
        if not self.nu > 2:
            raise ParameterError(f"degrees of freedom must exceed 2, got {self.nu}")


@dataclass(frozen=True)
class TruncatedPareto:
    """Symmetric Pareto magnitude conditioned to [1, cutoff]."""

    p: float
    cutoff: float = 1e6

    def validate(self) -> None:
        if not self.p > 2:
            raise ParameterError(f"p must exceed 2, got {self.p}")
        if not self.cutoff > 1:
            raise ParameterError(f"cutoff must exceed 1, got {self.cutoff}")


InnovationSpec = Union[Gaussian, SymmetricPareto, StudentT, TruncatedPareto]

_KIND_NAMES = {
    Gaussian: "gaussian",
    SymmetricPareto: "symmetric_pareto",
    StudentT: "student_t",
    TruncatedPareto: "truncated_pareto",
}


def spec_to_json(spec: InnovationSpec) -> dict:
    spec.validate()
    if isinstance(spec, Gaussian):
        params = {"sigma": spec.sigma}
    elif isinstance(spec, SymmetricPareto):
        params = {"p": spec.p, "a": spec.a}
    elif isinstance(spec, StudentT):
        params = {"nu": spec.nu}
    else:
        params = {"p": spec.p, "cutoff": spec.cutoff}
    return {"kind": _KIND_NAMES[type(spec)], "params": params}


def spec_from_json(obj: dict) -> InnovationSpec:
    try:
        kind = obj["kind"]
        params = obj.get("params", {})
        ctor = {name: cls for cls, name in _KIND_NAMES.items()}[kind]
        spec = ctor(**params)
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"invalid innovation spec {obj!r}: {exc}") from exc
    spec.validate()
    return spec


def sample_innovations(spec: InnovationSpec, n: int, stream: Stream) -> np.ndarray:
    """Draw n i.i.d. centered innovations, bit-reproducible per stream."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    spec.validate()
    rng = stream.rng()
    if isinstance(spec, Gaussian):
        return rng.normal(0.0, spec.sigma, size=n)
    if isinstance(spec, SymmetricPareto):
        mag = rng.random(n) ** (-1.0 / spec.p)
        sign = np.where(rng.random(n) < spec.a, 1.0, -1.0)
        return sign * mag - spec.mean_shift
    if isinstance(spec, StudentT):
        return rng.standard_t(spec.nu, size=n)
    if isinstance(spec, TruncatedPareto):
        # inverse CDF of Pareto(p) conditioned to [1, cutoff], random sign
        u = rng.random(n)
        lo = spec.cutoff ** (-spec.p)
        mag = (1.0 - u * (1.0 - lo)) ** (-1.0 / spec.p)
        sign = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        return sign * mag
    raise ParameterError(f"unsupported innovation spec {spec!r}")


def variance(spec: InnovationSpec) -> float:
    """Exact variance of the innovation law (requires finite second moment)."""
    spec.validate()
    if isinstance(spec, Gaussian):
        return spec.sigma**2
    if isinstance(spec, SymmetricPareto):
        if not spec.p > 2:
            raise ParameterError("variance finite only for p > 2")
        second = spec.p / (spec.p - 2.0)
        return second - spec.mean_shift**2
    if isinstance(spec, StudentT):
        return spec.nu / (spec.nu - 2.0)
    if isinstance(spec, TruncatedPareto):
        p, m = spec.p, spec.cutoff
        return (p / (p - 2.0)) * (1.0 - m ** (-(p - 2.0))) / (1.0 - m**-p)
    raise ParameterError(f"unsupported innovation spec {spec!r}")


def quantile_b_n(spec: InnovationSpec, n: int) -> float:
    """(1 - 1/n)-quantile of |e|, the heavy-tail normalizer.

    Closed form for every supported law.  n = 1 returns the essential
    infimum of |e| (the level-0 quantile).  For SymmetricPareto the
    magnitude law of the uncentered variable is used, so the result is
    exactly n**(1/p).
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    spec.validate()
    level = 1.0 - 1.0 / n
    if isinstance(spec, Gaussian):
        return float(spec.sigma * sps.norm.ppf(0.5 + level / 2.0))
    if isinstance(spec, SymmetricPareto):
        return float(n ** (1.0 / spec.p))
    if isinstance(spec, StudentT):
        return float(sps.t.ppf(0.5 + level / 2.0, spec.nu))
    if isinstance(spec, TruncatedPareto):
        lo = spec.cutoff ** (-spec.p)
        return float((1.0 - level * (1.0 - lo)) ** (-1.0 / spec.p))
    raise ParameterError(f"unsupported innovation spec {spec!r}")


def alpha_p(p: float) -> float:
    """Critical weight exponent 1/2 - 1/p separating the two limit regimes."""
    if not p >= 2:
        raise ParameterError(f"p must be >= 2, got {p}")
    if math.isinf(p):
        return 0.5
    return 0.5 - 1.0 / p
