import math

import numpy as np
import pytest

from episcan import ar1
from episcan.errors import DataError, ParameterError


def test_resolve_phi_fixed():
    assert ar1.resolve_phi(ar1.FixedPhi(0.5), 17) == 0.5


def test_resolve_phi_power_law():
    model = ar1.NearUnit(ar1.PowerLawGamma(c=1.0, d=0.5))
    assert ar1.resolve_phi(model, 10_000) == pytest.approx(0.99)


def test_resolve_phi_logarithmic():
    model = ar1.NearUnit(ar1.LogGamma(c=1.0))
    n = round(math.e**20)
    assert ar1.resolve_phi(model, n) == pytest.approx(1.0 - 20.0 / n, rel=1e-6)


def test_resolve_phi_below_n_min():
    model = ar1.NearUnit(ar1.PowerLawGamma(c=5.0, d=0.5))
    # need n > 25 for phi in (0,1)
    assert ar1.n_min(model) == 26
    with pytest.raises(ParameterError):
        ar1.resolve_phi(model, 25)
    assert 0.0 < ar1.resolve_phi(model, 26) < 1.0


def test_simulate_phi_zero_identity():
    eps = np.array([3.0, -1.0, 2.0])
    b = ar1.simulate(ar1.FixedPhi(0.0), ar1.EpidemicSpec.null(), eps)
    assert np.array_equal(b.y, [0.0, 3.0, -1.0, 2.0])


def test_simulate_epidemic_drift_only():
    b = ar1.simulate(
        ar1.FixedPhi(0.5), ar1.EpidemicSpec(k_star=1, ell_star=2, amplitude=1.0),
        np.zeros(4),
    )
    expected = [0.0, 0.0, 1.0, 1.5, 0.75]
    assert np.allclose(b.y, expected, atol=1e-15)
    assert np.allclose(b.tau, expected, atol=1e-15)
    assert np.allclose(b.z, 0.0, atol=1e-15)


def test_simulate_geometric_decay():
    b = ar1.simulate(ar1.FixedPhi(0.9), ar1.EpidemicSpec.null(), np.array([1.0, 0, 0]))
    assert np.allclose(b.y, [0.0, 1.0, 0.9, 0.81], atol=1e-15)


def test_recursion_reconstruction():
    rng = np.random.default_rng(5)
    eps = rng.standard_normal(500)
    epidemic = ar1.EpidemicSpec(k_star=100, ell_star=50, amplitude=2.0)
    phi = 0.85
    b = ar1.simulate(ar1.FixedPhi(phi), epidemic, eps)
    a = ar1.drift_indicator(epidemic, 500)
    scale = np.max(np.abs(b.y))
    for k in range(1, 501):
        assert abs(b.y[k] - (phi * b.y[k - 1] + eps[k - 1] + a[k - 1])) < 1e-12 * scale
        assert abs(b.z[k] - (phi * b.z[k - 1] + eps[k - 1])) < 1e-12 * scale
        assert abs(b.tau[k] - (phi * b.tau[k - 1] + a[k - 1])) < 1e-12 * scale


def test_null_epidemic_equivalence():
    rng = np.random.default_rng(6)
    eps = rng.standard_normal(100)
    b = ar1.simulate(ar1.FixedPhi(0.5), ar1.EpidemicSpec(3, 7, 0.0), eps)
    assert np.all(b.tau == 0.0)
    assert np.array_equal(b.z, b.y)


@pytest.mark.parametrize("phi", [0.3, 0.9, 0.99, -0.5])
@pytest.mark.parametrize("n", [50, 500, 2000])
def test_drift_recursion_vs_direct_sum(phi, n):
    epidemic = ar1.EpidemicSpec(k_star=n // 4, ell_star=n // 5, amplitude=1.5)
    fast = ar1.drift_tau(ar1.FixedPhi(phi), epidemic, n)
    slow = ar1.drift_tau_direct(phi, epidemic, n)
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-14)


def test_drift_zero_amplitude_zero_vector():
    tau = ar1.drift_tau(ar1.FixedPhi(0.7), ar1.EpidemicSpec(2, 3, 0.0), 20)
    assert np.all(tau == 0.0)


@pytest.mark.parametrize("phi", [0.5, 0.9, 0.99])
def test_drift_sum_closed_form(phi):
    n = 300
    epidemic = ar1.EpidemicSpec(k_star=40, ell_star=60, amplitude=-2.0)
    tau = ar1.drift_tau(ar1.FixedPhi(phi), epidemic, n)
    got = float(np.sum(tau[:-1]))
    want = ar1.drift_sum_closed_form(phi, epidemic, n)
    assert got == pytest.approx(want, rel=1e-10)


def test_epidemic_window_validation():
    with pytest.raises(ParameterError):
        ar1.EpidemicSpec(k_star=8, ell_star=5, amplitude=1.0).validate(10)
    with pytest.raises(ParameterError):
        ar1.EpidemicSpec(k_star=-1, ell_star=2, amplitude=1.0).validate(10)
    with pytest.raises(ParameterError):
        ar1.simulate(
            ar1.FixedPhi(0.5), ar1.EpidemicSpec(5, 10, 1.0), np.zeros(8)
        )


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    eps = rng.standard_normal(50)
    b = ar1.simulate(ar1.FixedPhi(0.6), ar1.EpidemicSpec(10, 5, 1.0), eps)
    path = tmp_path / "series.csv"
    ar1.bundle_to_csv(b, path)
    back = ar1.bundle_from_csv(path)
    np.testing.assert_array_equal(back.y, b.y)
    np.testing.assert_array_equal(back.eps, b.eps)
    np.testing.assert_array_equal(back.tau, b.tau)
    np.testing.assert_array_equal(back.z, b.z)


def test_csv_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("not,a,series\n1,2,3\n")
    with pytest.raises(DataError):
        ar1.bundle_from_csv(path)


def test_model_json_roundtrip():
    for model in (
        ar1.FixedPhi(-0.3),
        ar1.NearUnit(ar1.PowerLawGamma(2.0, 0.4)),
        ar1.NearUnit(ar1.LogGamma(1.5)),
    ):
        assert ar1.model_from_json(ar1.model_to_json(model)) == model
