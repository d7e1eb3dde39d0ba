import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from decision_lab import DataError, DistanceKind, LossFunction, LossKind, inherent_distance, kl_quadrature, loss_eval
from decision_lab import normal
from decision_lab.errors import ConfigurationError

from oracles import normal_cdf_mp, normal_ppf_mp


# -- Normal distribution function -----------------------------------------------


@pytest.mark.parametrize("x", [-37.0, -8.0, -3.0, -1.3551, 0.0, 0.5, 1.3551, 1.6448536, 3.0, 8.0])
def test_cdf_against_high_precision(x):
    ref = normal_cdf_mp(x)
    assert normal.cdf(x) == pytest.approx(ref, rel=1e-14, abs=1e-300)


def test_cdf_against_integrated_density():
    for x in (-2.0, 0.3, 1.3551):
        val, _ = integrate.quad(lambda t: np.exp(-t * t / 2) / np.sqrt(2 * np.pi), -np.inf, x, epsabs=1e-14)
        assert normal.cdf(x) == pytest.approx(val, rel=1e-12)


def test_power_reference_value():
    assert float(normal.cdf(1.3551)) == pytest.approx(0.91230715, abs=5e-9)


@pytest.mark.parametrize("p", [1e-300, 1e-12, 1e-5, 0.02, 0.025, 0.05, 0.3, 0.5, 0.7, 0.95, 0.975, 0.99999])
def test_ppf_against_high_precision(p):
    assert normal.ppf(p) == pytest.approx(normal_ppf_mp(p), rel=1e-13, abs=1e-15)


def test_critical_values():
    assert round(normal.upper_quantile(0.05), 4) == 1.6449
    assert round(normal.upper_quantile(0.025), 4) == 1.9600


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-12, 1 - 1e-12))
def test_ppf_inverts_cdf(p):
    assert float(normal.cdf(normal.ppf(p))) == pytest.approx(p, rel=1e-12)


def test_ppf_edges():
    assert normal.ppf(0.0) == -np.inf and normal.ppf(1.0) == np.inf
    assert np.isnan(normal.ppf(1.5))


def test_sf_tail_accuracy():
    assert normal.sf(10.0) == pytest.approx(normal_cdf_mp(-10.0), rel=1e-13)


# -- losses -----------------------------------------------------------------------


def test_loss_examples():
    assert loss_eval(LossFunction("Square"), 3.0, 1.0) == 4.0
    assert loss_eval(LossFunction("Absolute"), 3.0, 1.0) == 2.0
    assert loss_eval(LossFunction("Lp", p=3), 3.0, 1.0) == 8.0
    assert loss_eval(LossFunction("ZeroOneEps", eps=1e-6), 2.0, 2.0) == 0.0
    assert loss_eval(LossFunction("ZeroOneEps", eps=1e-6), 2.0, 2.1) == 1.0
    assert loss_eval(LossFunction("KLNormal"), 2.0, 0.0) == 2.0
    assert loss_eval(LossFunction("SteinSum"), [1.0, 2.0, 3.0], [0.0, 0.0, 0.0]) == 14.0


def test_zero_one_default_eps_scales_with_theta():
    loss = LossFunction("ZeroOneEps")
    assert loss_eval(loss, 1e6 + 0.5, 1e6) == 0.0
    assert loss_eval(loss, 1e6 + 2.0, 1e6) == 1.0


def test_loss_dimension_mismatch():
    with pytest.raises(DataError):
        loss_eval(LossFunction("Square"), [1.0, 2.0], [1.0])


def test_loss_parameter_validation():
    with pytest.raises(ConfigurationError):
        LossFunction("Lp", p=0)
    with pytest.raises(ConfigurationError):
        LossFunction("ZeroOneEps", eps=-1)


@settings(max_examples=200, deadline=None)
@given(
    kind=st.sampled_from(list(LossKind)),
    est=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=4),
    p=st.floats(0.1, 4),
)
def test_nonnegative_and_zero_at_truth(kind, est, p):
    loss = LossFunction(kind, p=p)
    theta = np.zeros(len(est))
    assert loss_eval(loss, est, theta) >= 0
    assert loss_eval(loss, theta, theta) == 0


@pytest.mark.parametrize("theta_hat,theta,n,s2", [(2.0, 0.0, 1, 1.0), (0.3, -0.1, 5, 2.0), (-1.0, 1.0, 3, 0.5)])
def test_kl_normal_closed_form_matches_quadrature(theta_hat, theta, n, s2):
    closed = loss_eval(LossFunction("KLNormal", n=n, sigma2=s2), theta_hat, theta)
    assert kl_quadrature("NormalIID", theta_hat, theta, n, s2) == pytest.approx(closed, rel=1e-9)


def test_kl_laplace_closed_form():
    # KL between Laplace(t, b) and Laplace(t_hat, b): d/b + exp(-d/b) - 1
    b = 1.0
    d = 0.7
    ref = d / b + np.exp(-d / b) - 1
    assert kl_quadrature("LaplaceIID", d, 0.0, 1, 2 * b * b) == pytest.approx(ref, rel=1e-9)


def test_kl_uniform():
    assert kl_quadrature("UniformIID", 2.0, 1.0, 3) == pytest.approx(3 * np.log(2.0), rel=1e-12)
    assert kl_quadrature("UniformIID", 0.5, 1.0) == np.inf


def test_inherent_distances():
    assert inherent_distance(DistanceKind.ND, 2.0, 0.0) == 4.0
    assert inherent_distance("AD", 1.5, 1.5) == 0.0
    assert inherent_distance("SUP", [0.1, -0.3, 0.2], 0.0) == pytest.approx(0.3)
    with pytest.raises(DataError):
        inherent_distance("SUP", [], 0.0)
    with pytest.raises(DataError):
        inherent_distance("ND", [1.0, 2.0], 0.0)
