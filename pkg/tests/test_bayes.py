import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from decision_lab import (
    ConfigurationError,
    DataError,
    EstimatorKind,
    EstimatorSpec,
    LossFunction,
    RiskCurve,
    bayes_action,
    normal_iid,
    posterior_normal_normal,
    posterior_risk,
    risk_curves,
)
from decision_lab.bayes import (
    GridPosterior,
    GridPrior,
    NormalPosterior,
    NormalPrior,
    check_full_support,
    constant_risk_minimax_check,
    discretize,
    grid_update,
)

from oracles import conjugate_normal


def test_conjugate_single_observation():
    post = posterior_normal_normal(NormalPrior(0.0, 1.0), [2.0], 1.0)
    assert post.mu == pytest.approx(1.0, rel=1e-15)
    assert post.tau2 == pytest.approx(0.5, rel=1e-15)


def test_conjugate_matches_textbook_formula():
    x = np.random.default_rng(0).normal(1.5, 2.0, 17)
    post = posterior_normal_normal(NormalPrior(-1.0, 3.0), x, 4.0)
    mu, v = conjugate_normal(-1.0, 3.0, x, 4.0)
    assert post.mu == pytest.approx(mu, rel=1e-13)
    assert post.tau2 == pytest.approx(v, rel=1e-13)


def test_flat_prior_limit():
    x = np.array([0.3, 1.1, -0.4, 2.0])
    post = posterior_normal_normal(NormalPrior(5.0, 1e12), x, 2.0)
    assert post.mu == pytest.approx(x.mean(), rel=1e-9)
    assert post.tau2 == pytest.approx(2.0 / 4, rel=1e-9)


def test_no_data_returns_prior():
    post = posterior_normal_normal(NormalPrior(0.7, 2.5), [], 1.0)
    assert (post.mu, post.tau2, post.n) == (0.7, 2.5, 0)
    g = grid_update(GridPrior(np.linspace(-1, 1, 5), [1, 2, 3, 2, 1]), [], 1.0)
    np.testing.assert_allclose(g.weights, np.array([1, 2, 3, 2, 1]) / 9, rtol=1e-15)


def test_bad_variances():
    with pytest.raises(ConfigurationError):
        NormalPrior(0.0, 0.0)
    with pytest.raises(ConfigurationError):
        posterior_normal_normal(NormalPrior(0.0, 1.0), [1.0], -1.0)
    with pytest.raises(ConfigurationError):
        GridPrior([0.0, 1.0], [-1.0, 2.0])


def test_grid_update_matches_conjugate():
    prior = NormalPrior(0.0, 1.0)
    grid = np.linspace(-8, 8, 4001)
    gp = GridPrior(grid, stats.norm.pdf(grid, 0.0, 1.0))
    post = grid_update(gp, [2.0], 1.0)
    step = grid[1] - grid[0]
    assert abs(post.mean() - 1.0) <= step
    assert abs(post.variance() - 0.5) <= step * np.sqrt(0.5)
    exact = posterior_normal_normal(prior, [2.0], 1.0)
    assert post.mean() == pytest.approx(exact.mu, abs=1e-10)


def test_square_risk_at_mean_is_variance():
    post = NormalPosterior(1.0, 0.5)
    assert posterior_risk(post, LossFunction("Square"), 1.0) == pytest.approx(0.5, rel=1e-10)
    # quadrature oracle for a non-mean action
    val, _ = integrate.quad(lambda t: (1.3 - t) ** 2 * stats.norm.pdf(t, 1.0, np.sqrt(0.5)), -np.inf, np.inf)
    assert posterior_risk(post, LossFunction("Square"), 1.3) == pytest.approx(val, rel=1e-9)


def test_absolute_risk_against_quadrature():
    post = NormalPosterior(-0.5, 2.0)
    f = lambda t: abs(0.4 - t) * stats.norm.pdf(t, -0.5, np.sqrt(2.0))  # noqa: E731
    val = integrate.quad(f, -np.inf, 0.4)[0] + integrate.quad(f, 0.4, np.inf)[0]
    # the kink at the action sits between nodes, costing O(step^2)
    step = discretize(post).step
    assert posterior_risk(post, LossFunction("Absolute"), 0.4) == pytest.approx(val, abs=step**2)


@pytest.mark.parametrize("loss", ["Square", "Absolute", "ZeroOneEps"])
def test_point_mass_has_zero_risk(loss):
    post = GridPosterior(np.array([-1.0, 0.0, 2.0]), np.array([0.0, 1.0, 0.0]))
    assert posterior_risk(post, LossFunction(loss, eps=0.5), 0.0) == 0.0


def test_absolute_minimal_at_centre_of_symmetric_posterior():
    post = NormalPosterior(1.0, 0.5)
    actions = 1.0 + np.linspace(-1, 1, 21)
    risks = [posterior_risk(post, LossFunction("Absolute"), a) for a in actions]
    assert int(np.argmin(risks)) == 10


def test_unnormalised_posterior_rejected():
    bad = GridPosterior(np.array([0.0, 1.0]), np.array([0.5, 0.6]))
    with pytest.raises(DataError):
        posterior_risk(bad, LossFunction("Square"), 0.0)
    with pytest.raises(DataError):
        bayes_action(bad, "Square")


def test_unsupported_loss():
    with pytest.raises(ConfigurationError):
        posterior_risk(NormalPosterior(0.0, 1.0), LossFunction("KLNormal"), 0.0)


def test_discretisation_grid():
    g = discretize(NormalPosterior(1.0, 0.25))
    assert g.theta_grid.size >= 2001
    assert g.theta_grid[0] == pytest.approx(1.0 - 8 * 0.5) and g.theta_grid[-1] == pytest.approx(1.0 + 8 * 0.5)


@pytest.mark.parametrize("loss", ["Square", "Absolute", "ZeroOneEps"])
def test_bayes_action_on_normal_posterior(loss):
    a = bayes_action(NormalPosterior(1.0, 0.5), loss)
    assert a.matches_closed_form
    assert abs(a.action - 1.0) <= a.step


def _skewed():
    # Gamma(2, 1) on a fine grid: mode 1, median ~1.678, mean 2
    g = np.linspace(0.0, 40.0, 8001)
    w = stats.gamma.pdf(g, 2.0)
    return GridPosterior(g, w / w.sum())


def test_skewed_posterior_ordering():
    post = _skewed()
    sq, ab, zo = (bayes_action(post, k) for k in ("Square", "Absolute", "ZeroOneEps"))
    assert sq.action > ab.action > zo.action
    assert all(x.matches_closed_form for x in (sq, ab, zo))
    # brute-force values from the distribution itself
    assert abs(sq.action - 2.0) <= 2 * sq.step
    assert abs(ab.action - stats.gamma.ppf(0.5, 2.0)) <= 2 * ab.step
    assert abs(zo.action - 1.0) <= 3 * zo.step


def test_bayes_action_tie_reported():
    post = GridPosterior(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.5, 0.0, 0.0, 0.5]))
    a = bayes_action(post, "Absolute")
    assert a.ties > 1 and a.action == 0.0
    d = a.to_dict()
    assert d["tie_break"] == "first-index" and d["ties"] == a.ties


@settings(max_examples=40, deadline=None)
@given(mu0=st.floats(-5, 5), tau2=st.floats(0.1, 10), x=st.lists(st.floats(-5, 5), min_size=1, max_size=8),
       s2=st.floats(0.2, 5))
def test_conjugate_vs_grid_property(mu0, tau2, x, s2):
    exact = posterior_normal_normal(NormalPrior(mu0, tau2), x, s2)
    sd0 = np.sqrt(tau2)
    grid = np.linspace(mu0 - 12 * sd0 - 10, mu0 + 12 * sd0 + 10, 6001)
    g = grid_update(GridPrior(grid, stats.norm.pdf(grid, mu0, sd0)), x, s2)
    step = grid[1] - grid[0]
    assert abs(g.mean() - exact.mu) <= step
    assert abs(g.variance() - exact.tau2) <= step * exact.sd


def test_full_support():
    assert check_full_support(NormalPrior(0.0, 1.0), np.linspace(-50, 50, 11), 1e-6).all()
    grid = np.linspace(0, 10, 11)
    assert check_full_support(GridPrior(grid, np.ones(11)), grid, 0.1).all()
    w = np.ones(11)
    w[3:8] = 0.0  # zero density on [3, 7] once interpolated
    flags = check_full_support(GridPrior(grid, w), grid, 0.5)
    assert flags[:3].all() and flags[8:].all()
    assert not flags[4:7].any()
    with pytest.raises(ConfigurationError):
        check_full_support(NormalPrior(0.0, 1.0), [0.0], 0.0)


@pytest.fixture(scope="module")
def mean_and_crystal():
    grid = np.linspace(-2.0, 2.0, 9)
    ls = EstimatorSpec(EstimatorKind.LS_MEAN)
    cb = EstimatorSpec(EstimatorKind.CRYSTAL_BALL, constant=0.0)
    return risk_curves(normal_iid(0.0, 1.0, 25), grid, [ls, cb], LossFunction("Square"), 20000, 3)


def test_mean_is_flagged_minimax(mean_and_crystal):
    ls, cb = mean_and_crystal
    chk = constant_risk_minimax_check(ls, [ls, cb])
    assert chk.is_constant and chk.is_grid_undominated and chk.minimax_flag
    assert not chk.vacuous


def test_crystal_ball_is_not_constant(mean_and_crystal):
    ls, cb = mean_and_crystal
    chk = constant_risk_minimax_check(cb, [ls])
    assert not chk.is_constant and not chk.minimax_flag


def test_empty_candidates_are_vacuous(mean_and_crystal):
    chk = constant_risk_minimax_check(mean_and_crystal[0], [])
    assert chk.is_grid_undominated and chk.vacuous


def test_minimax_check_grid_mismatch():
    a = RiskCurve([0.0, 1.0], [1.0, 1.0], [0.0, 0.0])
    b = RiskCurve([0.0, 2.0], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(DataError):
        constant_risk_minimax_check(a, [b])


def test_dominated_curve_is_reported():
    a = RiskCurve([0.0, 1.0], [1.0, 1.0], [0.0, 0.0])
    b = RiskCurve([0.0, 1.0], [0.5, 0.5], [0.0, 0.0])
    chk = constant_risk_minimax_check(a, [b])
    assert chk.is_constant and not chk.is_grid_undominated and chk.dominated_by == (0,)
