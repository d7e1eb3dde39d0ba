"""Pivot, confidence intervals, the one-sided Normal test and its error probabilities.

Everything assumes a Normal mean with known variance. The test is
``H0: theta = theta0`` against ``H1: theta > theta0`` with statistic
``d(X) = sqrt(n) (xbar - theta0) / sigma``, rejecting when ``d > c_alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import normal
from .errors import ConfigurationError, DomainError
from .models import ModelKind, StatisticalModel
from .rng import as_seed_plan
from .tables import Table


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_n_sigma(n, sigma2) -> None:
    if n < 1:
        raise ConfigurationError(f"n must be at least 1, got {n}")
    if not sigma2 > 0:
        raise ConfigurationError(f"sigma2 must be positive, got {sigma2}")


def pivot_value(xbar, theta, n: int, sigma2: float = 1.0):
    _check_n_sigma(n, sigma2)
    return np.sqrt(n) * (np.asarray(xbar, dtype=float) - theta) / np.sqrt(sigma2)


@dataclass(frozen=True)
class NormalLaw:
    mean: float
    variance: float = 1.0


def hypothetical_distribution(theta_hyp: float, theta_gen: float, n: int, sigma2: float = 1.0) -> NormalLaw:
    """Law of the statistic centred at ``theta_hyp`` when data come from ``theta_gen``."""
    _check_n_sigma(n, sigma2)
    return NormalLaw(float(math.sqrt(n) * (theta_gen - theta_hyp) / math.sqrt(sigma2)))


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    alpha: float
    used_sd: float
    estimated_sd: bool = False
    two_sided: bool = True

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def covers(self, theta: float) -> bool:
        return self.lower <= theta <= self.upper


def ci_normal(xbar: float, n: int, sd: float, alpha: float, estimated_sd: bool = False) -> ConfidenceInterval:
    """Two-sided ``1 - alpha`` interval ``xbar +/- c_{alpha/2} sd / sqrt(n)``.

    ``sd`` is the known sigma by default; pass an estimate with
    ``estimated_sd=True`` to flag the observed-interval variant.
    """
    if not sd > 0:
        raise ConfigurationError(f"sd must be positive, got {sd}")
    alpha = _check_alpha(alpha)
    _check_n_sigma(n, 1.0)
    used = sd / math.sqrt(n)
    half = normal.upper_quantile(alpha / 2.0) * used
    return ConfidenceInterval(xbar - half, xbar + half, alpha, used, estimated_sd)


@dataclass(frozen=True)
class Proportion:
    estimate: float
    stderr: float
    reps: int


def _require_normal(model: StatisticalModel) -> None:
    if model.kind is not ModelKind.NORMAL_IID:
        raise ConfigurationError("coverage and power simulations need the NormalIID model")


def _sample_means(model, reps, seed_plan, threads):
    plan = as_seed_plan(seed_plan)
    return np.concatenate(
        plan.map_chunks(reps, lambda rng, lo, hi: model.draw(rng, hi - lo).mean(axis=(1, 2)), threads)
    )


def coverage_sim(model: StatisticalModel, alpha: float, reps: int, seed_plan=None,
                 threads: int = 1, estimate_sd: bool = False) -> Proportion:
    """Fraction of simulated intervals that contain ``theta_star``."""
    _require_normal(model)
    alpha = _check_alpha(alpha)
    if int(reps) < 1000:
        raise ConfigurationError("coverage simulation needs reps >= 1000")
    plan = as_seed_plan(seed_plan)
    c = normal.upper_quantile(alpha / 2.0)
    theta = model.theta_star[0]
    n = model.n

    def work(rng, lo, hi):
        x = model.draw(rng, hi - lo)[:, :, 0]
        xbar = x.mean(axis=1)
        sd = x.std(axis=1, ddof=1) if estimate_sd else np.sqrt(model.sigma2)
        half = c * sd / np.sqrt(n)
        return (xbar - half <= theta) & (theta <= xbar + half)

    hits = np.concatenate(plan.map_chunks(reps, work, threads))
    cov = float(hits.mean())
    return Proportion(cov, math.sqrt(cov * (1.0 - cov) / reps), int(reps))


@dataclass(frozen=True)
class TestSpec:
    theta0: float = 0.0
    alpha: float = 0.05
    n: int = 1
    sigma2: float = 1.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        _check_alpha(self.alpha)
        _check_n_sigma(self.n, self.sigma2)

    @property
    def c_alpha(self) -> float:
        return normal.upper_quantile(self.alpha)


@dataclass(frozen=True)
class TestResult:
    d_obs: float
    c_alpha: float
    reject: bool
    p_value: float

    __test__ = False


def np_test(xbar: float, spec: TestSpec) -> TestResult:
    d = float(pivot_value(xbar, spec.theta0, spec.n, spec.sigma2))
    c = spec.c_alpha
    return TestResult(d, c, d > c, float(normal.sf(d)))


def p_values(xbar, spec: TestSpec) -> np.ndarray:
    return normal.sf(pivot_value(xbar, spec.theta0, spec.n, spec.sigma2))


@dataclass(frozen=True)
class Power:
    power: float
    type2: float
    delta1: float


def power(theta1: float, spec: TestSpec) -> Power:
    """Closed-form power ``1 - Phi(c_alpha - delta1)`` at ``theta1 > theta0``."""
    if not theta1 > spec.theta0:
        raise DomainError(f"theta1 must exceed theta0={spec.theta0}, got {theta1}")
    delta = hypothetical_distribution(spec.theta0, theta1, spec.n, spec.sigma2).mean
    p = float(normal.sf(spec.c_alpha - delta))
    return Power(p, float(normal.cdf(spec.c_alpha - delta)), delta)


def rejection_rate(theta_gen: float, spec: TestSpec, reps: int, seed_plan=None, threads: int = 1) -> Proportion:
    """Monte Carlo frequency of rejection when data come from ``theta_gen``."""
    model = StatisticalModel(ModelKind.NORMAL_IID, (theta_gen,), spec.sigma2, spec.n)
    xbar = _sample_means(model, reps, seed_plan, threads)
    rate = float(np.mean(pivot_value(xbar, spec.theta0, spec.n, spec.sigma2) > spec.c_alpha))
    return Proportion(rate, math.sqrt(rate * (1.0 - rate) / reps), int(reps))


def null_p_values(spec: TestSpec, reps: int, seed_plan=None, threads: int = 1) -> np.ndarray:
    model = StatisticalModel(ModelKind.NORMAL_IID, (spec.theta0,), spec.sigma2, spec.n)
    return p_values(_sample_means(model, reps, seed_plan, threads), spec)


def power_table(spec: TestSpec, theta1_grid) -> Table:
    rows = [power(t, spec) for t in theta1_grid]
    return Table.from_columns(
        theta1=list(map(float, theta1_grid)),
        delta1=[r.delta1 for r in rows],
        power=[r.power for r in rows],
        type2=[r.type2 for r in rows],
    )
