"""Parametric sampling models and seeded draws from them.

Every model is a location (or, for the Uniform, scale) family driven by
standard noise that does not depend on the parameter. Drawing with the same
generator state at two parameter values therefore yields common random
numbers, which the risk-curve code relies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DataError, DomainError
from .rng import SeedPlan, as_seed_plan, check_seed


class ModelKind(str, enum.Enum):
    NORMAL_IID = "NormalIID"
    MULTI_NORMAL_ISO = "MultiNormalIso"
    LAPLACE_IID = "LaplaceIID"
    UNIFORM_IID = "UniformIID"
    LINEAR_REGRESSION = "LinearRegressionNIID"


_UNIVARIATE = {ModelKind.NORMAL_IID, ModelKind.LAPLACE_IID, ModelKind.UNIFORM_IID}


def _as_tuple(x) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ConfigurationError("theta_star must be a scalar or a 1-d vector")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class StatisticalModel:
    """A sampling law with its true parameter ``theta_star``.

    ``n`` is the number of observations per coordinate. For the isotropic
    multivariate Normal, ``m`` is the parameter dimension and a sample is an
    ``n x m`` matrix whose rows are independent ``N(theta, sigma2 I_m)``
    draws. For regression, ``theta_star`` holds the coefficients and
    ``design`` the fixed ``n x k`` regressor matrix; a sample is the ``n x 1``
    response.

    Laplace is parameterised by location and scale ``b`` with variance
    ``2 b**2 = sigma2``. Uniform is ``U[0, theta]``; ``sigma2`` is unused.
    """

    kind: ModelKind
    theta_star: tuple[float, ...]
    sigma2: float = 1.0
    n: int = 1
    design: tuple[tuple[float, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "theta_star", _as_tuple(self.theta_star))
        if self.design is not None:
            X = np.asarray(self.design, dtype=float)
            object.__setattr__(self, "design", tuple(tuple(map(float, r)) for r in X))
        self.validate()

    def validate(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        if not np.all(np.isfinite(self.theta_star)):
            raise ConfigurationError("theta_star must be finite")
        if self.kind is not ModelKind.UNIFORM_IID and not (self.sigma2 > 0):
            raise ConfigurationError(f"sigma2 must be positive, got {self.sigma2}")
        if self.kind in _UNIVARIATE and len(self.theta_star) != 1:
            raise ConfigurationError(f"{self.kind.value} takes a scalar theta_star")
        if self.kind is ModelKind.UNIFORM_IID and not self.theta_star[0] > 0:
            raise DomainError("Uniform upper endpoint theta_star must be positive")
        if self.kind is ModelKind.LINEAR_REGRESSION:
            if self.design is None:
                raise ConfigurationError("regression model needs a design matrix")
            X = self.design_matrix
            if X.shape[0] != self.n:
                raise ConfigurationError("design rows must equal n")
            if X.shape[1] != len(self.theta_star):
                raise ConfigurationError("design columns must equal len(theta_star)")
            if self.n <= X.shape[1]:
                raise ConfigurationError("regression needs n > number of coefficients")

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.theta_star)

    @property
    def m(self) -> int:
        return len(self.theta_star)

    @property
    def columns(self) -> int:
        """Number of columns of one sample matrix."""
        return self.m if self.kind is ModelKind.MULTI_NORMAL_ISO else 1

    @property
    def design_matrix(self) -> np.ndarray | None:
        return None if self.design is None else np.array(self.design)

    def with_theta(self, theta) -> StatisticalModel:
        return replace(self, theta_star=_as_tuple(theta))

    def with_n(self, n: int) -> StatisticalModel:
        return replace(self, n=int(n))

    def draw(self, rng: np.random.Generator, reps: int) -> np.ndarray:
        """Return ``reps`` independent samples as an array ``(reps, n, columns)``."""
        shape = (int(reps), self.n, self.columns)
        theta = self.theta
        k = self.kind
        if k is ModelKind.NORMAL_IID or k is ModelKind.MULTI_NORMAL_ISO:
            out = theta + np.sqrt(self.sigma2) * rng.standard_normal(shape)
        elif k is ModelKind.LAPLACE_IID:
            out = theta + rng.laplace(0.0, np.sqrt(self.sigma2 / 2.0), shape)
        elif k is ModelKind.UNIFORM_IID:
            out = theta * rng.random(shape)
        else:
            noise = np.sqrt(self.sigma2) * rng.standard_normal(shape)
            out = (self.design_matrix @ theta)[:, None] + noise
        if not np.all(np.isfinite(out)):
            raise DataError(f"{k.value} sampler produced non-finite values")
        return out


def normal_iid(theta: float = 0.0, sigma2: float = 1.0, n: int = 1) -> StatisticalModel:
    return StatisticalModel(ModelKind.NORMAL_IID, (theta,), sigma2, n)


def multi_normal_iso(theta, sigma2: float = 1.0, n: int = 1) -> StatisticalModel:
    return StatisticalModel(ModelKind.MULTI_NORMAL_ISO, theta, sigma2, n)


def laplace_iid(theta: float = 0.0, sigma2: float = 2.0, n: int = 1) -> StatisticalModel:
    return StatisticalModel(ModelKind.LAPLACE_IID, (theta,), sigma2, n)


def uniform_iid(theta: float = 1.0, n: int = 1) -> StatisticalModel:
    return StatisticalModel(ModelKind.UNIFORM_IID, (theta,), 1.0, n)


def linear_regression(beta, design, sigma2: float = 1.0) -> StatisticalModel:
    X = np.asarray(design, dtype=float)
    return StatisticalModel(ModelKind.LINEAR_REGRESSION, beta, sigma2, X.shape[0], X)


@dataclass(frozen=True, eq=False)
class Sample:
    values: np.ndarray
    model: StatisticalModel
    seed: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.model.n, self.model.columns):
            raise DataError(
                f"sample shape {v.shape} does not match model dims "
                f"({self.model.n}, {self.model.columns})"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def draw_sample(model: StatisticalModel, seed: int) -> Sample:
    rng = np.random.default_rng(check_seed(seed))
    return Sample(model.draw(rng, 1)[0], model, seed)


def draw_panel(model: StatisticalModel, n_periods: int, seed: int) -> Sample:
    """Draw ``n_periods`` independent rows ``X_t = (X_1t, ..., X_mt)``."""
    if model.kind is not ModelKind.MULTI_NORMAL_ISO:
        raise ConfigurationError("panels are drawn from the MultiNormalIso model only")
    if int(n_periods) < 1:
        raise ConfigurationError("n_periods must be a positive integer")
    return draw_sample(model.with_n(n_periods), seed)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    values: np.ndarray  # sorted

    @property
    def reps(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def variance(self) -> float:
        return float(np.var(self.values, ddof=1))

    def quantile(self, q):
        return np.quantile(self.values, q, method="linear")

    def cdf(self, x):
        return np.searchsorted(self.values, x, side="right") / self.reps


def empirical_sampling_distribution(
    model: StatisticalModel,
    statistic: Callable,
    reps: int,
    seed_plan: SeedPlan | int | None = None,
    *,
    vectorized: bool = False,
    threads: int = 1,
) -> EmpiricalDistribution:
    """Simulate the sampling distribution of ``statistic`` under ``model``.

    With ``vectorized=False`` the statistic receives one :class:`Sample` per
    replication. With ``vectorized=True`` it receives a whole chunk as an
    array of shape ``(chunk, n, columns)`` and must return one value per row.
    """
    if int(reps) < 2:
        raise ConfigurationError("reps must be at least 2")
    plan = as_seed_plan(seed_plan)

    def work(rng, lo, hi):
        batch = model.draw(rng, hi - lo)
        if vectorized:
            out = np.asarray(statistic(batch), dtype=float).reshape(hi - lo)
        else:
            out = np.array(
                [statistic(Sample(row, model, plan.master_seed)) for row in batch],
                dtype=float,
            )
        bad = np.flatnonzero(~np.isfinite(out))
        if bad.size:
            raise DataError(f"statistic returned a non-finite value at replication {lo + bad[0]}")
        return out

    values = np.concatenate(plan.map_chunks(reps, work, threads))
    values.sort()
    values.setflags(write=False)
    return EmpiricalDistribution(values)

