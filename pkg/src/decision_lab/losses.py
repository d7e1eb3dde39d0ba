"""Loss functions and the model-inherent distance functions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DataError
from .models import ModelKind


class LossKind(str, enum.Enum):
    SQUARE = "Square"
    ABSOLUTE = "Absolute"
    LP = "Lp"
    ZERO_ONE_EPS = "ZeroOneEps"
    KL_NORMAL = "KLNormal"
    STEIN_SUM = "SteinSum"


@dataclass(frozen=True)
class LossFunction:
    """A loss ``L(estimate, theta)``.

    For vector parameters the per-coordinate losses are summed (so Square and
    SteinSum coincide) and ZeroOneEps compares the largest coordinate gap to
    ``eps``. ``eps=None`` means ``1e-6 * (1 + max|theta|)``. KLNormal is the
    closed form ``n ||est - theta||^2 / (2 sigma2)`` for Normal means.
    """

    kind: LossKind
    p: float = 2.0
    eps: float | None = None
    n: int = 1
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind is LossKind.LP and not self.p > 0:
            raise ConfigurationError(f"Lp loss needs p > 0, got {self.p}")
        if self.eps is not None and not self.eps > 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if self.kind is LossKind.KL_NORMAL and not (self.sigma2 > 0 and self.n >= 1):
            raise ConfigurationError("KLNormal needs n >= 1 and sigma2 > 0")

    def evaluate(self, estimates, theta) -> np.ndarray:
        """Loss of each row of ``estimates`` (shape ``(reps, p)``) at ``theta``."""
        est = np.asarray(estimates, dtype=float)
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if est.ndim == 1:
            est = est[None, :]
        if est.shape[-1] != theta.size:
            raise DataError(f"estimate has dimension {est.shape[-1]}, theta has {theta.size}")
        d = est - theta
        k = self.kind
        if k is LossKind.SQUARE or k is LossKind.STEIN_SUM:
            return np.sum(d**2, axis=1)
        if k is LossKind.ABSOLUTE:
            return np.sum(np.abs(d), axis=1)
        if k is LossKind.LP:
            return np.sum(np.abs(d) ** self.p, axis=1)
        if k is LossKind.KL_NORMAL:
            return self.n * np.sum(d**2, axis=1) / (2.0 * self.sigma2)
        eps = self.eps if self.eps is not None else 1e-6 * (1.0 + np.max(np.abs(theta)))
        return (np.max(np.abs(d), axis=1) >= eps).astype(float)


def loss_eval(loss: LossFunction, estimate, theta) -> float:
    estimate = np.atleast_1d(np.asarray(estimate, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if estimate.shape != theta.shape:
        raise DataError(f"estimate shape {estimate.shape} does not match theta shape {theta.shape}")
    return float(loss.evaluate(estimate[None, :], theta)[0])


def square() -> LossFunction:
    return LossFunction(LossKind.SQUARE)


def stein_sum() -> LossFunction:
    return LossFunction(LossKind.STEIN_SUM)


def _log_density(kind: ModelKind, sigma2: float):
    if kind is ModelKind.NORMAL_IID:
        return lambda x, t: -0.5 * np.log(2 * np.pi * sigma2) - (x - t) ** 2 / (2 * sigma2)
    if kind is ModelKind.LAPLACE_IID:
        b = np.sqrt(sigma2 / 2.0)
        return lambda x, t: -np.log(2 * b) - np.abs(x - t) / b
    raise ConfigurationError(f"no KL quadrature for {kind}")


def kl_quadrature(kind, theta_hat: float, theta: float, n: int = 1, sigma2: float = 1.0) -> float:
    """KL divergence of ``f(x; theta_hat)`` from ``f(x; theta)`` for ``n`` iid draws.

    Computed by numerically integrating ``ln(f(x;theta)/f(x;theta_hat)) f(x;theta)``
    for one observation and multiplying by ``n``.
    """
    kind = ModelKind(kind)
    if kind is ModelKind.UNIFORM_IID:
        if theta_hat < theta:
            return float("inf")
        val, _ = integrate.quad(lambda x: np.log(theta_hat / theta) / theta, 0.0, theta)
        return n * val
    logf = _log_density(kind, sigma2)
    scale = np.sqrt(sigma2)

    def integrand(x):
        lt = logf(x, theta)
        return (lt - logf(x, theta_hat)) * np.exp(lt)

    lo, hi = theta - 40 * scale, theta + 40 * scale
    points = sorted({theta, min(max(theta_hat, lo), hi)})
    val, _ = integrate.quad(integrand, lo, hi, points=points, limit=200, epsabs=1e-13, epsrel=1e-11)
    return n * val


class DistanceKind(str, enum.Enum):
    ND = "ND"
    AD = "AD"
    SUP = "SUP"


def inherent_distance(kind, estimates, theta_star: float) -> float:
    """Distance of estimates from the true value under the model's own metric.

    ND (Normal) is the squared gap and AD (Laplace) the absolute gap of one
    estimate. SUP (Uniform) is the largest absolute gap over a collection of
    estimates, an empirical stand-in for the supremum over sample points.
    """
    kind = DistanceKind(kind)
    est = np.atleast_1d(np.asarray(estimates, dtype=float)).ravel()
    if kind is DistanceKind.SUP:
        if est.size == 0:
            raise DataError("SUP distance needs at least one estimate")
        return float(np.max(np.abs(est - theta_star)))
    if est.size != 1:
        raise DataError(f"{kind.value} distance takes a single estimate")
    gap = float(est[0] - theta_star)
    return gap * gap if kind is DistanceKind.ND else abs(gap)
