"""Point estimators as pure maps from samples to estimates.

Each estimator has a single-sample entry point returning an :class:`Estimate`
and a batched form (:meth:`EstimatorSpec.apply`) that maps an array of
samples ``(reps, n, columns)`` to estimates ``(reps, p)`` for Monte Carlo.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigurationError, DataError, NumericalError, SingularityError
from .models import Sample

CRYSTAL_BALL = 7405926.0


class EstimatorKind(str, enum.Enum):
    LS_MEAN = "LSMean"
    JS = "JS"
    JS_PLUS = "JSPlus"
    PANEL_LS = "PanelLS"
    PANEL_JS_PLUS = "PanelJSPlus"
    CRYSTAL_BALL = "CrystalBall"
    TOY_LAST = "ToyLast"
    TOY_FIRST_LAST = "ToyFirstLast"
    OLS = "OLS"
    REGRESSION_JS = "RegressionJS"


@dataclass(frozen=True)
class Estimate:
    value: np.ndarray
    estimator_name: str
    aux: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "value", np.atleast_1d(np.asarray(self.value, dtype=float)))


def _values(sample) -> np.ndarray:
    v = sample.values if isinstance(sample, Sample) else np.asarray(sample, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] == 0:
        raise DataError("sample must be a nonempty n x m matrix")
    return v


# -- single-sample estimators -------------------------------------------------


def ls_mean(sample) -> Estimate:
    """Coordinate-wise arithmetic mean; for one row this is the row itself."""
    return Estimate(_values(sample).mean(axis=0), EstimatorKind.LS_MEAN.value)


def js_shrink(
    xbar, sigma2: float, per_coord_n: int = 1, positive_part: bool = False
) -> Estimate:
    """James-Stein shrinkage of a mean vector toward the origin.

    The shrink factor is ``1 - (m - 2) * (sigma2 / per_coord_n) / ||xbar||**2``,
    clamped at zero when ``positive_part`` is set.
    """
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    if xbar.ndim != 1 or xbar.size == 0:
        raise DataError("xbar must be a nonempty vector")
    if not sigma2 > 0:
        raise ConfigurationError("sigma2 must be positive")
    if per_coord_n < 1:
        raise ConfigurationError("per_coord_n must be a positive integer")
    factor, clamped = _js_factor(xbar[None, :], sigma2 / per_coord_n, positive_part)
    aux = {"factor": float(factor[0]), "clamped": bool(clamped[0])}
    if xbar.size == 1:
        aux["warning"] = "m=1: shrinkage numerator m-2 is negative"
    name = EstimatorKind.JS_PLUS.value if positive_part else EstimatorKind.JS.value
    return Estimate(factor[0] * xbar, name, aux)


def crystal_ball(sample=None, constant: float = CRYSTAL_BALL) -> Estimate:
    """Return ``constant`` whatever the data."""
    return Estimate([constant], EstimatorKind.CRYSTAL_BALL.value)


def toy_estimators(sample, kind) -> Estimate:
    kind = EstimatorKind(kind)
    v = _values(sample)
    if v.shape[1] != 1:
        raise DataError("toy estimators take a univariate sample")
    if kind is EstimatorKind.TOY_LAST:
        return Estimate(v[-1], kind.value)
    if kind is EstimatorKind.TOY_FIRST_LAST:
        if v.shape[0] < 2:
            raise DataError("ToyFirstLast needs n >= 2")
        return Estimate(0.5 * (v[0] + v[-1]), kind.value)
    raise ConfigurationError(f"{kind.value} is not a toy estimator")


def regression_ols(y, X) -> Estimate:
    y = np.asarray(y, dtype=float).reshape(-1)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != y.size:
        raise DataError(f"design has {X.shape[0]} rows but y has {y.size} entries")
    fit = OLSFit(X)
    beta = fit.coefficients(y[None, :])[0]
    s2 = fit.residual_variance(y[None, :], beta[None, :])[0]
    return Estimate(beta, EstimatorKind.OLS.value, {"s2": s2})


def regression_js(y, X, c: float | None = None) -> Estimate:
    """James-Stein shrinkage of OLS coefficients, ``(1 - c s2 / b'X'Xb) b``.

    ``c`` defaults to ``k - 2`` for ``k`` coefficients; ``s2`` is the residual
    sum of squares over ``n - k``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != y.size:
        raise DataError(f"design has {X.shape[0]} rows but y has {y.size} entries")
    fit = OLSFit(X)
    c = fit.default_c() if c is None else float(c)
    beta, factor, quad, s2 = fit.james_stein(y[None, :], c)
    return Estimate(
        beta[0],
        EstimatorKind.REGRESSION_JS.value,
        {"factor": float(factor[0]), "quad_form": float(quad[0]), "s2": float(s2[0]), "c": c},
    )


# -- shared numerics ----------------------------------------------------------


def _js_factor(xbar: np.ndarray, eff_var: float, positive_part: bool, offset: int = 0):
    m = xbar.shape[-1]
    norm2 = np.einsum("ij,ij->i", xbar, xbar)
    zero = norm2 == 0.0
    if zero.any() and not positive_part:
        raise SingularityError(
            f"||xbar||^2 = 0 in James-Stein shrinkage at replication {offset + np.flatnonzero(zero)[0]}"
        )
    with np.errstate(divide="ignore"):
        factor = np.where(zero, -np.inf, 1.0 - (m - 2) * eff_var / np.where(zero, 1.0, norm2))
    clamped = np.zeros(factor.shape, dtype=bool)
    if positive_part:
        clamped = factor < 0.0
        factor = np.maximum(factor, 0.0)
    return factor, clamped


class OLSFit:
    """Least squares on a fixed design through a thin QR decomposition."""

    rank_tol = 1e-10

    def __init__(self, X: np.ndarray):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n, k = X.shape
        if n < k:
            raise NumericalError(f"design has fewer rows ({n}) than columns ({k})")
        self.X = X
        self.q, self.r = np.linalg.qr(X)
        norms = np.linalg.norm(X, axis=0)
        diag = np.abs(np.diag(self.r))
        for j in range(k):
            if norms[j] == 0.0 or diag[j] <= self.rank_tol * norms[j]:
                raise NumericalError(f"design is rank deficient at column {j}")

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def default_c(self) -> float:
        c = float(self.k - 2)
        if c <= 0:
            raise ConfigurationError(f"default c = k - 2 = {c:g} is not positive; pass c explicitly")
        return c

    def coefficients(self, Y: np.ndarray) -> np.ndarray:
        """Rows of ``Y`` are responses; returns one coefficient row per response."""
        return solve_triangular(self.r, self.q.T @ Y.T).T

    def residual_variance(self, Y: np.ndarray, B: np.ndarray) -> np.ndarray:
        dof = self.X.shape[0] - self.k
        if dof == 0:
            return np.full(Y.shape[0], np.nan)
        resid = Y - B @ self.X.T
        return np.einsum("ij,ij->i", resid, resid) / dof

    def james_stein(self, Y: np.ndarray, c: float, offset: int = 0):
        if not c > 0:
            raise ConfigurationError(f"regression James-Stein needs c > 0, got {c}")
        B = self.coefficients(Y)
        s2 = self.residual_variance(Y, B)
        if np.isnan(s2).any():
            raise NumericalError("residual variance undefined with n == k")
        fitted = B @ self.X.T
        quad = np.einsum("ij,ij->i", fitted, fitted)
        zero = quad == 0.0
        if zero.any():
            raise SingularityError(
                f"b'X'Xb = 0 in regression shrinkage at replication {offset + np.flatnonzero(zero)[0]}"
            )
        factor = 1.0 - c * s2 / quad
        return factor[:, None] * B, factor, quad, s2


# -- specs for Monte Carlo ----------------------------------------------------


@dataclass(frozen=True)
class EstimatorSpec:
    """A named estimator with its tuning constants.

    ``sigma2`` feeds the James-Stein family, ``constant`` the crystal ball and
    ``c`` the regression shrinkage (``None`` means ``k - 2``).
    """

    kind: EstimatorKind
    sigma2: float = 1.0
    constant: float = CRYSTAL_BALL
    c: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if self.kind is EstimatorKind.REGRESSION_JS and self.c is not None and not self.c > 0:
            raise ConfigurationError(f"RegressionJS needs c > 0, got {self.c}")
        if not self.sigma2 > 0:
            raise ConfigurationError("sigma2 must be positive")

    @property
    def name(self) -> str:
        return self.kind.value

    def apply(self, batch: np.ndarray, design: np.ndarray | None = None, offset: int = 0) -> np.ndarray:
        """Map samples ``(reps, n, columns)`` to estimates ``(reps, p)``.

        ``offset`` is the global index of the first replication, used only in
        error messages.
        """
        batch = np.asarray(batch, dtype=float)
        if batch.ndim == 2:
            batch = batch[None]
        reps, n, cols = batch.shape
        k = self.kind
        if k in (EstimatorKind.LS_MEAN, EstimatorKind.PANEL_LS):
            return batch.mean(axis=1)
        if k in (EstimatorKind.JS, EstimatorKind.JS_PLUS, EstimatorKind.PANEL_JS_PLUS):
            xbar = batch.mean(axis=1)
            factor, _ = _js_factor(xbar, self.sigma2 / n, k is not EstimatorKind.JS, offset)
            return factor[:, None] * xbar
        if k is EstimatorKind.CRYSTAL_BALL:
            return np.full((reps, 1), float(self.constant))
        if k in (EstimatorKind.TOY_LAST, EstimatorKind.TOY_FIRST_LAST):
            if cols != 1:
                raise DataError("toy estimators take a univariate sample")
            if k is EstimatorKind.TOY_LAST:
                return batch[:, -1, :].copy()
            if n < 2:
                raise DataError("ToyFirstLast needs n >= 2")
            return 0.5 * (batch[:, 0, :] + batch[:, -1, :])
        if design is None:
            raise ConfigurationError(f"{k.value} needs a design matrix")
        fit = OLSFit(design)
        Y = batch[:, :, 0]
        if k is EstimatorKind.OLS:
            return fit.coefficients(Y)
        c = fit.default_c() if self.c is None else self.c
        return fit.james_stein(Y, c, offset)[0]

    def estimate(self, sample: Sample) -> Estimate:
        design = sample.model.design_matrix if isinstance(sample, Sample) else None
        value = self.apply(_values(sample), design)[0]
        return Estimate(value, self.name)


def ls() -> EstimatorSpec:
    return EstimatorSpec(EstimatorKind.LS_MEAN)


def james_stein(sigma2: float = 1.0, positive_part: bool = False) -> EstimatorSpec:
    return EstimatorSpec(EstimatorKind.JS_PLUS if positive_part else EstimatorKind.JS, sigma2)


def crystal_ball_spec(constant: float = CRYSTAL_BALL) -> EstimatorSpec:
    return EstimatorSpec(EstimatorKind.CRYSTAL_BALL, constant=constant)
