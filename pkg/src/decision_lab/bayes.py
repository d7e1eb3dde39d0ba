"""Conjugate Normal updating, posterior risk and Bayes actions.

Posterior risk is computed by quadrature on a grid. Normal posteriors are
discretised on ``mean +/- 8 sd`` before any risk computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DataError
from .losses import LossFunction, LossKind
from .models import Sample
from .risk import RiskCurve, Verdict, dominance_on_grid

GRID_POINTS = 2001
GRID_HALF_WIDTH = 8.0
_NORMALISED_TOL = 1e-9


@dataclass(frozen=True)
class NormalPrior:
    mu0: float
    tau2: float
    support_eps: float = 1e-6

    def __post_init__(self):
        if not self.tau2 > 0:
            raise ConfigurationError(f"prior variance must be positive, got {self.tau2}")


@dataclass(frozen=True, eq=False)
class GridPrior:
    """Prior weights on grid nodes, normalised to sum to one."""

    theta_grid: np.ndarray
    weights: np.ndarray
    support_eps: float = 1e-6

    def __post_init__(self):
        g = np.asarray(self.theta_grid, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if g.ndim != 1 or g.shape != w.shape or g.size == 0:
            raise ConfigurationError("grid and weights must be matching nonempty vectors")
        if np.any(np.diff(g) <= 0):
            raise ConfigurationError("prior grid must be strictly increasing")
        if np.any(w < 0) or not w.sum() > 0:
            raise ConfigurationError("prior weights must be nonnegative and not all zero")
        object.__setattr__(self, "theta_grid", g)
        object.__setattr__(self, "weights", w / w.sum())


@dataclass(frozen=True)
class NormalPosterior:
    mu: float
    tau2: float
    n: int = 0

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.tau2))


@dataclass(frozen=True, eq=False)
class GridPosterior:
    theta_grid: np.ndarray
    weights: np.ndarray
    n: int = 0

    def __post_init__(self):
        object.__setattr__(self, "theta_grid", np.asarray(self.theta_grid, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.theta_grid.shape != self.weights.shape or self.theta_grid.ndim != 1:
            raise DataError("posterior grid and weights must be matching vectors")

    @property
    def step(self) -> float:
        return float(np.min(np.diff(self.theta_grid))) if self.theta_grid.size > 1 else 0.0

    def mean(self) -> float:
        return float(np.dot(self.weights, self.theta_grid))

    def variance(self) -> float:
        return float(np.dot(self.weights, (self.theta_grid - self.mean()) ** 2))

    def median(self) -> float:
        """Smallest grid point whose cumulative weight reaches one half."""
        cdf = np.cumsum(self.weights)
        return float(self.theta_grid[np.searchsorted(cdf, 0.5 - 1e-12)])

    def mode(self) -> float:
        return float(self.theta_grid[int(np.argmax(self.weights))])


def _data(sample) -> np.ndarray:
    if isinstance(sample, Sample):
        return sample.values[:, 0]
    x = np.asarray(sample, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise DataError("data must be finite")
    return x


def posterior_normal_normal(prior: NormalPrior, sample, sigma2: float) -> NormalPosterior:
    """Conjugate update of a Normal prior on a Normal mean with known variance."""
    if not sigma2 > 0:
        raise ConfigurationError(f"sigma2 must be positive, got {sigma2}")
    x = _data(sample)
    n = x.size
    if n == 0:
        return NormalPosterior(prior.mu0, prior.tau2, 0)
    precision = 1.0 / prior.tau2 + n / sigma2
    mu = (prior.mu0 / prior.tau2 + x.sum() / sigma2) / precision
    return NormalPosterior(float(mu), float(1.0 / precision), n)


def grid_update(prior: GridPrior, sample, sigma2: float) -> GridPosterior:
    """Brute-force posterior on the prior's grid: prior times Normal likelihood."""
    if not sigma2 > 0:
        raise ConfigurationError(f"sigma2 must be positive, got {sigma2}")
    x = _data(sample)
    g = prior.theta_grid
    with np.errstate(divide="ignore"):
        logpost = np.log(prior.weights)
    if x.size:
        resid = x[None, :] - g[:, None]
        logpost = logpost - np.sum(resid**2, axis=1) / (2.0 * sigma2)
    logpost -= np.max(logpost)
    w = np.exp(logpost)
    return GridPosterior(g, w / w.sum(), x.size)


def discretize(post, points: int = GRID_POINTS, half_width: float = GRID_HALF_WIDTH) -> GridPosterior:
    if isinstance(post, GridPosterior):
        return post
    g = np.linspace(post.mu - half_width * post.sd, post.mu + half_width * post.sd, points)
    w = np.exp(-0.5 * (g - post.mu) ** 2 / post.tau2)
    return GridPosterior(g, w / w.sum(), post.n)


_BAYES_LOSSES = (LossKind.SQUARE, LossKind.ABSOLUTE, LossKind.ZERO_ONE_EPS)


def _loss_matrix(kind: LossKind, actions: np.ndarray, grid: np.ndarray, eps) -> np.ndarray:
    d = actions[:, None] - grid[None, :]
    if kind is LossKind.SQUARE:
        return d * d
    if kind is LossKind.ABSOLUTE:
        return np.abs(d)
    if eps is None:
        eps = 1e-6 * (1.0 + np.abs(grid))[None, :]
    return (np.abs(d) >= eps).astype(float)


def _checked(post) -> GridPosterior:
    g = discretize(post)
    if np.any(g.weights < 0) or abs(g.weights.sum() - 1.0) > _NORMALISED_TOL:
        raise DataError(f"posterior weights sum to {g.weights.sum():.12g}, not 1")
    return g


def posterior_risk(posterior, loss: LossFunction, action: float) -> float:
    """Expected loss of ``action`` under the posterior, by grid quadrature."""
    if loss.kind not in _BAYES_LOSSES:
        raise ConfigurationError(f"posterior risk supports Square, Absolute, ZeroOneEps, not {loss.kind.value}")
    g = _checked(posterior)
    L = _loss_matrix(loss.kind, np.array([float(action)]), g.theta_grid, loss.eps)
    return float(L[0] @ g.weights)


@dataclass(frozen=True)
class BayesAction:
    loss: str
    action: float
    closed_form: float
    closed_form_name: str
    gap: float
    step: float
    matches_closed_form: bool
    ties: int = 1
    eps: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "loss": self.loss,
            "action": self.action,
            "closed_form": self.closed_form,
            "closed_form_name": self.closed_form_name,
            "gap": self.gap,
            "action_grid_step": self.step,
            "matches_closed_form": self.matches_closed_form,
            "ties": self.ties,
            "tie_break": "first-index",
            "eps": self.eps,
        }


def bayes_action(posterior, loss_kind, eps: float | None = None, actions=None) -> BayesAction:
    """Minimise posterior risk over an action grid and compare with the closed form.

    Square loss should land on the posterior mean, Absolute on the median and
    ZeroOneEps on the mode. The action grid defaults to the posterior grid;
    ``eps`` for the zero-one loss defaults to two grid steps. The match flag
    is set when the numeric minimiser lies within one action-grid step.
    """
    kind = LossKind(loss_kind)
    if kind not in _BAYES_LOSSES:
        raise ConfigurationError(f"no Bayes action for {kind.value}")
    g = _checked(posterior)
    acts = g.theta_grid if actions is None else np.asarray(actions, dtype=float)
    step = float(np.min(np.diff(acts))) if acts.size > 1 else 0.0
    if kind is LossKind.ZERO_ONE_EPS and eps is None:
        eps = 2.0 * g.step
    risks = _loss_matrix(kind, acts, g.theta_grid, eps) @ g.weights
    best = int(np.argmin(risks))
    ties = int(np.sum(risks <= risks[best] * (1 + 1e-12) + 1e-300))

    normal = isinstance(posterior, NormalPosterior)
    if kind is LossKind.SQUARE:
        name, closed = "mean", posterior.mu if normal else g.mean()
    elif kind is LossKind.ABSOLUTE:
        name, closed = "median", posterior.mu if normal else g.median()
    else:
        name, closed = "mode", posterior.mu if normal else g.mode()
    action = float(acts[best])
    gap = abs(action - closed)
    return BayesAction(kind.value, action, float(closed), name, gap, step,
                       bool(gap <= step * (1 + 1e-9)), ties, eps)


def check_full_support(prior, theta_grid, eps: float) -> np.ndarray:
    """Whether the prior puts positive mass on ``[theta - eps, theta + eps]``.

    A grid prior is read as the piecewise-linear density through its node
    weights, zero outside the grid. A Normal prior is checked in log space so
    far-tail windows are not lost to underflow.
    """
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    pts = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    if isinstance(prior, NormalPrior):
        z = (np.abs(pts - prior.mu0) + eps) / np.sqrt(prior.tau2)
        log_lower = np.log(2 * eps) - 0.5 * z * z - 0.5 * np.log(2 * np.pi * prior.tau2)
        return np.isfinite(log_lower)
    g, w = prior.theta_grid, prior.weights
    out = np.empty(pts.size, dtype=bool)
    for i, t in enumerate(pts):
        a, b = t - eps, t + eps
        inner = g[(g > a) & (g < b)]
        xs = np.concatenate(([a], inner, [b]))
        dens = np.interp(xs, g, w, left=0.0, right=0.0)
        out[i] = np.trapezoid(dens, xs) > 0
    return out


@dataclass(frozen=True)
class MinimaxCheck:
    is_constant: bool
    is_grid_undominated: bool
    minimax_flag: bool
    vacuous: bool
    spread: float
    dominated_by: tuple[int, ...] = ()


def constant_risk_minimax_check(curve: RiskCurve, candidates: Sequence[RiskCurve],
                                tol: float = 0.0) -> MinimaxCheck:
    """Grid check of the constant-risk route to minimaxity.

    The curve counts as constant when its range is within ``tol`` plus three
    times its largest standard error, and as undominated when no candidate
    grid-dominates it. Neither is a proof over the whole parameter space.
    """
    spread = float(np.max(curve.risk) - np.min(curve.risk))
    is_constant = spread <= tol + 3.0 * float(np.max(curve.stderr))
    dominated = tuple(
        j for j, c in enumerate(candidates)
        if dominance_on_grid(c, curve).verdict is Verdict.A_DOMINATES
    )
    undominated = not dominated
    return MinimaxCheck(is_constant, undominated, is_constant and undominated,
                        len(candidates) == 0, spread, dominated)
