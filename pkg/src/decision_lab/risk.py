"""Monte Carlo risk, MSE at the true value, grid dominance and rule selection.

All universal statements ("for every theta") are evaluated on explicit finite
grids. Nothing here certifies admissibility; :func:`dominance_on_grid` only
reports grid-dominance between two given candidates.

Risk curves use common random numbers: every grid point reuses the same
chunk seeds, so the standard noise behind replication ``i`` is identical at
every theta and for every estimator evaluated on it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DataError
from .estimators import EstimatorSpec
from .losses import LossFunction, LossKind
from .models import StatisticalModel
from .rng import SeedPlan, as_seed_plan
from .tables import Table

SIGNIFICANCE = 3.0
TIE_BREAK = "first-index"


def _check_reps(reps: int, minimum: int = 100) -> int:
    if int(reps) < minimum:
        raise ConfigurationError(f"reps must be at least {minimum}, got {reps}")
    return int(reps)


def simulate_estimates(
    model: StatisticalModel,
    estimators: Sequence[EstimatorSpec],
    reps: int,
    seed_plan: SeedPlan | int | None = None,
    threads: int = 1,
    reduce=None,
):
    """Apply each estimator to the same ``reps`` samples drawn from ``model``.

    ``reduce(estimates, lo)`` maps the per-chunk list of estimate arrays to a
    per-chunk result; the default keeps the estimates. Chunk results are
    concatenated in replication order.
    """
    plan = as_seed_plan(seed_plan)
    design = model.design_matrix

    def work(rng, lo, hi):
        batch = model.draw(rng, hi - lo)
        ests = [e.apply(batch, design, offset=lo) for e in estimators]
        return ests if reduce is None else reduce(ests, lo)

    chunks = plan.map_chunks(reps, work, threads)
    if reduce is None:
        return [np.concatenate([c[j] for c in chunks]) for j in range(len(estimators))]
    return np.concatenate(chunks)


def replicate_losses(model, theta, estimators, loss, reps, seed_plan=None, threads=1) -> np.ndarray:
    """Per-replication losses at ``theta``, shape ``(reps, len(estimators))``."""
    at = model.with_theta(theta)
    th = at.theta

    def reduce(ests, lo):
        return np.column_stack([loss.evaluate(e, th) for e in ests])

    return simulate_estimates(at, estimators, reps, seed_plan, threads, reduce)


@dataclass(frozen=True)
class RiskEstimate:
    risk: float
    stderr: float


def _mean_se(x: np.ndarray) -> RiskEstimate:
    return RiskEstimate(float(np.mean(x)), float(np.std(x, ddof=1) / np.sqrt(x.size)))


def risk_mc(model, theta, estimator: EstimatorSpec, loss: LossFunction, reps: int,
            seed_plan=None, threads: int = 1) -> RiskEstimate:
    reps = _check_reps(reps)
    return _mean_se(replicate_losses(model, theta, [estimator], loss, reps, seed_plan, threads)[:, 0])


def paired_difference(model, theta, est_a, est_b, loss, reps, seed_plan=None, threads=1) -> RiskEstimate:
    """Risk of ``est_a`` minus risk of ``est_b`` on shared samples, with paired stderr."""
    reps = _check_reps(reps)
    L = replicate_losses(model, theta, [est_a, est_b], loss, reps, seed_plan, threads)
    return _mean_se(L[:, 0] - L[:, 1])


def radial_grid(norms, m: int) -> np.ndarray:
    """Grid points ``(r, 0, ..., 0)`` for each norm ``r``."""
    norms = np.asarray(norms, dtype=float)
    grid = np.zeros((norms.size, m))
    grid[:, 0] = norms
    return grid


def _grid_points(model: StatisticalModel, theta_grid) -> np.ndarray:
    g = np.asarray(theta_grid, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    if g.ndim != 2 or g.shape[0] == 0:
        raise ConfigurationError("theta grid must be a nonempty list of points")
    if g.shape[1] != model.m:
        raise ConfigurationError(f"grid points have dimension {g.shape[1]}, model has {model.m}")
    if g.shape[1] == 1 and np.any(np.diff(g[:, 0]) <= 0):
        raise ConfigurationError("theta grid must be strictly increasing")
    return g


@dataclass(frozen=True, eq=False)
class RiskCurve:
    """Risk estimates on a grid.

    ``theta_grid`` is ``(G, m)``. ``coord`` is the scalar used for reporting and
    integration: the parameter itself when ``m == 1``, else its Euclidean norm.
    """

    theta_grid: np.ndarray
    risk: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("theta_grid", "risk", "stderr"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.theta_grid.ndim == 1:
            g = self.theta_grid[:, None]
            g.setflags(write=False)
            object.__setattr__(self, "theta_grid", g)
        if not (len(self.theta_grid) == len(self.risk) == len(self.stderr)):
            raise DataError("grid, risk and stderr lengths differ")
        if np.any(self.risk < 0) or np.any(self.stderr < 0):
            raise DataError("risk and stderr must be nonnegative")

    @property
    def coord(self) -> np.ndarray:
        if self.theta_grid.shape[1] == 1:
            return self.theta_grid[:, 0]
        return np.linalg.norm(self.theta_grid, axis=1)

    @property
    def loss_kind(self) -> str | None:
        return self.meta.get("loss")

    def table(self) -> Table:
        return Table.from_columns(theta=self.coord, risk=self.risk, stderr=self.stderr)

    def to_csv(self) -> str:
        return self.table().to_csv(self.meta)

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "theta_grid": self.theta_grid,
            "risk": self.risk,
            "stderr": self.stderr,
        }


def _meta(model, estimator, loss, reps, plan, **extra) -> dict:
    meta = {
        "estimator": estimator.name,
        "loss": loss.kind.value,
        "model": model.kind.value,
        "n": model.n,
        "sigma2": model.sigma2,
        "reps": int(reps),
        "master_seed": plan.master_seed,
        "chunk_size": plan.chunk_size,
        "tie_break": TIE_BREAK,
    }
    meta.update(extra)
    return meta


def risk_curve(model, theta_grid, estimator: EstimatorSpec, loss: LossFunction, reps: int,
               seed_plan=None, threads: int = 1) -> RiskCurve:
    return risk_curves(model, theta_grid, [estimator], loss, reps, seed_plan, threads)[0]


def risk_curves(model, theta_grid, estimators, loss, reps, seed_plan=None, threads=1) -> list[RiskCurve]:
    """Risk curves for several estimators evaluated on the same samples."""
    reps = _check_reps(reps)
    plan = as_seed_plan(seed_plan)
    grid = _grid_points(model, theta_grid)
    risk = np.empty((len(estimators), len(grid)))
    se = np.empty_like(risk)
    for g, theta in enumerate(grid):
        L = replicate_losses(model, theta, estimators, loss, reps, plan, threads)
        for j in range(len(estimators)):
            r = _mean_se(L[:, j])
            risk[j, g], se[j, g] = r.risk, r.stderr
    return [
        RiskCurve(grid, risk[j], se[j], _meta(model, e, loss, reps, plan))
        for j, e in enumerate(estimators)
    ]


@dataclass(frozen=True)
class MSEDecomposition:
    mse: float
    bias: np.ndarray
    variance: float

    @property
    def bias_norm2(self) -> float:
        return float(np.sum(self.bias**2))


def mse_bias_at_true(model: StatisticalModel, estimator: EstimatorSpec, reps: int,
                     seed_plan=None, threads: int = 1) -> MSEDecomposition:
    """MSE, bias and variance of the estimator's sampling distribution at ``theta_star``.

    All three come from one replication set. The variance is the mean squared
    deviation from the replication mean (divisor ``reps``), so
    ``mse == variance + |bias|^2`` up to rounding. The MSE is computed exactly
    as :func:`risk_mc` computes square-loss risk and agrees with it bit for bit
    under the same seed plan.
    """
    reps = _check_reps(reps)
    est = simulate_estimates(model, [estimator], reps, seed_plan, threads)[0]
    theta = model.theta
    mse = float(np.mean(LossFunction(LossKind.SQUARE).evaluate(est, theta)))
    d = est - theta
    bias = d.mean(axis=0)
    variance = float(np.sum(np.mean((d - bias) ** 2, axis=0)))
    return MSEDecomposition(mse, bias, variance)


@dataclass(frozen=True, eq=False)
class QuantifierContrast:
    theta_star: np.ndarray
    mse_at_theta_star: float
    curve: RiskCurve
    argmin_theta: np.ndarray
    theta_star_in_range: bool

    @property
    def curve_min(self) -> float:
        return float(np.min(self.curve.risk))


def quantifier_contrast(estimator, model, theta_star, theta_grid, reps, seed_plan=None,
                        threads=1) -> QuantifierContrast:
    """Put the MSE at the true value next to the whole MSE curve over a grid.

    The minimiser of the curve is reported (first index on ties); it need not
    sit at ``theta_star``.
    """
    at = model.with_theta(theta_star)
    mse = mse_bias_at_true(at, estimator, reps, seed_plan, threads).mse
    curve = risk_curve(model, theta_grid, estimator, LossFunction(LossKind.SQUARE), reps,
                       seed_plan, threads)
    j = int(np.argmin(curve.risk))
    c = curve.coord
    star = np.linalg.norm(at.theta) if at.m > 1 else at.theta[0]
    in_range = bool(c.min() <= star <= c.max())
    return QuantifierContrast(at.theta, mse, curve, curve.theta_grid[j], in_range)


class Verdict(str, enum.Enum):
    A_DOMINATES = "ADominates"
    B_DOMINATES = "BDominates"
    CROSS = "Cross"
    INDISTINGUISHABLE = "Indistinguishable"


@dataclass(frozen=True, eq=False)
class DominanceReport:
    verdict: Verdict
    theta: np.ndarray
    diff: np.ndarray
    significant: np.ndarray
    tolerance_rule: str

    def table(self) -> Table:
        return Table.from_columns(theta=self.theta, diff=self.diff, significant=self.significant)

    def to_csv(self, meta: dict | None = None) -> str:
        m = {"verdict": self.verdict.value, "tolerance_rule": self.tolerance_rule}
        m.update(meta or {})
        return self.table().to_csv(m)


def _same_grid(a: RiskCurve, b: RiskCurve) -> None:
    if a.theta_grid.shape != b.theta_grid.shape or not np.array_equal(a.theta_grid, b.theta_grid):
        raise DataError("risk curves are on different grids")
    if a.loss_kind != b.loss_kind:
        raise DataError(f"risk curves use different losses ({a.loss_kind} vs {b.loss_kind})")


def dominance_on_grid(a: RiskCurve, b: RiskCurve, k: float = SIGNIFICANCE) -> DominanceReport:
    """Grid-dominance of curve ``a`` over curve ``b``.

    A point is significant when ``|risk_a - risk_b| > k * sqrt(se_a^2 + se_b^2)``.
    ``a`` dominates when it is significantly better somewhere and significantly
    worse nowhere; both directions significant is a crossing.
    """
    _same_grid(a, b)
    diff = a.risk - b.risk
    sig = np.abs(diff) > k * np.sqrt(a.stderr**2 + b.stderr**2)
    a_better = bool(np.any(sig & (diff < 0)))
    b_better = bool(np.any(sig & (diff > 0)))
    if a_better and b_better:
        verdict = Verdict.CROSS
    elif a_better:
        verdict = Verdict.A_DOMINATES
    elif b_better:
        verdict = Verdict.B_DOMINATES
    else:
        verdict = Verdict.INDISTINGUISHABLE
    rule = (
        f"significant iff |diff| > {k:g}*sqrt(se_a^2+se_b^2); a grid-dominates b iff "
        "diff < 0 significantly at >= 1 point and diff > 0 significantly at none"
    )
    return DominanceReport(verdict, a.coord, diff, sig, rule)


@dataclass(frozen=True)
class MaxRisk:
    theta: np.ndarray
    risk: float
    index: int


def max_risk(curve: RiskCurve) -> MaxRisk:
    """Largest risk on the grid; ties go to the first (smallest) grid point."""
    j = int(np.argmax(curve.risk))
    return MaxRisk(curve.theta_grid[j], float(curve.risk[j]), j)


def normal_prior_weights(coord, mu: float = 0.0, tau2: float = 1.0) -> np.ndarray:
    coord = np.asarray(coord, dtype=float)
    return np.exp(-0.5 * (coord - mu) ** 2 / tau2)


def bayes_risk(curve: RiskCurve, prior) -> float:
    """Trapezoidal integral of risk against prior weights on the grid.

    The weights are renormalised by their own trapezoidal integral, so any
    nonnegative vector (a density evaluated on the grid, an indicator) works.
    """
    w = np.asarray(prior, dtype=float)
    if w.shape != curve.risk.shape:
        raise DataError("prior weights must match the grid")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DataError("prior weights must be finite and nonnegative")
    x = curve.coord
    if x.size == 1:
        if w[0] == 0:
            raise DataError("prior weights are all zero")
        return float(curve.risk[0])
    norm = np.trapezoid(w, x)
    if not norm > 0:
        # isolated point masses have zero trapezoidal area; use them directly
        if w.sum() == 0:
            raise DataError("prior weights are all zero")
        return float(np.dot(w, curve.risk) / w.sum())
    return float(np.trapezoid(w * curve.risk, x) / norm)


MINIMAX = "minimax"


@dataclass(frozen=True)
class BayesWithPrior:
    weights: tuple[float, ...]


@dataclass(frozen=True)
class RuleSelection:
    winner: int
    scores: np.ndarray
    criterion: str
    tie_break: str = TIE_BREAK


def select_rule(candidates: Sequence[RiskCurve], criterion=MINIMAX) -> RuleSelection:
    """Choose among candidate risk curves by max risk or Bayes risk.

    Only the listed candidates compete. Ties go to the earliest candidate.
    """
    if not candidates:
        raise DataError("no candidate rules")
    for c in candidates[1:]:
        _same_grid(candidates[0], c)
    if isinstance(criterion, BayesWithPrior):
        scores = np.array([bayes_risk(c, criterion.weights) for c in candidates])
        name = "bayes"
    elif criterion == MINIMAX:
        scores = np.array([max_risk(c).risk for c in candidates])
        name = MINIMAX
    else:
        raise ConfigurationError(f"unknown selection criterion {criterion!r}")
    return RuleSelection(int(np.argmin(scores)), scores, name)


@dataclass(frozen=True)
class RegularityCheck:
    finite: bool
    max_slope: float
    within_bound: bool


def check_grid_regularity(curve: RiskCurve, lipschitz: float) -> RegularityCheck:
    """Grid shadow of risk continuity and finiteness.

    Finiteness is checked at every grid point; continuity is approximated by
    requiring adjacent-point slopes not to exceed ``lipschitz``.
    """
    finite = bool(np.all(np.isfinite(curve.risk)))
    x = curve.coord
    if x.size < 2:
        return RegularityCheck(finite, 0.0, finite)
    slope = float(np.max(np.abs(np.diff(curve.risk)) / np.diff(x)))
    return RegularityCheck(finite, slope, finite and slope <= lipschitz)
