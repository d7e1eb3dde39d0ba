"""Seeded end-to-end demonstrations, each producing an :class:`ExperimentReport`.

A report holds its configuration, a set of tables and a list of checks. The
pass flag of every check is computed from the tables when it is read, never
stored, so a report can be re-audited from its serialised tables alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import inference
from .errors import ConfigurationError, DomainError
from .estimators import CRYSTAL_BALL, EstimatorKind, EstimatorSpec, OLSFit, regression_js
from .losses import LossFunction, LossKind
from .models import draw_sample, linear_regression, multi_normal_iso, normal_iid
from .risk import (
    SIGNIFICANCE,
    mse_bias_at_true,
    quantifier_contrast,
    radial_grid,
    replicate_losses,
    simulate_estimates,
)
from .rng import SeedPlan
from .tables import Table, dumps

Rule = Callable[[Mapping[str, Table]], "tuple[bool, str]"]


@dataclass(frozen=True)
class Check:
    claim: str
    reference: str
    rule: Rule


@dataclass(frozen=True)
class VerdictRecord:
    claim: str
    reference: str
    passed: bool
    detail: str


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    name: str
    config: dict
    tables: dict[str, Table]
    checks: tuple[Check, ...]

    @property
    def verdicts(self) -> list[VerdictRecord]:
        out = []
        for c in self.checks:
            ok, detail = c.rule(self.tables)
            out.append(VerdictRecord(c.claim, c.reference, bool(ok), detail))
        return out

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, reference: str) -> VerdictRecord:
        for v in self.verdicts:
            if v.reference == reference:
                return v
        raise KeyError(reference)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config": self.config,
            "tables": {k: t.to_dict() for k, t in self.tables.items()},
            "verdicts": [
                {"claim": v.claim, "reference": v.reference, "pass": v.passed, "detail": v.detail}
                for v in self.verdicts
            ],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def csv_files(self) -> dict[str, str]:
        meta = {"experiment": self.name, "config": self.config}
        return {f"{self.name}-{k}.csv": t.to_csv(meta) for k, t in self.tables.items()}

    def write(self, out_dir, fmt: str = "both") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt in ("csv", "both"):
            for fname, text in self.csv_files().items():
                p = out / fname
                p.write_text(text)
                written.append(p)
        if fmt in ("json", "both"):
            p = out / f"{self.name}.json"
            p.write_text(self.to_json())
            written.append(p)
        return written


def _within(x, target, se, k=SIGNIFICANCE) -> np.ndarray:
    return np.abs(np.asarray(x) - target) <= k * np.asarray(se)


def _loglog_slope(n, mse) -> float:
    return float(np.polyfit(np.log(n), np.log(mse), 1)[0])


def _plan(seed: int, chunk_size: int | None) -> SeedPlan:
    return SeedPlan(seed) if chunk_size is None else SeedPlan(seed, chunk_size)


def _mean_se(x):
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


# -- shrinkage ----------------------------------------------------------------


def run_stein(m: int = 5, sigma2: float = 1.0, theta_norms: Sequence[float] = (0, 1, 2, 4, 8),
              reps: int = 10**6, seed: int = 0, threads: int = 1,
              chunk_size: int | None = None) -> ExperimentReport:
    """Least squares vs James-Stein vs positive-part James-Stein under summed square loss.

    Grid points are ``(r, 0, ..., 0)`` for each norm ``r``; the isotropic
    model makes the risk depend on the mean only through its norm.
    """
    if int(m) < 2:
        raise DomainError(f"m must be at least 2, got {m}")
    norms = np.asarray(theta_norms, dtype=float)
    if norms.size == 0 or np.any(norms < 0):
        raise ConfigurationError("theta_norms must be a nonempty list of nonnegative norms")
    plan = _plan(seed, chunk_size)
    model = multi_normal_iso(np.zeros(m), sigma2)
    ests = [
        EstimatorSpec(EstimatorKind.LS_MEAN),
        EstimatorSpec(EstimatorKind.JS, sigma2),
        EstimatorSpec(EstimatorKind.JS_PLUS, sigma2),
    ]
    loss = LossFunction(LossKind.STEIN_SUM)
    cols = {k: [] for k in ("risk_ls", "se_ls", "risk_js", "se_js", "risk_jsplus", "se_jsplus",
                            "diff_js_ls", "se_diff_js_ls", "diff_jsplus_js", "se_diff_jsplus_js")}
    for theta in radial_grid(norms, m):
        L = replicate_losses(model, theta, ests, loss, reps, plan, threads)
        for name, j in (("ls", 0), ("js", 1), ("jsplus", 2)):
            r, s = _mean_se(L[:, j])
            cols[f"risk_{name}"].append(r)
            cols[f"se_{name}"].append(s)
        for name, (a, b) in (("js_ls", (1, 0)), ("jsplus_js", (2, 1))):
            r, s = _mean_se(L[:, a] - L[:, b])
            cols[f"diff_{name}"].append(r)
            cols[f"se_diff_{name}"].append(s)
    tables = {"risk": Table.from_columns(theta_norm=norms, **cols)}

    def dominance(t):
        r = t["risk"]
        gap = r.column("risk_ls") - r.column("risk_js")
        band = SIGNIFICANCE * np.hypot(r.column("se_ls"), r.column("se_js"))
        ok = bool(np.all(gap > band))
        return ok, f"min (LS - JS) / band = {np.min(gap / band):.3f}"

    def at_origin(t):
        r = t["risk"]
        i = int(np.flatnonzero(r.column("theta_norm") == 0)[0])
        js, sej = r.column("risk_js")[i], r.column("se_js")[i]
        lsr, sel = r.column("risk_ls")[i], r.column("se_ls")[i]
        ok = bool(_within(js, 2 * sigma2, sej) and _within(lsr, m * sigma2, sel))
        return ok, f"JS {js:.5f} vs {2 * sigma2:g} (se {sej:.2g}); LS {lsr:.5f} vs {m * sigma2:g} (se {sel:.2g})"

    def plus_part(t):
        r = t["risk"]
        d, s = r.column("diff_jsplus_js"), r.column("se_diff_jsplus_js")
        ok = bool(np.all(d <= SIGNIFICANCE * s))
        return ok, f"max (JS+ - JS) = {np.max(d):.3g}"

    def identical(t):
        r = t["risk"]
        ok = bool(np.array_equal(r.column("risk_js"), r.column("risk_ls")))
        return ok, "JS and LS risk columns bit-identical" if ok else "JS and LS risk differ"

    checks = []
    if m > 2:
        checks.append(Check("JS risk is below LS risk at every grid point (3-sigma)", "stein-dominance", dominance))
        if np.any(norms == 0):
            checks.append(Check("at theta = 0, JS risk = 2 sigma2 and LS risk = m sigma2", "stein-origin", at_origin))
    else:
        checks.append(Check("for m = 2 the JS estimator coincides with LS", "stein-m2-identity", identical))
    checks.append(Check("positive-part JS risk does not exceed JS risk (paired, 3-sigma)", "stein-positive-part", plus_part))
    config = {"m": int(m), "sigma2": sigma2, "theta_norms": norms, "reps": int(reps),
              "seed": plan.master_seed, "chunk_size": plan.chunk_size, "loss": loss.kind.value}
    return ExperimentReport("stein", config, tables, tuple(checks))


# -- crystal ball ---------------------------------------------------------------


def default_crystal_grid(constant: float = CRYSTAL_BALL, half_width: float = 0.3, points: int = 61) -> np.ndarray:
    return constant + np.linspace(-half_width, half_width, points)


def run_crystal_ball(n: int = 100, theta_grid=None, lam: float = 0.5, reps: int = 20000,
                     seed: int = 0, threads: int = 1, theta_star: float = 0.0,
                     constant: float = CRYSTAL_BALL, n_multipliers: Sequence[int] = (1, 4, 16),
                     chunk_size: int | None = None) -> ExperimentReport:
    """MSE of the sample mean against a constant estimator near and far from the constant."""
    if not 0 < lam < 1:
        raise ConfigurationError(f"lam must lie in (0, 1), got {lam}")
    grid = default_crystal_grid(constant) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    half = 1.0 / math.sqrt(n)
    if not (grid.min() < constant - half and grid.max() > constant + half):
        raise ConfigurationError(
            f"theta grid must straddle {constant:g} +/- {half:g} to locate both crossings"
        )
    if theta_star == constant:
        raise ConfigurationError("theta_star must differ from the crystal-ball constant")
    plan = _plan(seed, chunk_size)
    ls = EstimatorSpec(EstimatorKind.LS_MEAN)
    cb = EstimatorSpec(EstimatorKind.CRYSTAL_BALL, constant=constant)
    sq = LossFunction(LossKind.SQUARE)
    model = normal_iid(0.0, 1.0, n)

    mse_ls, se_ls, mse_cb = [], [], []
    for theta in grid:
        L = replicate_losses(model, [theta], [ls, cb], sq, reps, plan, threads)
        r, s = _mean_se(L[:, 0])
        mse_ls.append(r)
        se_ls.append(s)
        mse_cb.append(float(L[0, 1]))

    ns = [int(n) * int(k) for k in n_multipliers]
    c_ls, c_se, c_cb = [], [], []
    for nn in ns:
        L = replicate_losses(normal_iid(0.0, 1.0, nn), [theta_star], [ls, cb], sq, reps, plan, threads)
        r, s = _mean_se(L[:, 0])
        c_ls.append(r)
        c_se.append(s)
        c_cb.append(float(np.mean(L[:, 1])))

    tables = {
        "mse": Table.from_columns(theta=grid, mse_mean=mse_ls, se_mean=se_ls, mse_crystal=mse_cb),
        "consistency": Table.from_columns(n=ns, mse_mean=c_ls, se_mean=c_se, mse_crystal=c_cb),
    }
    step = float(np.max(np.diff(grid)))

    def crossings(t):
        r = t["mse"]
        x = r.column("theta")
        g = r.column("mse_crystal") - r.column("mse_mean")
        idx = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))
        found = [x[i] - g[i] * (x[i + 1] - x[i]) / (g[i + 1] - g[i]) for i in idx]
        expected = [constant - half, constant + half]
        ok = len(found) == 2 and all(abs(f - e) <= step for f, e in zip(found, expected))
        offs = ", ".join(f"{f - constant:+.5f}" for f in found)
        return ok, f"crossings at constant {offs}; expected -/+{half:.5f}, step {step:.3g}"

    def band(t):
        r = t["mse"]
        x = r.column("theta")
        inside = np.abs(x - constant) < lam * half
        cbv, lsv, se = r.column("mse_crystal")[inside], r.column("mse_mean")[inside], r.column("se_mean")[inside]
        ok = bool(inside.any() and np.all(cbv <= lam**2 / n) and np.all(lsv - cbv > SIGNIFICANCE * se))
        return ok, f"{int(inside.sum())} grid points within lam/sqrt(n) of the constant"

    def mean_flat(t):
        r = t["mse"]
        ok = bool(np.all(_within(r.column("mse_mean"), 1.0 / n, r.column("se_mean"))))
        return ok, f"mean MSE range [{r.column('mse_mean').min():.6f}, {r.column('mse_mean').max():.6f}] vs {1.0 / n:g}"

    def consistency(t):
        r = t["consistency"]
        nn = r.column("n")
        ls_ok = bool(np.all(_within(r.column("mse_mean"), 1.0 / nn, r.column("se_mean"))))
        cbv = r.column("mse_crystal")
        cb_ok = bool(np.all(cbv == (theta_star - constant) ** 2))
        return ls_ok and cb_ok, f"mean MSE {np.round(r.column('mse_mean'), 6).tolist()}; crystal MSE constant {cbv[0]:.6g}"

    checks = (
        Check("MSE curves cross at constant -/+ 1/sqrt(n)", "crystal-crossing", crossings),
        Check("within lam/sqrt(n) of the constant, the constant beats the mean", "crystal-band", band),
        Check("MSE of the mean is 1/n at every grid point", "crystal-mean-mse", mean_flat),
        Check("away from the constant its MSE does not shrink with n; the mean's does", "crystal-consistency", consistency),
    )
    config = {"n": int(n), "theta_grid": grid, "lam": lam, "reps": int(reps), "seed": plan.master_seed,
              "chunk_size": plan.chunk_size, "theta_star": theta_star, "constant": constant, "n_list": ns}
    return ExperimentReport("crystal-ball", config, tables, checks)


# -- consistency ----------------------------------------------------------------

_CONSISTENCY_ESTIMATORS = (
    ("ls", EstimatorKind.LS_MEAN),
    ("last", EstimatorKind.TOY_LAST),
    ("firstlast", EstimatorKind.TOY_FIRST_LAST),
    ("crystal", EstimatorKind.CRYSTAL_BALL),
)


def run_consistency(n_list: Sequence[int] = (25, 100, 400, 1600), reps: int = 10**5, seed: int = 0,
                    threads: int = 1, theta_star: float = 0.0, constant: float = CRYSTAL_BALL,
                    slope_tol: float = 0.05, chunk_size: int | None = None) -> ExperimentReport:
    """MSE at the true value as n grows, for consistent and inconsistent estimators."""
    ns = [int(v) for v in n_list]
    if len(ns) < 2 or min(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigurationError("n_list must be increasing with at least two values, all >= 2")
    plan = _plan(seed, chunk_size)
    ests = [EstimatorSpec(k, constant=constant) for _, k in _CONSISTENCY_ESTIMATORS]
    sq = LossFunction(LossKind.SQUARE)
    cols = {f"{p}_{name}": [] for name, _ in _CONSISTENCY_ESTIMATORS for p in ("mse", "se")}
    for n in ns:
        L = replicate_losses(normal_iid(theta_star, 1.0, n), [theta_star], ests, sq, reps, plan, threads)
        for j, (name, _) in enumerate(_CONSISTENCY_ESTIMATORS):
            r, s = _mean_se(L[:, j])
            cols[f"mse_{name}"].append(r)
            cols[f"se_{name}"].append(s)
    tables = {"mse": Table.from_columns(n=ns, **cols)}

    def slope_rule(name, target):
        def rule(t):
            r = t["mse"]
            s = _loglog_slope(r.column("n"), r.column(f"mse_{name}"))
            return abs(s - target) <= slope_tol, f"log-log slope {s:.4f}, target {target:g} +/- {slope_tol:g}"
        return rule

    def level_rule(name, target):
        def rule(t):
            r = t["mse"]
            v, s = r.column(f"mse_{name}"), r.column(f"se_{name}")
            return bool(np.all(_within(v, target, s))), f"MSE {np.round(v, 5).tolist()} vs {target:g}"
        return rule

    checks = (
        Check("sample mean MSE falls like 1/n", "consistency-mean-slope", slope_rule("ls", -1.0)),
        Check("last-observation MSE does not fall with n", "consistency-last-slope", slope_rule("last", 0.0)),
        Check("first-and-last average MSE does not fall with n", "consistency-firstlast-slope", slope_rule("firstlast", 0.0)),
        Check("crystal-ball MSE does not fall with n", "consistency-crystal-slope", slope_rule("crystal", 0.0)),
        Check("last-observation MSE is 1", "consistency-last-level", level_rule("last", 1.0)),
        Check("first-and-last average MSE is 1/2", "consistency-firstlast-level", level_rule("firstlast", 0.5)),
    )
    config = {"n_list": ns, "reps": int(reps), "seed": plan.master_seed, "chunk_size": plan.chunk_size,
              "theta_star": theta_star, "constant": constant, "slope_tol": slope_tol}
    return ExperimentReport("consistency", config, tables, checks)


# -- units of measurement ------------------------------------------------------


def make_design(n: int, column_scales: Sequence[float], seed: int) -> np.ndarray:
    """Intercept plus one Normal regressor per entry of ``column_scales``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0x5EED,))))
    scales = np.asarray(column_scales, dtype=float)
    return np.column_stack([np.ones(n), rng.standard_normal((n, scales.size)) * scales])


def run_units_sensitivity(beta: Sequence[float] = (1.0, 1.8, 0.5, -0.004), n: int = 200,
                          sigma2: float = 1.0, scale_factors: Sequence[float] = (1.0, 10.0, 1000.0),
                          c: float | None = None, column: int = 3,
                          column_scales: Sequence[float] = (1.0, 1.0, 0.01), reps: int = 10**4,
                          seed: int = 0, threads: int = 1, magnitude_ratio: float = 1e-3,
                          chunk_size: int | None = None) -> ExperimentReport:
    """How rescaling one regressor changes the summed square loss of regression shrinkage.

    Column ``column`` of the design is multiplied by each factor ``u`` (its
    coefficient becomes ``beta_k / u``). The response and noise are shared
    across factors, so fitted values and the shrink factor are unchanged while
    the rescaled coefficient's squared-error contribution moves by ``1/u^2``.
    """
    beta = np.asarray(beta, dtype=float)
    factors = np.asarray(scale_factors, dtype=float)
    k = beta.size
    if len(column_scales) != k - 1:
        raise ConfigurationError(f"need {k - 1} column_scales for {k} coefficients")
    if not 0 <= column < k:
        raise ConfigurationError(f"column must index a coefficient (0..{k - 1})")
    if factors.size == 0 or np.any(factors <= 0) or factors[0] != 1.0:
        raise ConfigurationError("scale_factors must be positive and start with 1")
    X0 = make_design(n, column_scales, seed)
    c = float(k - 2) if c is None else float(c)
    if not c > 0:
        raise ConfigurationError(f"c must be positive, got {c}")
    plan = _plan(seed, chunk_size)
    spec = EstimatorSpec(EstimatorKind.REGRESSION_JS, c=c)

    inv = {k_: [] for k_ in ("u", "quad_form", "shrink_factor", "s2", "yhat_rel_dev", "quad_rel_dev")}
    con = {k_: [] for k_ in ("u", "coefficient", "beta", "contribution", "magnitude_share", "rank")}
    ref_yhat = ref_quad = None
    for u in factors:
        X = X0.copy()
        X[:, column] *= u
        b = beta.copy()
        b[column] /= u
        OLSFit(X)  # rank check under this scaling
        model = linear_regression(b, X, sigma2)
        y = draw_sample(model, plan.master_seed).values[:, 0]
        est = regression_js(y, X, c)
        fit = OLSFit(X)
        yhat = X @ fit.coefficients(y[None, :])[0]
        if ref_yhat is None:
            ref_yhat, ref_quad = yhat, est.aux["quad_form"]
        inv["u"].append(u)
        inv["quad_form"].append(est.aux["quad_form"])
        inv["shrink_factor"].append(est.aux["factor"])
        inv["s2"].append(est.aux["s2"])
        inv["yhat_rel_dev"].append(float(np.max(np.abs(yhat - ref_yhat)) / np.max(np.abs(ref_yhat))))
        inv["quad_rel_dev"].append(abs(est.aux["quad_form"] - ref_quad) / ref_quad)

        B = simulate_estimates(model, [spec], reps, plan, threads)[0]
        contrib = np.mean((B - b) ** 2, axis=0)
        order = np.argsort(-contrib, kind="stable")
        ranks = np.empty(k, dtype=int)
        ranks[order] = np.arange(1, k + 1)
        share = b**2 / np.sum(b**2)
        for j in range(k):
            con["u"].append(u)
            con["coefficient"].append(j)
            con["beta"].append(float(b[j]))
            con["contribution"].append(float(contrib[j]))
            con["magnitude_share"].append(float(share[j]))
            con["rank"].append(int(ranks[j]))

    tables = {"invariants": Table.from_columns(**inv), "contributions": Table.from_columns(**con)}

    def _rows(t, u, j):
        r = t["contributions"]
        mask = (r.column("u") == u) & (r.column("coefficient") == j)
        return {name: r.column(name)[mask][0] for name in r.columns}

    def invariance(t):
        r = t["invariants"]
        dev = max(r.column("yhat_rel_dev").max(), r.column("quad_rel_dev").max())
        return bool(dev <= 1e-8), f"max relative deviation {dev:.3g} (tolerance 1e-8)"

    def scaling(t):
        worst = 0.0
        for u in factors:
            for j in range(k):
                base = _rows(t, 1.0, j)["contribution"]
                now = _rows(t, u, j)["contribution"]
                expect = base / u**2 if j == column else base
                worst = max(worst, abs(now - expect) / expect)
        return bool(worst <= 1e-6), f"max relative error vs 1/u^2 law {worst:.3g} (tolerance 1e-6)"

    def ranking(t):
        before = _rows(t, 1.0, column)["rank"]
        after = _rows(t, factors[-1], column)["rank"]
        ok = factors.size > 1 and before != after
        return ok, f"rank of coefficient {column}: {before} at u=1, {after} at u={factors[-1]:g}"

    def magnitude(t):
        shares = [_rows(t, 1.0, j)["magnitude_share"] for j in range(1, k)]
        ratio = _rows(t, 1.0, column)["magnitude_share"] / max(shares)
        return bool(ratio < magnitude_ratio), f"raw-unit squared magnitude ratio {ratio:.3g} (threshold {magnitude_ratio:g})"

    checks = (
        Check("fitted values and b'X'Xb are invariant to rescaling a column", "units-invariance", invariance),
        Check("the rescaled coefficient's loss contribution scales by 1/u^2", "units-scaling", scaling),
        Check("rescaling changes the ranking of loss contributions", "units-ranking", ranking),
        Check("in raw units the small coefficient is negligible next to the largest slope", "units-magnitude", magnitude),
    )
    config = {"beta": beta, "n": int(n), "sigma2": sigma2, "scale_factors": factors, "c": c,
              "column": int(column), "column_scales": list(column_scales), "reps": int(reps),
              "seed": plan.master_seed, "chunk_size": plan.chunk_size}
    return ExperimentReport("units", config, tables, checks)


# -- coverage and power ---------------------------------------------------------


def run_coverage(alpha_list: Sequence[float] = (0.05, 0.1, 0.32), n_list: Sequence[int] = (25, 100),
                 theta_star: float = 0.0, reps: int = 10**5, seed: int = 0, threads: int = 1,
                 chunk_size: int | None = None) -> ExperimentReport:
    plan = _plan(seed, chunk_size)
    cols = {k: [] for k in ("alpha", "n", "coverage", "stderr", "target")}
    for n in n_list:
        model = normal_iid(theta_star, 1.0, int(n))
        for a in alpha_list:
            p = inference.coverage_sim(model, a, reps, plan, threads)
            cols["alpha"].append(float(a))
            cols["n"].append(int(n))
            cols["coverage"].append(p.estimate)
            cols["stderr"].append(p.stderr)
            cols["target"].append(1.0 - float(a))
    tables = {"coverage": Table.from_columns(**cols)}

    def rule(t):
        r = t["coverage"]
        z = (r.column("coverage") - r.column("target")) / r.column("stderr")
        return bool(np.all(np.abs(z) <= SIGNIFICANCE)), f"max |z| = {np.max(np.abs(z)):.3f}"

    checks = (Check("interval coverage equals 1 - alpha in every cell (3-sigma)", "coverage", rule),)
    config = {"alpha_list": list(map(float, alpha_list)), "n_list": list(map(int, n_list)),
              "theta_star": theta_star, "reps": int(reps), "seed": plan.master_seed,
              "chunk_size": plan.chunk_size}
    return ExperimentReport("coverage", config, tables, checks)


def default_power_grid(theta0: float = 0.0) -> np.ndarray:
    return theta0 + np.round(np.arange(1, 11) * 0.05, 10)


def run_power_curve(spec: inference.TestSpec | None = None, theta1_grid=None, reps: int = 10**5,
                    seed: int = 0, threads: int = 1, chunk_size: int | None = None) -> ExperimentReport:
    """Closed-form power of the one-sided test next to Monte Carlo rejection rates."""
    spec = spec or inference.TestSpec(0.0, 0.05, 100, 1.0)
    grid = default_power_grid(spec.theta0) if theta1_grid is None else np.asarray(theta1_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= spec.theta0):
        raise DomainError(f"every theta1 must exceed theta0={spec.theta0}")
    plan = _plan(seed, chunk_size)
    closed = inference.power_table(spec, grid)
    mc, se = [], []
    for t1 in grid:
        p = inference.power(t1, spec).power
        mc.append(inference.rejection_rate(t1, spec, reps, plan, threads).estimate)
        se.append(math.sqrt(p * (1 - p) / reps))
    power_tab = Table.from_columns(**{c: closed.column(c) for c in closed.columns}, mc_power=mc, mc_stderr=se)

    size = inference.rejection_rate(spec.theta0, spec, reps, plan, threads)
    eps = 1e-9
    near = inference.power(spec.theta0 + eps, spec).power
    mid = float(grid[len(grid) // 2])
    ns = [spec.n, 2 * spec.n, 4 * spec.n]
    n_pow = [inference.power(mid, inference.TestSpec(spec.theta0, spec.alpha, nn, spec.sigma2)).power for nn in ns]
    tables = {
        "power": power_tab,
        "size": Table.from_columns(theta0=[spec.theta0], alpha=[spec.alpha], mc_rate=[size.estimate],
                                   stderr=[math.sqrt(spec.alpha * (1 - spec.alpha) / reps)],
                                   near_null_power=[near], near_null_offset=[eps]),
        "n_monotonicity": Table.from_columns(theta1=[mid] * len(ns), n=ns, power=n_pow),
    }

    def agree(t):
        r = t["power"]
        z = np.abs(r.column("mc_power") - r.column("power"))
        band = SIGNIFICANCE * r.column("mc_stderr")
        return bool(np.all(z <= band)), f"max |MC - closed| / band = {np.max(z / np.maximum(band, 1e-300)):.3f}"

    def monotone(t):
        p = t["power"].column("power")
        return bool(np.all(np.diff(p) > 0)), "power increasing in theta1"

    def null_limit(t):
        r = t["size"]
        near_p, a = r.column("near_null_power")[0], r.column("alpha")[0]
        size_ok = abs(r.column("mc_rate")[0] - a) <= SIGNIFICANCE * r.column("stderr")[0]
        return bool(abs(near_p - a) < 1e-6 and size_ok), f"power just above theta0 {near_p:.8f}; MC size {r.column('mc_rate')[0]:.5f}"

    def n_mono(t):
        p = t["n_monotonicity"].column("power")
        return bool(np.all(np.diff(p) > 0)), f"power at n={ns}: {np.round(p, 5).tolist()}"

    checks = (
        Check("Monte Carlo rejection rate matches closed-form power (3-sigma)", "power-mc-agreement", agree),
        Check("power increases with theta1", "power-monotone-theta", monotone),
        Check("power tends to alpha at the null and the test has size alpha", "power-null-limit", null_limit),
        Check("power increases with n", "power-monotone-n", n_mono),
    )
    config = {"theta0": spec.theta0, "alpha": spec.alpha, "n": spec.n, "sigma2": spec.sigma2,
              "theta1_grid": grid, "reps": int(reps), "seed": plan.master_seed, "chunk_size": plan.chunk_size}
    return ExperimentReport("power", config, tables, checks)


# -- quantifier contrast --------------------------------------------------------


def default_quantifier_grid(constant: float = CRYSTAL_BALL) -> np.ndarray:
    return np.unique(np.concatenate([np.arange(-1, 9) * 1e6, [0.0, constant]]))


def run_quantifier_contrast(estimator: EstimatorSpec | None = None, model=None, theta_star=0.0,
                            theta_grid=None, reps: int = 10**5, seed: int = 0, threads: int = 1,
                            chunk_size: int | None = None) -> ExperimentReport:
    """MSE at the true value against the MSE curve over the whole grid."""
    estimator = estimator or EstimatorSpec(EstimatorKind.CRYSTAL_BALL)
    model = model or normal_iid(0.0, 1.0, 1)
    if theta_grid is None:
        if estimator.kind is not EstimatorKind.CRYSTAL_BALL:
            raise ConfigurationError("theta_grid is required for this estimator")
        theta_grid = default_quantifier_grid(estimator.constant)
    plan = _plan(seed, chunk_size)
    qc = quantifier_contrast(estimator, model, theta_star, theta_grid, reps, plan, threads)
    dec = mse_bias_at_true(model.with_theta(theta_star), estimator, reps, plan, threads)
    sq = LossFunction(LossKind.SQUARE)
    L = replicate_losses(model, theta_star, [estimator], sq, reps, plan, threads)[:, 0]
    scalar_se = float(np.std(L, ddof=1) / math.sqrt(reps))
    star = qc.theta_star
    star_coord = float(np.linalg.norm(star)) if star.size > 1 else float(star[0])
    amin = qc.argmin_theta
    amin_coord = float(np.linalg.norm(amin)) if amin.size > 1 else float(amin[0])
    tables = {
        "curve": qc.curve.table(),
        "summary": Table.from_columns(
            theta_star=[star_coord], mse_at_theta_star=[qc.mse_at_theta_star], se_at_theta_star=[scalar_se],
            bias_norm2=[dec.bias_norm2], variance=[dec.variance], argmin_theta=[amin_coord],
            curve_min=[qc.curve_min], curve_max=[float(np.max(qc.curve.risk))],
        ),
    }
    kind = estimator.kind
    m, n, s2 = model.m, model.n, model.sigma2

    def s(t, col):
        return t["summary"].column(col)[0]

    checks = []
    if kind is EstimatorKind.CRYSTAL_BALL:
        cst = estimator.constant

        def rule(t):
            grid = t["curve"].column("theta")
            nearest = grid[np.argmin(np.abs(grid - cst))]
            expect = float(np.sum((star - cst) ** 2))
            ok = s(t, "argmin_theta") == nearest and nearest != star_coord
            ok = ok and math.isclose(s(t, "mse_at_theta_star"), expect, rel_tol=1e-12)
            return bool(ok), f"curve minimised at {s(t, 'argmin_theta'):.9g}; MSE at theta* {s(t, 'mse_at_theta_star'):.9g}"

        checks.append(Check("the curve is minimised at the constant, not at theta*", "quantifier-crystal", rule))
    elif kind in (EstimatorKind.LS_MEAN, EstimatorKind.PANEL_LS):

        def rule(t):
            r = t["curve"]
            band = SIGNIFICANCE * np.hypot(r.column("stderr"), s(t, "se_at_theta_star"))
            ok = bool(np.all(np.abs(r.column("risk") - s(t, "mse_at_theta_star")) <= band))
            return ok, f"curve range [{r.column('risk').min():.6g}, {r.column('risk').max():.6g}] vs {s(t, 'mse_at_theta_star'):.6g}"

        checks.append(Check("for the mean both MSE definitions coincide", "quantifier-mean", rule))
    elif kind in (EstimatorKind.JS, EstimatorKind.JS_PLUS, EstimatorKind.PANEL_JS_PLUS) and m > 2:

        def rule(t):
            r = t["curve"]
            top = float(np.max(r.column("risk")))
            j = int(np.argmax(r.column("risk")))
            ok = top - s(t, "mse_at_theta_star") > SIGNIFICANCE * np.hypot(r.column("stderr")[j], s(t, "se_at_theta_star"))
            ok = ok and top < m * s2 / n
            if kind is EstimatorKind.JS and star_coord == 0.0:
                ok = ok and abs(s(t, "mse_at_theta_star") - 2 * s2 / n) <= SIGNIFICANCE * s(t, "se_at_theta_star")
            return bool(ok), f"MSE at theta* {s(t, 'mse_at_theta_star'):.5f}; curve max {top:.5f} < {m * s2 / n:g}"

        checks.append(Check("the shrinkage MSE at theta* sits far below its curve maximum", "quantifier-shrinkage", rule))

    def decomposition(t):
        mse, var, b2 = s(t, "mse_at_theta_star"), s(t, "variance"), s(t, "bias_norm2")
        err = abs(mse - (var + b2))
        return bool(err <= 1e-10 * max(mse, 1e-300) or err == 0.0), f"|mse - (var + bias^2)| = {err:.3g}"

    checks.append(Check("MSE at theta* equals variance plus squared bias", "quantifier-decomposition", decomposition))
    config = {"estimator": estimator.name, "constant": estimator.constant, "estimator_sigma2": estimator.sigma2,
              "model": model.kind.value, "n": n, "sigma2": s2, "m": m, "theta_star": star,
              "theta_grid": qc.curve.theta_grid, "reps": int(reps), "seed": plan.master_seed,
              "chunk_size": plan.chunk_size}
    return ExperimentReport("quantifier", config, tables, tuple(checks))
