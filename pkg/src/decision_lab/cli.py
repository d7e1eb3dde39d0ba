"""Command-line entry point.

Every subcommand writes an :class:`~decision_lab.experiments.ExperimentReport`
(JSON envelope and/or one CSV per table) to ``--out``, or to
``$DECISION_LAB_OUT`` or the working directory. Parameters can come from a
``key=value`` file given with ``--config``; flags override the file.

Exit codes: 0 success, 1 a verdict failed, 2 configuration or domain error,
3 data or numerical error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bayes, experiments, inference
from .errors import ConfigurationError, DecisionLabError
from .estimators import EstimatorKind, EstimatorSpec
from .experiments import Check, ExperimentReport
from .losses import LossFunction, LossKind
from .models import StatisticalModel, ModelKind
from .rng import SeedPlan, check_seed
from .risk import dominance_on_grid, radial_grid, risk_curves
from .tables import Table

OUT_ENV = "DECISION_LAB_OUT"
FORMATS = ("csv", "json", "both")


# -- typed parameters ---------------------------------------------------------------


def _int(s: str) -> int:
    return int(s)


def _real(s: str) -> float:
    v = float(s)
    if not np.isfinite(v):
        raise ValueError("not finite")
    return v


def _reals(s: str) -> list[float]:
    return [_real(p) for p in s.split(",") if p.strip()]


def _ints(s: str) -> list[int]:
    return [int(p) for p in s.split(",") if p.strip()]


def _opt_real(s: str):
    return None if s.strip().lower() in ("", "none", "default") else _real(s)


def _opt_reals(s: str):
    return None if s.strip().lower() in ("", "none", "default") else _reals(s)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s
    parse.__name__ = "choice"
    return parse


_TYPE_NAMES = {_int: "int", _real: "real", _reals: "real-list", _ints: "int-list",
               _opt_real: "real", _opt_reals: "real-list"}


@dataclass(frozen=True)
class Param:
    parse: Callable[[str], Any]
    default: Any
    help: str = ""


ESTIMATORS = {
    "ls": EstimatorKind.LS_MEAN, "js": EstimatorKind.JS, "jsplus": EstimatorKind.JS_PLUS,
    "crystal_ball": EstimatorKind.CRYSTAL_BALL, "toy_last": EstimatorKind.TOY_LAST,
    "toy_first_last": EstimatorKind.TOY_FIRST_LAST,
}
LOSSES = {
    "square": LossKind.SQUARE, "absolute": LossKind.ABSOLUTE, "lp": LossKind.LP,
    "zero_one": LossKind.ZERO_ONE_EPS, "kl": LossKind.KL_NORMAL, "stein_sum": LossKind.STEIN_SUM,
}
MODELS = {
    "normal": ModelKind.NORMAL_IID, "multinormal": ModelKind.MULTI_NORMAL_ISO,
    "laplace": ModelKind.LAPLACE_IID, "uniform": ModelKind.UNIFORM_IID,
}

_MODEL_PARAMS = {
    "model": Param(_choice(*MODELS), "normal", "sampling model"),
    "m": Param(_int, 1, "parameter dimension (multinormal only)"),
    "n": Param(_int, 1, "sample size"),
    "sigma2": Param(_real, 1.0, "known variance"),
    "theta_grid": Param(_reals, [-2.0, -1.0, 0.0, 1.0, 2.0], "grid; norms along the first axis when m > 1"),
    "loss": Param(_choice(*LOSSES), "square", "loss function"),
    "p": Param(_real, 2.0, "exponent of the lp loss"),
    "eps": Param(_opt_real, None, "zero_one tolerance"),
    "constant": Param(_real, experiments.CRYSTAL_BALL, "crystal-ball constant"),
}

SCHEMAS: dict[str, dict[str, Param]] = {
    "stein": {
        "m": Param(_int, 5), "sigma2": Param(_real, 1.0),
        "theta_norms": Param(_reals, [0.0, 1.0, 2.0, 4.0, 8.0]),
        "reps": Param(_int, 10**6),
    },
    "crystal-ball": {
        "n": Param(_int, 100), "lam": Param(_real, 0.5), "theta_grid": Param(_opt_reals, None),
        "theta_star": Param(_real, 0.0), "constant": Param(_real, experiments.CRYSTAL_BALL),
        "reps": Param(_int, 20000),
    },
    "consistency": {
        "n_list": Param(_ints, [25, 100, 400, 1600]), "theta_star": Param(_real, 0.0),
        "reps": Param(_int, 10**5),
    },
    "units": {
        "beta": Param(_reals, [1.0, 1.8, 0.5, -0.004]), "n": Param(_int, 200), "sigma2": Param(_real, 1.0),
        "scale_factors": Param(_reals, [1.0, 10.0, 1000.0]), "c": Param(_opt_real, None),
        "column": Param(_int, 3), "column_scales": Param(_reals, [1.0, 1.0, 0.01]),
        "reps": Param(_int, 10**4),
    },
    "coverage": {
        "alpha_list": Param(_reals, [0.05, 0.1, 0.32]), "n_list": Param(_ints, [25, 100]),
        "theta_star": Param(_real, 0.0), "reps": Param(_int, 10**5),
    },
    "power": {
        "theta0": Param(_real, 0.0), "alpha": Param(_real, 0.05), "n": Param(_int, 100),
        "sigma2": Param(_real, 1.0), "theta1_grid": Param(_opt_reals, None), "reps": Param(_int, 10**5),
    },
    "quantifier": {
        "estimator": Param(_choice(*ESTIMATORS), "crystal_ball"),
        "m": Param(_int, 1), "n": Param(_int, 1), "sigma2": Param(_real, 1.0),
        "theta_star": Param(_real, 0.0, "true value; its norm along the first axis when m > 1"),
        "theta_grid": Param(_opt_reals, None), "constant": Param(_real, experiments.CRYSTAL_BALL),
        "reps": Param(_int, 10**5),
    },
    "risk-curve": {"estimator": Param(_choice(*ESTIMATORS), "ls"), **_MODEL_PARAMS, "reps": Param(_int, 10**5)},
    "dominance": {
        "a": Param(_choice(*ESTIMATORS), "js"), "b": Param(_choice(*ESTIMATORS), "ls"),
        "expect": Param(_choice("any", "ADominates", "BDominates", "Cross", "Indistinguishable"), "any"),
        **_MODEL_PARAMS, "reps": Param(_int, 10**5),
    },
    "bayes-action": {
        "prior_mu": Param(_real, 0.0), "prior_tau2": Param(_real, 1.0), "data": Param(_reals, [2.0]),
        "sigma2": Param(_real, 1.0), "loss": Param(_choice("all", "square", "absolute", "zero_one"), "all"),
        "eps": Param(_opt_real, None), "reps": Param(_int, 0, "unused"),
    },
    "test": {
        "theta0": Param(_real, 0.0), "alpha": Param(_real, 0.05), "n": Param(_int, 100),
        "sigma2": Param(_real, 1.0), "xbar": Param(_real, 0.2), "theta1": Param(_opt_real, None),
        "reps": Param(_int, 0, "unused"),
    },
}

# keys accepted in a config file besides the subcommand's own parameters
_RUN_KEYS = {"seed": Param(_int, 0), "threads": Param(_int, 1), "format": Param(_choice(*FORMATS), "both"),
             "out": Param(str, None)}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict
    output_dir: Path
    master_seed: int
    format: str = "both"
    threads: int = 1
    sources: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Effective configuration as echoed into every output file (no threads or paths)."""
        return {"subcommand": self.subcommand, "seed": self.master_seed, **self.parameters}


def _parse_value(key: str, raw: str, param: Param):
    try:
        return param.parse(raw.strip())
    except (ValueError, TypeError) as exc:
        kind = _TYPE_NAMES.get(param.parse, getattr(param.parse, "__name__", "value"))
        raise ConfigurationError(f"key '{key}': cannot parse {raw!r} as {kind} ({exc})") from None


def read_config_file(path, subcommand: str) -> dict:
    """Parse a flat ``key=value`` file against the subcommand's schema."""
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    schema = {**SCHEMAS[subcommand], **_RUN_KEYS}
    values = {}
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{p}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in schema:
            raise ConfigurationError(f"key '{key}': unknown for subcommand {subcommand}")
        values[key] = _parse_value(key, raw, schema[key])
    return values


def load_config(path, subcommand: str = "stein", overrides: dict | None = None) -> RunConfig:
    """Merge schema defaults, a config file (if any) and flag overrides."""
    schema = SCHEMAS.get(subcommand)
    if schema is None:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    from_file = read_config_file(path, subcommand) if path is not None else {}
    merged = {k: p.default for k, p in {**schema, **_RUN_KEYS}.items()}
    merged.update(from_file)
    merged.update(overrides or {})
    seed = check_seed(merged.pop("seed"))
    threads = merged.pop("threads")
    if threads < 1:
        raise ConfigurationError("key 'threads': must be at least 1")
    fmt = merged.pop("format")
    out = merged.pop("out") or os.environ.get(OUT_ENV) or "."
    return RunConfig(subcommand, merged, Path(out), seed, fmt, threads)


# -- subcommand bodies --------------------------------------------------------------


def _estimator(name: str, cfg: dict) -> EstimatorSpec:
    return EstimatorSpec(ESTIMATORS[name], sigma2=cfg.get("sigma2", 1.0),
                         constant=cfg.get("constant", experiments.CRYSTAL_BALL))


def _model_and_grid(cfg: dict):
    kind = MODELS[cfg["model"]]
    m = cfg["m"]
    if kind is not ModelKind.MULTI_NORMAL_ISO and m != 1:
        raise ConfigurationError("key 'm': only the multinormal model takes m > 1")
    if kind is ModelKind.UNIFORM_IID:
        model = StatisticalModel(kind, (1.0,), 1.0, cfg["n"])
    else:
        model = StatisticalModel(kind, tuple([0.0] * m), cfg["sigma2"], cfg["n"])
    grid = np.asarray(cfg["theta_grid"], dtype=float)
    if m > 1:
        grid = radial_grid(grid, m)
    return model, grid


def _loss(cfg: dict) -> LossFunction:
    return LossFunction(LOSSES[cfg["loss"]], p=cfg["p"], eps=cfg["eps"], n=cfg["n"], sigma2=cfg["sigma2"])


def _cmd_risk_curve(cfg, rc: RunConfig) -> ExperimentReport:
    model, grid = _model_and_grid(cfg)
    curve = risk_curves(model, grid, [_estimator(cfg["estimator"], cfg)], _loss(cfg), cfg["reps"],
                        SeedPlan(rc.master_seed), rc.threads)[0]
    return ExperimentReport("risk-curve", rc.echo(), {"curve": curve.table()}, ())


def _cmd_dominance(cfg, rc: RunConfig) -> ExperimentReport:
    model, grid = _model_and_grid(cfg)
    a, b = risk_curves(model, grid, [_estimator(cfg["a"], cfg), _estimator(cfg["b"], cfg)], _loss(cfg),
                       cfg["reps"], SeedPlan(rc.master_seed), rc.threads)
    rep = dominance_on_grid(a, b)
    tables = {
        "curves": Table.from_columns(theta=a.coord, risk_a=a.risk, se_a=a.stderr, risk_b=b.risk, se_b=b.stderr),
        "dominance": rep.table(),
        "verdict": Table.from_columns(verdict=[rep.verdict.value], tolerance_rule=[rep.tolerance_rule]),
    }
    checks = ()
    if cfg["expect"] != "any":
        want = cfg["expect"]

        def rule(t):
            got = t["verdict"].column("verdict")[0]
            return got == want, f"verdict {got}, expected {want}"

        checks = (Check(f"grid verdict of a against b is {want}", "dominance-expectation", rule),)
    return ExperimentReport("dominance", rc.echo(), tables, checks)


def _cmd_bayes_action(cfg, rc: RunConfig) -> ExperimentReport:
    prior = bayes.NormalPrior(cfg["prior_mu"], cfg["prior_tau2"])
    post = bayes.posterior_normal_normal(prior, np.asarray(cfg["data"]), cfg["sigma2"])
    kinds = {"square": LossKind.SQUARE, "absolute": LossKind.ABSOLUTE, "zero_one": LossKind.ZERO_ONE_EPS}
    chosen = list(kinds) if cfg["loss"] == "all" else [cfg["loss"]]
    acts = [bayes.bayes_action(post, kinds[k], cfg["eps"] if k == "zero_one" else None) for k in chosen]
    tables = {
        "posterior": Table.from_columns(mu=[post.mu], tau2=[post.tau2], n=[post.n]),
        "actions": Table.from_columns(
            loss=[a.loss for a in acts], action=[a.action for a in acts],
            closed_form_name=[a.closed_form_name for a in acts], closed_form=[a.closed_form for a in acts],
            gap=[a.gap for a in acts], action_grid_step=[a.step for a in acts],
        ),
    }

    def rule(t):
        r = t["actions"]
        ok = bool(np.all(r.column("gap") <= r.column("action_grid_step") * (1 + 1e-9)))
        return ok, f"max gap {r.column('gap').max():.3g}, step {r.column('action_grid_step').min():.3g}"

    checks = (Check("numeric Bayes action lies within one grid step of its closed form", "bayes-action", rule),)
    return ExperimentReport("bayes-action", rc.echo(), tables, checks)


def _cmd_test(cfg, rc: RunConfig) -> ExperimentReport:
    spec = inference.TestSpec(cfg["theta0"], cfg["alpha"], cfg["n"], cfg["sigma2"])
    res = inference.np_test(cfg["xbar"], spec)
    tables = {"test": Table.from_columns(d_obs=[res.d_obs], c_alpha=[res.c_alpha], reject=[res.reject],
                                         p_value=[res.p_value])}
    if cfg["theta1"] is not None:
        pw = inference.power(cfg["theta1"], spec)
        tables["power"] = Table.from_columns(theta1=[cfg["theta1"]], delta1=[pw.delta1], power=[pw.power],
                                             type2=[pw.type2])
    return ExperimentReport("test", rc.echo(), tables, ())


def _quantifier(cfg, rc: RunConfig) -> ExperimentReport:
    m = cfg["m"]
    est = _estimator(cfg["estimator"], cfg)
    kind = ModelKind.NORMAL_IID if m == 1 else ModelKind.MULTI_NORMAL_ISO
    model = StatisticalModel(kind, tuple([0.0] * m), cfg["sigma2"], cfg["n"])
    star = cfg["theta_star"] if m == 1 else radial_grid([cfg["theta_star"]], m)[0]
    grid = cfg["theta_grid"]
    if grid is not None and m > 1:
        grid = radial_grid(grid, m)
    return experiments.run_quantifier_contrast(est, model, star, grid, cfg["reps"], rc.master_seed, rc.threads)


def _renamed(report: ExperimentReport, rc: RunConfig) -> ExperimentReport:
    return ExperimentReport(report.name, {**rc.echo(), **report.config}, report.tables, report.checks)


COMMANDS: dict[str, Callable[[dict, RunConfig], ExperimentReport]] = {
    "stein": lambda c, rc: experiments.run_stein(c["m"], c["sigma2"], c["theta_norms"], c["reps"],
                                                 rc.master_seed, rc.threads),
    "crystal-ball": lambda c, rc: experiments.run_crystal_ball(
        c["n"], c["theta_grid"], c["lam"], c["reps"], rc.master_seed, rc.threads, c["theta_star"], c["constant"]),
    "consistency": lambda c, rc: experiments.run_consistency(c["n_list"], c["reps"], rc.master_seed, rc.threads,
                                                             c["theta_star"]),
    "units": lambda c, rc: experiments.run_units_sensitivity(
        c["beta"], c["n"], c["sigma2"], c["scale_factors"], c["c"], c["column"], c["column_scales"],
        c["reps"], rc.master_seed, rc.threads),
    "coverage": lambda c, rc: experiments.run_coverage(c["alpha_list"], c["n_list"], c["theta_star"], c["reps"],
                                                       rc.master_seed, rc.threads),
    "power": lambda c, rc: experiments.run_power_curve(
        inference.TestSpec(c["theta0"], c["alpha"], c["n"], c["sigma2"]), c["theta1_grid"], c["reps"],
        rc.master_seed, rc.threads),
    "quantifier": _quantifier,
    "risk-curve": _cmd_risk_curve,
    "dominance": _cmd_dominance,
    "bayes-action": _cmd_bayes_action,
    "test": _cmd_test,
}


# -- argument parsing ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="decision-lab", description="Seeded decision-theory experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key=value file; flags override it")
        sp.add_argument("--seed", default=None, help="master seed (default 0)")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
        sp.add_argument("--format", default=None, help="csv, json or both (default both)")
        sp.add_argument("--threads", default=None, help="worker threads; does not change results")
        for key, param in schema.items():
            default = param.default
            shown = ",".join(map(str, default)) if isinstance(default, list) else default
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            help=f"{param.help} (default {shown})".strip())
    return parser


def parse_args(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    name = ns.pop("subcommand")
    path = ns.pop("config")
    schema = {**SCHEMAS[name], **_RUN_KEYS}
    overrides = {k: _parse_value(k, v, schema[k]) for k, v in ns.items() if v is not None}
    return load_config(path, name, overrides)


def run(rc: RunConfig) -> ExperimentReport:
    report = COMMANDS[rc.subcommand](dict(rc.parameters), rc)
    return _renamed(report, rc)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        rc = parse_args(argv)
        report = run(rc)
        paths = report.write(rc.output_dir, rc.format)
    except DecisionLabError as exc:
        return _fail(exc.exit_code, type(exc).__name__, exc)
    except (ValueError, ArithmeticError, OSError) as exc:
        return _fail(3, type(exc).__name__, exc)
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'} {v.reference}: {v.claim} [{v.detail}]")
    for p in paths:
        print(f"wrote {p}")
    return 0 if report.passed else 1


def _fail(code: int, kind: str, exc: Exception) -> int:
    msg = " ".join(str(exc).split())
    print(f"decision-lab: error code={code} type={kind}: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
