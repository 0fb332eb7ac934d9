"""Command line entry point.

Each subcommand runs one of the worked settings end to end, prints aligned
text tables and, with ``--out-dir``, writes CSV tables and two-column CSV
curve data for plotting. Output is a function of (flags, seed, workers).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import constrained_normal as cn
from . import constrained_poisson as cp
from . import engine, fieller
from .core import BracketError, DomainError, RandomSource

SEED_ENV = "RELBELIEF_SEED"
DESK_N = 100_000
FULL_N = 1_000_000
BIAS_COMMANDS = {"fieller-bias", "cox", "normal-mean", "poisson-mean"}
NUMERICAL_ERRORS = (
    DomainError,
    BracketError,
    engine.GridError,
    engine.EmptyHistogramError,
    engine.InconsistentMassError,
    fieller.ElicitationError,
    fieller.SamplerError,
    cn.ElicitationError,
    cp.ElicitationError,
    FloatingPointError,
    ArithmeticError,
)


@dataclass
class RunConfig:
    command: str
    seed: int
    mc_samples: int
    delta: Optional[float] = None
    out_dir: Optional[Path] = None
    workers: int = 1
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("--seed must be a 64-bit unsigned integer")
        if self.command in BIAS_COMMANDS and self.mc_samples < 10_000:
            raise ValueError("--mc must be at least 10000 for bias computations")
        if self.mc_samples < 1000:
            raise ValueError("--mc must be at least 1000")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("--delta must be positive")
        if self.workers < 1:
            raise ValueError("--workers must be at least 1")


# ---------------------------------------------------------------------------
# output

class Output:
    """Collects text for stdout and CSV files for --out-dir."""

    def __init__(self, out_dir: Optional[Path], stream=sys.stdout):
        self.out_dir = out_dir
        self.stream = stream
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)

    def line(self, text: str = "") -> None:
        print(text, file=self.stream)

    def table(self, name: str, title: str, headers: Sequence[str], rows: Sequence[Sequence]) -> None:
        self.line(title)
        cells = [[_cell(v, 3) for v in row] for row in rows]
        widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(headers)]
        self.line("  ".join(h.rjust(w) for h, w in zip(headers, widths)))
        for r in cells:
            self.line("  ".join(c.rjust(w) for c, w in zip(r, widths)))
        self.line()
        self.csv(name, headers, rows)

    def csv(self, name: str, headers: Sequence[str], rows: Sequence[Sequence]) -> None:
        if self.out_dir is None:
            return
        with open(self.out_dir / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(headers)
            for row in rows:
                w.writerow([_cell(v, 6) for v in row])

    def curve(self, name: str, xlabel: str, ylabel: str, x, y) -> None:
        self.csv(name, [xlabel, ylabel], list(zip(np.asarray(x).tolist(), np.asarray(y).tolist())))

    def report(self, text: str) -> None:
        self.line(text)
        if self.out_dir is not None:
            with open(self.out_dir / "report.txt", "a") as fh:
                fh.write(text + "\n")


def _cell(v, digits: int) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{digits}f}"
    return str(v)


def _region_text(region: engine.Region) -> str:
    if region.is_empty:
        return "empty"
    parts = [f"[{lo:.2f}, {hi:.2f})" for lo, hi in region.intervals]
    flags = []
    if region.touches_lower:
        flags.append("reaches lower grid edge")
    if region.touches_upper:
        flags.append("reaches upper grid edge")
    text = " U ".join(parts)
    return f"{text}  ({'; '.join(flags)})" if flags else text


def _est(e) -> str:
    return f"{e.value:.4f} (se {e.se:.4f})"


# ---------------------------------------------------------------------------
# commands

def cmd_elicit(cfg: RunConfig, out: Output) -> None:
    o = cfg.options
    which = o["model"]
    if which in ("fieller", "all"):
        h = fieller.elicit_fieller(o["m1"], o["m2"], o["r1"], o["r2"], o["psi0"], o["gamma"] or 0.99)
        out.table("elicit_fieller", "Fieller conjugate normal priors", ["mu0", "tau10", "nu0", "tau20"],
                  [[h["mu0"], h["tau10"], h["nu0"], h["tau20"]]])
    if which in ("beta", "truncnorm", "all"):
        spec = _normal_spec(cfg)
        if which in ("beta", "all"):
            a, b = cn.elicit_beta(spec)
            out.table("elicit_beta", "Beta prior on (l0, u0)", ["alpha0", "beta0"], [[a, b]])
        if which in ("truncnorm", "all"):
            mu0, tau0 = cn.elicit_truncnorm(spec)
            out.table("elicit_truncnorm", "Truncated normal prior", ["mu0", "tau0"], [[mu0, tau0]])
    if which in ("gamma", "all"):
        a, b = cp.elicit_gamma(_poisson_spec(cfg))
        out.table("elicit_gamma", "Gamma prior (shape, rate)", ["alpha0", "beta0"], [[a, b]])


def _fieller_model(cfg: RunConfig) -> fieller.FiellerModel:
    o = cfg.options
    base = fieller.example1_model(o["m"], o["n"])
    hyper = {k: o[k] if o.get(k) is not None else getattr(base, k) for k in ("mu0", "tau10", "nu0", "tau20")}
    return fieller.FiellerModel(**hyper, sigma0_sq=o["sigma2"], m=o["m"], n=o["n"])


def cmd_fieller_infer(cfg: RunConfig, out: Output) -> None:
    o = cfg.options
    model = _fieller_model(cfg)
    delta = cfg.delta or 0.1
    src = RandomSource(cfg.seed, stream=1)
    piv = fieller.pivotal_region(o["xbar"], o["ybar"], model.m, model.n, model.sigma0_sq, o["confidence"])
    res = fieller.infer(model, o["xbar"], o["ybar"], delta, cfg.mc_samples, src)
    out.report(f"pivotal {o['confidence']:.2f} region: {piv}")
    out.report(f"relative belief estimate: {res.estimate:.2f}")
    out.report(f"plausible region: {_region_text(res.plausible)}")
    out.report(f"posterior content: {res.plausible.posterior_content:.6f}")
    out.report(f"prior content: {res.plausible.prior_content:.6f}")
    if o.get("credible"):
        cr = engine.credible_region(res.beliefs, o["credible"])
        out.report(f"{o['credible']:.2f} credible region: {_region_text(cr)}")
    g = res.beliefs.grid
    out.curve("fieller_prior_density", "psi", "prior_density", g.midpoints, fieller.prior_density(g.midpoints, model))
    out.curve("fieller_posterior_density", "psi", "posterior_density", g.midpoints,
              fieller.posterior_density(g.midpoints, model, o["xbar"], o["ybar"]))
    out.curve("fieller_rb", "psi", "rb", g.midpoints, res.beliefs.rb)


def cmd_fieller_bias(cfg: RunConfig, out: Output) -> None:
    o = cfg.options
    delta = cfg.delta or 0.1
    N, w = cfg.mc_samples, cfg.workers
    src = RandomSource(cfg.seed, stream=2)
    rows = []
    for i, size in enumerate(o["sizes"]):
        model = _fieller_model(cfg).with_sizes(size, size)
        sub = src.spawn(i)
        ba = fieller.bias_against(model, o["psi0"], N, sub.spawn(0), w)
        bf = fieller.bias_in_favor(model, o["psi0"], delta, N, sub.spawn(1), workers=w)
        row = [size, ba.value, ba.se, bf.value, bf.se]
        if o["estimation"]:
            est = fieller.prior_bias_in_favor(model, delta, o["n_psi"], o["inner"], sub.spawn(2), workers=w)
            row += [est.value, est.se]
        rows.append(row)
    headers = ["m=n", "bias_against", "se", "bias_in_favor", "se"]
    if o["estimation"]:
        headers += ["estimation_in_favor", "se"]
    out.table("fieller_bias", f"Biases at psi0 = {o['psi0']}, delta = {delta}", headers, rows)
    if o["curve"]:
        grid = np.round(np.arange(o["curve"][0], o["curve"][1] + 1e-9, o["curve"][2]), 10)
        model = _fieller_model(cfg)
        curve, se = fieller.bias_against_curve(model, grid, N, src.spawn(100))
        out.curve("fieller_bias_against_curve", "psi", "bias_against", grid, curve)
        fav = fieller.bias_in_favor_curve(model, grid, delta, N, src.spawn(101))
        out.curve("fieller_bias_in_favor_curve", "psi", "bias_in_favor", grid, fav)
        j = int(np.argmax(curve))
        out.report(f"max bias against on grid: {curve[j]:.4f} at psi = {grid[j]:.3f}")


def cox_psi_grid() -> np.ndarray:
    """Symmetric grid, log spaced in |psi| to reach the heavy tails."""
    r = np.geomspace(0.05, 500.0, 25)
    return np.r_[-r[::-1], 0.0, r]


def cmd_cox(cfg: RunConfig, out: Output) -> None:
    o = cfg.options
    delta = cfg.delta or 0.1
    model, xbar, ybar = fieller.cox_problem(o["variant"], o["prior_var"])
    src = RandomSource(cfg.seed, stream=3)
    piv = fieller.pivotal_region(xbar, ybar, model.m, model.n, model.sigma0_sq, o["confidence"])
    out.report(f"Cox problem {o['variant'].upper()}: xbar = {xbar}, ybar = {ybar}")
    out.report(f"pivotal {o['confidence']:.2f} region: {piv}")
    mu, nu = fieller.sample_prior(model, src.spawn(0), cfg.mc_samples)
    grid = engine.build_grid(mu / nu, delta, origin=0.5 * delta)
    beliefs = fieller.exact_beliefs(model, grid, xbar, ybar)
    pl = engine.plausible_region(beliefs)
    out.report(f"relative belief estimate: {engine.rb_estimate(beliefs):.2f}")
    out.report(f"plausible region: {_region_text(pl)}")
    out.report(f"posterior content: {pl.posterior_content:.6f}")
    out.report(f"prior content: {pl.prior_content:.6f}")
    if o["bias"]:
        report = fieller.bias_report(model, cox_psi_grid(), delta, cfg.mc_samples, src.spawn(1), with_favor=False,
                                     workers=cfg.workers)
        out.report(f"bias against upper bound: {report.max_bias_against:.4f} at psi = {report.argmax_psi:.3f}")
        out.report(f"prior averaged bias against: {_est(report.prior_bias_against)}")
        out.curve(f"cox_{o['variant'].lower()}_bias_against_curve", "psi", "bias_against", report.psi_grid,
                  report.bias_against)


def _normal_spec(cfg: RunConfig) -> cn.ConstrainedNormalSpec:
    o = cfg.options
    base = cn.ConstrainedNormalSpec()
    kw = {k: o[k] for k in ("l0", "u0", "l1", "u1", "m0", "gamma") if o.get(k) is not None}
    if o.get("sigma2") is not None:
        kw["sigma0_sq"] = o["sigma2"]
    return cn.ConstrainedNormalSpec(**{**base.__dict__, **kw})


def _poisson_spec(cfg: RunConfig) -> cp.ConstrainedPoissonSpec:
    o = cfg.options
    base = cp.ConstrainedPoissonSpec()
    kw = {k: o[k] for k in ("l0", "u0", "l1", "u1", "m0", "gamma") if o.get(k) is not None}
    return cp.ConstrainedPoissonSpec(**{**base.__dict__, **kw})


NORMAL_TABLES = ("bias-against", "confidence", "bias-in-favor", "estimation")


def cmd_normal_mean(cfg: RunConfig, out: Output) -> None:
    o = cfg.options
    spec = _normal_spec(cfg)
    priors = {"beta": cn.beta_prior, "truncnorm": cn.truncnorm_prior}
    names = list(priors) if o["prior"] == "both" else [o["prior"]]
    priors = {k: priors[k](spec) for k in names}
    ns, N, mu = o["n"], cfg.mc_samples, o["mu_star"]
    deltas = [cfg.delta] if cfg.delta else o["deltas"]
    tables = NORMAL_TABLES if o["table"] == "all" else (o["table"],)
    for t, table in enumerate(NORMAL_TABLES):
        if table not in tables:
            continue
        src = RandomSource(cfg.seed, stream=10 + t)
        headers, rows = ["n"], [[n] for n in ns]
        for p, (name, prior) in enumerate(priors.items()):
            if table == "bias-against":
                headers.append(name)
                for i, n in enumerate(ns):
                    rows[i].append(cn.bias_against_histogram(spec.with_n(n), prior, mu, N, o["k"], src.spawn(p).spawn(i)))
            elif table == "confidence":
                headers += [f"{name}_frequentist", f"{name}_bayes"]
                conf = cn.confidence_table(spec, prior, ns, src.spawn(p), N, o["k"], o["grid_delta"], o["n_prior"])
                for i, r in enumerate(conf):
                    rows[i] += [r.frequentist, r.bayes]
            else:
                for d, delta in enumerate(deltas):
                    headers.append(f"{name}_delta={delta:g}")
                    for i, n in enumerate(ns):
                        sub = src.spawn(p).spawn(d).spawn(i)
                        sp = spec.with_n(n)
                        if table == "bias-in-favor":
                            v = cn.bias_in_favor_normal(sp, prior, mu, delta, N, o["k"], sub)
                        else:
                            v = cn.estimation_bias_in_favor(sp, prior, delta, N, o["k"], sub, o["n_prior"]).value
                        rows[i].append(v)
        title = {
            "bias-against": f"Bias against mu* = {mu:g}",
            "confidence": "Frequentist (Bayesian) confidence of the plausible region",
            "bias-in-favor": f"Bias in favor of mu* = {mu:g}",
            "estimation": "Bias in favor for estimation",
        }[table]
        out.table(f"normal_{table.replace('-', '_')}", title, headers, rows)
    if o["curves"]:
        src = RandomSource(cfg.seed, stream=20)
        grid = spec.grid(o["grid_delta"]).midpoints
        for p, (name, prior) in enumerate(priors.items()):
            for i, n in enumerate(ns):
                curve = cn.bias_against_curve(spec.with_n(n), prior, grid, src.spawn(p).spawn(i), N, o["k"])
                out.curve(f"normal_bias_against_{name}_n{n}", "mu", "bias_against", grid, curve)
                for d, delta in enumerate(deltas):
                    fav = cn.bias_in_favor_curve(spec.with_n(n), prior, grid, src.spawn(p).spawn(i).spawn(d + 1),
                                                 delta, N, o["k"])
                    out.curve(f"normal_bias_in_favor_{name}_n{n}_delta{delta:g}", "mu", "bias_in_favor", grid, fav)


def cmd_poisson_mean(cfg: RunConfig, out: Output) -> None:
    o = cfg.options
    spec = _poisson_spec(cfg)
    prior = cp.gamma_prior(spec)
    ns, N, lam, exact = o["n"], cfg.mc_samples, o["lambda_star"], o["exact"]
    deltas = [cfg.delta] if cfg.delta else o["deltas"]
    tables = NORMAL_TABLES if o["table"] == "all" else (o["table"],)
    for t, table in enumerate(NORMAL_TABLES):
        if table not in tables:
            continue
        src = RandomSource(cfg.seed, stream=30 + t)
        headers, rows = ["n"], [[n] for n in ns]
        for d, delta in enumerate(deltas):
            sub = src.spawn(d)
            if table == "confidence":
                headers += [f"delta={delta:g}_frequentist", f"delta={delta:g}_bayes"]
                for i, r in enumerate(cp.poisson_confidence_table(spec, prior, ns, delta, sub, N, exact)):
                    rows[i] += [r.frequentist, r.bayes]
                continue
            headers.append(f"delta={delta:g}")
            for i, n in enumerate(ns):
                sp = spec.with_n(n)
                if table == "bias-against":
                    v = cp.poisson_bias_against(sp, prior, lam, delta, N, sub.spawn(i), exact)
                elif table == "bias-in-favor":
                    v = cp.poisson_bias_in_favor(sp, prior, lam, delta, N, sub.spawn(i), exact)
                else:
                    v = cp.poisson_estimation_bias_in_favor(sp, prior, delta, N, sub.spawn(i), exact)
                rows[i].append(v.value)
        title = {
            "bias-against": f"Bias against lambda* = {lam:g}",
            "confidence": "Frequentist (Bayesian) confidence of the plausible region",
            "bias-in-favor": f"Bias in favor of lambda* = {lam:g}",
            "estimation": "Bias in favor for estimation",
        }[table]
        out.table(f"poisson_{table.replace('-', '_')}", title, headers, rows)
    if o["curves"]:
        src = RandomSource(cfg.seed, stream=40)
        for d, delta in enumerate(deltas):
            grid = spec.grid(delta).midpoints
            for i, n in enumerate(ns):
                sp = spec.with_n(n)
                ba = cp.bias_against_curve(sp, prior, grid, delta, N, src.spawn(d).spawn(i), exact)
                out.curve(f"poisson_bias_against_n{n}_delta{delta:g}", "lambda", "bias_against", grid, ba)
                bf = cp.bias_in_favor_curve(sp, prior, grid, delta, N, src.spawn(d).spawn(i).spawn(1), exact)
                out.curve(f"poisson_bias_in_favor_n{n}_delta{delta:g}", "lambda", "bias_in_favor", grid, bf)


COMMANDS = {
    "elicit": cmd_elicit,
    "fieller-infer": cmd_fieller_infer,
    "fieller-bias": cmd_fieller_bias,
    "cox": cmd_cox,
    "normal-mean": cmd_normal_mean,
    "poisson-mean": cmd_poisson_mean,
}


# ---------------------------------------------------------------------------
# argument parsing

def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sample sizes must be positive integers")
    return values


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")
    if not values or min(values) <= 0:
        raise argparse.ArgumentTypeError("values must be positive")
    return values


def _range3(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected lo:hi:step")
    lo, hi, step = (float(p) for p in parts)
    if not (lo < hi and step > 0):
        raise argparse.ArgumentTypeError("need lo < hi and step > 0")
    return [lo, hi, step]


def _default_seed() -> int:
    text = os.environ.get(SEED_ENV, "1")
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"${SEED_ENV} must be an integer, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 1)")
    common.add_argument("--mc", type=int, default=None, help="Monte Carlo sample size N")
    common.add_argument("--full-scale", action="store_true", help=f"use N = {FULL_N} instead of {DESK_N}")
    common.add_argument("--delta", type=float, default=None, help="meaningful difference / bin width")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out-dir", type=Path, default=None, help="directory for CSV tables and curve data")
    common.add_argument("--config", type=Path, default=None, help="JSON or YAML file with flag values")

    parser = argparse.ArgumentParser(prog="relbelief", description="Relative belief inference and bias tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    bounds = argparse.ArgumentParser(add_help=False)
    for name in ("l0", "u0", "l1", "u1", "m0", "gamma"):
        bounds.add_argument(f"--{name}", type=float, default=None)

    p = sub.add_parser("elicit", parents=[common, bounds], help="elicited prior hyperparameters")
    p.add_argument("--model", choices=["fieller", "beta", "truncnorm", "gamma", "all"], default="all")
    p.add_argument("--m1", type=float, default=10.0)
    p.add_argument("--m2", type=float, default=25.0)
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--r2", type=float, default=3.0)
    p.add_argument("--psi0", type=float, default=2.0)

    fmodel = argparse.ArgumentParser(add_help=False)
    fmodel.add_argument("--m", type=int, default=10)
    fmodel.add_argument("--n", type=int, default=10)
    fmodel.add_argument("--sigma2", type=float, default=1.0)
    for name in ("mu0", "tau10", "nu0", "tau20"):
        fmodel.add_argument(f"--{name}", type=float, default=None)

    p = sub.add_parser("fieller-infer", parents=[common, fmodel], help="inference for a ratio of normal means")
    p.add_argument("--xbar", type=float, default=fieller.EXAMPLE1_DATA["xbar"])
    p.add_argument("--ybar", type=float, default=fieller.EXAMPLE1_DATA["ybar"])
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--credible", type=float, default=None)

    p = sub.add_parser("fieller-bias", parents=[common, fmodel], help="biases for a ratio of normal means")
    p.add_argument("--psi0", type=float, default=2.0)
    p.add_argument("--sizes", type=_int_list, default=[10], help="comma separated m = n values")
    p.add_argument("--estimation", action="store_true", help="also average the bias in favor over the prior")
    p.add_argument("--n-psi", type=int, default=1000)
    p.add_argument("--inner", type=int, default=10_000)
    p.add_argument("--curve", type=_range3, default=None, help="lo:hi:step grid for curve data")

    p = sub.add_parser("cox", parents=[common], help="Cox's problems A and B")
    p.add_argument("--variant", type=str.upper, choices=["A", "B"], default="B")
    p.add_argument("--prior-var", type=float, default=3.0)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--no-bias", dest="bias", action="store_false")

    tables = argparse.ArgumentParser(add_help=False)
    tables.add_argument("--table", choices=[*NORMAL_TABLES, "all"], default="all")
    tables.add_argument("--curves", action="store_true", help="write curve data over the parameter grid")

    p = sub.add_parser("normal-mean", parents=[common, bounds, tables], help="normal mean on a bounded interval")
    p.add_argument("--n", type=_int_list, default=[10, 20, 50, 100, 500])
    p.add_argument("--prior", choices=["beta", "truncnorm", "both"], default="both")
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--mu-star", type=float, default=4.0)
    p.add_argument("--deltas", type=_float_list, default=[0.5, 0.1])
    p.add_argument("--k", type=int, default=None, help="histogram bins (default by n)")
    p.add_argument("--grid-delta", type=float, default=0.1, help="mu grid spacing for maxima and curves")
    p.add_argument("--n-prior", type=int, default=10_000)

    p = sub.add_parser("poisson-mean", parents=[common, bounds, tables], help="Poisson rate on a bounded interval")
    p.add_argument("--n", type=_int_list, default=[1, 10, 20, 50, 100, 500])
    p.add_argument("--lambda-star", type=float, default=cp.DEFAULT_LAMBDA)
    p.add_argument("--deltas", type=_float_list, default=[0.5, 1.0])
    p.add_argument("--exact", action="store_true", help="sum over the count distribution instead of sampling")
    return parser


def load_config(path: Path) -> dict:
    text = path.read_text()
    data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"{path} must hold a mapping of option names to values")
    return {k.replace("-", "_"): v for k, v in data.items()}


_LIST_PARSERS = {"n": _int_list, "sizes": _int_list, "deltas": _float_list, "curve": _range3}


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            values = load_config(args.config)
        except (OSError, ValueError, yaml.YAMLError) as exc:
            parser.error(f"cannot read config: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(values) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in values.items():
            if k in _LIST_PARSERS and isinstance(v, (list, tuple)):
                v = ",".join(str(x) for x in v) if k != "curve" else ":".join(str(x) for x in v)
            if k in _LIST_PARSERS and isinstance(v, str):
                v = _LIST_PARSERS[k](v)
            values[k] = v
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    opts = vars(args).copy()
    command = opts.pop("command")
    seed = opts.pop("seed")
    mc = opts.pop("mc")
    full = opts.pop("full_scale")
    try:
        seed = _default_seed() if seed is None else seed
    except ValueError as exc:
        parser.error(str(exc))
    cfg = RunConfig(
        command=command,
        seed=seed,
        mc_samples=mc if mc is not None else (FULL_N if full else DESK_N),
        delta=opts.pop("delta"),
        out_dir=opts.pop("out_dir"),
        workers=opts.pop("workers"),
        options={k: v for k, v in opts.items() if k != "config"},
    )
    try:
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    return cfg


def run(cfg: RunConfig, stream=None) -> int:
    out = Output(cfg.out_dir, stream or sys.stdout)
    if cfg.out_dir is not None and (cfg.out_dir / "report.txt").exists():
        (cfg.out_dir / "report.txt").unlink()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            COMMANDS[cfg.command](cfg, out)
    except NUMERICAL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
