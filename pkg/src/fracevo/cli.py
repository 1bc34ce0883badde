"""Command-line front end driven by a YAML experiment file.

Usage: ``fracevo <command> --config exp.yaml [--seed S] [--draws N] [--out DIR]``
with ``command`` one of ``phi``, ``kernel-check``, ``sample``, ``simulate``,
``solve-spectral``, ``solve-mc`` or ``validate``.  Exit status is 0 on
success, 2 when a validation check fails and 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import kernels as kn
from . import phi as ph
from . import processes as pr
from . import randvar as rv
from . import solvers as so
from . import symbols as sy
from .errors import ConfigError, FracEvoError

COMMANDS = ("phi", "kernel-check", "sample", "simulate", "solve-spectral", "solve-mc", "validate")

DEFAULT_TOLERANCES = {
    "volterra": 1e-6,
    "phi": 1e-10,
    "sigmas": 4.0,
    "band_fraction": 0.01,
    "mass": 1e-10,
    "cm": 1e-8,
    "flsm_bias": 0.01,
}


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}: missing field {key!r}")
    return section[key]


def _number(section: dict, key: str, where: str, default=None) -> float:
    if key not in section:
        if default is None:
            raise ConfigError(f"{where}: missing field {key!r}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _wrap(where: str, builder, *args):
    try:
        return builder(*args)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_kernel(decl: Any, where: str = "kernel") -> kn.KernelSpec:
    if not isinstance(decl, dict):
        raise ConfigError(f"{where}: expected a table")
    family = _require(decl, "family", where)
    num = lambda key, default=None: _number(decl, key, where, default)  # noqa: E731
    if family == "fractional":
        return _wrap(where, kn.Fractional, num("beta"))
    if family == "ggbm":
        return _wrap(where, kn.GGBM, num("alpha"), num("beta"))
    if family == "saigo_maeda":
        return _wrap(where, kn.SaigoMaeda, num("a"), num("b"), num("mu"), num("nu"))
    if family == "tempered":
        return _wrap(where, kn.tempered_fractional, num("beta"), num("rate"))
    if family == "stretched":
        inner = parse_kernel(_require(decl, "inner", where), f"{where}.inner")
        return _wrap(where, kn.stretch_kernel, inner, kn.PowerStretch(num("stretch")))
    raise ConfigError(f"{where}.family: unknown kernel family {family!r}")


def parse_symbol(decl: Any, where: str = "symbol") -> sy.SymbolSpec:
    if not isinstance(decl, dict):
        raise ConfigError(f"{where}: expected a table")
    family = _require(decl, "family", where)
    num = lambda key, default=None: _number(decl, key, where, default)  # noqa: E731
    if family == "brownian":
        return _wrap(where, sy.Brownian, num("sigma2", 1.0))
    if family == "fractional_laplacian":
        return _wrap(where, sy.FractionalLaplacian, num("gamma"))
    if family == "stable":
        return _wrap(where, sy.StableSkewed, num("delta"), num("rho", 0.0))
    if family == "bernstein":
        inner = parse_symbol(_require(decl, "inner", where), f"{where}.inner")
        return _wrap(where, sy.compose_bernstein, inner, _wrap(where, sy.PowerBernstein, num("gamma")))
    raise ConfigError(f"{where}.family: unknown symbol family {family!r}")


def parse_process(decl: Any, kernel: kn.KernelSpec, symbol: sy.SymbolSpec,
                  where: str = "process") -> pr.ProcessModel:
    if not isinstance(decl, dict):
        raise ConfigError(f"{where}: expected a table")
    recipe = _require(decl, "recipe", where)
    num = lambda key, default=None: _number(decl, key, where, default)  # noqa: E731
    if recipe == "scaled_levy_time":
        return _wrap(where, pr.scaled_time_model, kernel, symbol)
    if recipe == "scaled_flsm":
        kw = {}
        for key in ("mesh", "left_cutoff"):
            if key in decl:
                kw[key] = num(key)
        return _wrap(where, lambda: pr.flsm_model(kernel, symbol, num("delta"), **kw))
    if recipe == "ggbm":
        if not isinstance(kernel, kn.GGBM):
            raise ConfigError(f"{where}: the ggbm recipe needs a ggbm kernel")
        if not isinstance(symbol, sy.Brownian) or symbol.sigma2 != 1.0:
            raise ConfigError(f"{where}: the ggbm recipe needs the standard Brownian symbol")
        return pr.ggbm_model(kernel.alpha, kernel.beta)
    if recipe == "inverse_subordinated":
        if not (isinstance(kernel, kn.Fractional) and 0 < kernel.beta < 1):
            raise ConfigError(f"{where}: inverse_subordinated needs a fractional kernel with beta < 1")
        return pr.inverse_subordinated_model(symbol, kernel.beta)
    raise ConfigError(f"{where}.recipe: unknown recipe {recipe!r}")


@dataclass
class Experiment:
    kernel: kn.KernelSpec
    symbol: sy.SymbolSpec
    process: Optional[pr.ProcessModel]
    grid: so.SpaceGrid
    initial: so.InitialDatum
    times: list
    draws: int
    seed: int
    tolerances: dict
    output_dir: Path
    lambdas: list = field(default_factory=lambda: [0.5, 1.0, 5.0])
    p_grid: list = field(default_factory=lambda: list(np.linspace(0.0, 3.0, 13)))


def load_config(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a table at top level")
    return raw


def build_experiment(raw: dict, *, seed: Optional[int] = None, draws: Optional[int] = None,
                     out: Optional[str] = None) -> Experiment:
    kernel = parse_kernel(_require(raw, "kernel", "config"))
    symbol = parse_symbol(_require(raw, "symbol", "config"))
    process = parse_process(raw["process"], kernel, symbol) if raw.get("process") else None
    gdecl = raw.get("grid", {"x_min": -20.0, "x_max": 20.0, "n_points": 1024})
    if not isinstance(gdecl, dict):
        raise ConfigError("grid: expected a table")
    n_points = gdecl.get("n_points", 1024)
    if not isinstance(n_points, int):
        raise ConfigError("grid.n_points: expected an integer")
    grid = _wrap("grid", so.SpaceGrid, _number(gdecl, "x_min", "grid"),
                 _number(gdecl, "x_max", "grid"), n_points)
    idecl = raw.get("initial", {"family": "gaussian"})
    if not isinstance(idecl, dict) or idecl.get("family", "gaussian") != "gaussian":
        raise ConfigError("initial: only the gaussian family is available from configs")
    initial = _wrap("initial", so.InitialDatum.gaussian, _number(idecl, "center", "initial", 0.0),
                    _number(idecl, "width", "initial", 1.0))
    times = raw.get("times", [1.0])
    if not isinstance(times, list) or not times or any(
            isinstance(t, bool) or not isinstance(t, (int, float)) or t < 0 for t in times):
        raise ConfigError("times: expected a nonempty list of nonnegative numbers")
    n_draws = draws if draws is not None else raw.get("draws", 100000)
    if not isinstance(n_draws, int) or n_draws < 100:
        raise ConfigError("draws: expected an integer >= 100")
    s = seed if seed is not None else raw.get("seed", 0)
    if not isinstance(s, int) or not 0 <= s < 2**64:
        raise ConfigError("seed: expected a 64-bit unsigned integer")
    tol = dict(DEFAULT_TOLERANCES)
    user_tol = raw.get("tolerances", {}) or {}
    if not isinstance(user_tol, dict):
        raise ConfigError("tolerances: expected a table")
    for key, value in user_tol.items():
        if key not in tol:
            raise ConfigError(f"tolerances.{key}: unknown tolerance")
        tol[key] = _number(user_tol, key, "tolerances")
    output_dir = Path(out if out is not None else raw.get("output_dir", "out"))
    exp = Experiment(kernel, symbol, process, grid, initial, [float(t) for t in times], n_draws,
                     s, tol, output_dir)
    if "lambdas" in raw:
        exp.lambdas = [float(v) for v in raw["lambdas"]]
    if "p_grid" in raw:
        exp.p_grid = [float(v) for v in raw["p_grid"]]
    return exp


# --------------------------------------------------------------------------
# commands


def build_series(exp: Experiment) -> ph.PhiSeries:
    t_max = max(max(exp.times), 1e-3)
    lam_max = max(exp.lambdas + [1.0])
    if exp.kernel.homogeneity_degree is not None:
        return ph.coeffs_homogeneous(exp.kernel, lam_max=lam_max, T=t_max)
    return ph.coeffs_general(exp.kernel, np.array([t_max]), lam_max=lam_max)


def _write_csv(path: Path, header: list, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating, int, np.integer))
                             and not isinstance(v, bool) else v for v in row])


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def cmd_phi(exp: Experiment) -> int:
    series = build_series(exp)
    if series.mode == "homogeneous":
        rows = [(n, c) for n, c in enumerate(series.coeffs)]
        header = ["n", "c_hat"]
        if isinstance(exp.kernel, kn.SaigoMaeda):
            k = exp.kernel
            closed = ph.coeffs_saigo_maeda(k.a, k.b, k.mu, k.nu, series.N).coeffs
            rows = [(n, c, closed[n]) for n, c in rows]
            header.append("c_hat_closed")
        _write_csv(exp.output_dir / "phi_coefficients.csv", header, rows)
    values = []
    for t in exp.times:
        for lam in exp.lambdas:
            v = ph.phi_eval(series, t, -lam, tol=exp.tolerances["phi"])
            values.append((t, -lam, v.real, v.imag))
    _write_csv(exp.output_dir / "phi_values.csv", ["t", "lambda", "phi_re", "phi_im"], values)
    return 0


def cmd_kernel_check(exp: Experiment) -> int:
    t_max = max(max(exp.times), 1e-3)
    report = kn.check_assumption(exp.kernel, t_max)
    _write_json(exp.output_dir / "kernel_check.json", {
        "kernel": exp.kernel.family, "T": t_max, "k_t": report.k_t, "eps": report.eps,
        "alpha_star": report.alpha_star, "passed": report.passed,
        "homogeneity_degree": exp.kernel.homogeneity_degree})
    return 0 if report.passed else 2


def _scaler_of(exp: Experiment) -> rv.ScalerLaw:
    model = exp.process
    if model is not None and hasattr(model, "scaler"):
        return model.scaler
    return pr.scaler_for_kernel(exp.kernel)[0]


def cmd_sample(exp: Experiment) -> int:
    law = _scaler_of(exp)
    draws = np.asarray(law.sample(rv.make_stream(exp.seed), exp.draws), dtype=float)
    _write_csv(exp.output_dir / "scaler_samples.csv", ["a"], ((a,) for a in draws))
    return 0


def _need_process(exp: Experiment) -> pr.ProcessModel:
    if exp.process is None:
        raise ConfigError("process: this command needs a process declaration")
    return exp.process


def cmd_simulate(exp: Experiment) -> int:
    model = _need_process(exp)
    series = build_series(exp)
    streams = rv.spawn_streams(exp.seed, len(exp.times))
    draw_rows, char_rows = [], []
    p = np.asarray(exp.p_grid)
    for t, stream in zip(exp.times, streams):
        x = np.asarray(pr.sample_marginal(model, t, stream, exp.draws), dtype=float)
        draw_rows.extend((t, v) for v in x)
        mean, se = pr.empirical_char(x, p)
        exact = so.multiplier(series, exp.symbol, t, p)
        char_rows.extend(zip([t] * p.size, p, mean.real, mean.imag, se.real, se.imag,
                             exact.real, exact.imag))
    _write_csv(exp.output_dir / "simulate_draws.csv", ["t", "x"], draw_rows)
    _write_csv(exp.output_dir / "simulate_char.csv",
               ["t", "p", "emp_re", "emp_im", "se_re", "se_im", "exact_re", "exact_im"], char_rows)
    return 0


def cmd_solve_spectral(exp: Experiment) -> int:
    series = build_series(exp)
    rows = []
    for t in exp.times:
        f = so.solve_spectral(exp.initial, exp.symbol, series, t, exp.grid)
        rows.extend(zip([t] * exp.grid.n_points, exp.grid.nodes, f.values))
    _write_csv(exp.output_dir / "solve_spectral.csv", ["t", "x", "u"], rows)
    return 0


def cmd_solve_mc(exp: Experiment) -> int:
    model = _need_process(exp)
    rows = []
    for j, t in enumerate(exp.times):
        f = so.mc_solve(exp.initial, model, t, exp.grid, exp.draws, exp.seed + j)
        rows.extend(zip([t] * exp.grid.n_points, exp.grid.nodes, f.values, f.standard_errors))
    _write_csv(exp.output_dir / "solve_mc.csv", ["t", "x", "u", "stderr"], rows)
    return 0


def run_validation(exp: Experiment) -> list[dict]:
    """Invariant suite for the configured triple; one record per check."""
    tol = exp.tolerances
    checks: list[dict] = []

    def record(name, passed, measured, threshold):
        checks.append({"check": name, "passed": bool(passed), "measured": float(measured),
                       "threshold": float(threshold)})

    k, psi = exp.kernel, exp.symbol
    series = build_series(exp)
    positive_times = [t for t in exp.times if t > 0] or [1.0]

    worst = max(ph.volterra_residual(series, k, lam, t) for lam in exp.lambdas for t in positive_times)
    record("volterra_residual", worst < tol["volterra"], worst, tol["volterra"])

    report = kn.check_assumption(k, max(positive_times))
    record("kernel_assumption", report.passed, report.k_t, 1.0 - report.eps)

    if isinstance(series.closed, ph.ClosedForm):
        cm = ph.cm_probe(series.closed, 10.0, tol=tol["cm"])
        record("complete_monotonicity", cm.passed, cm.worst_violation, tol["cm"])

    for t in positive_times:
        f = so.solve_spectral(exp.initial, psi, series, t, exp.grid)
        mass = f.diagnostics["box_mass"]
        rel = abs(mass - f.diagnostics["initial_mass"]) / abs(f.diagnostics["initial_mass"])
        record(f"mass_conservation[t={t:g}]", rel < tol["mass"], rel, tol["mass"])

    model = exp.process
    if model is None:
        return checks
    sig = tol["sigmas"]
    if hasattr(model, "scaler"):
        lam = np.logspace(-1.5, 1.5, 20)
        a = model.scaler.sample(rv.make_stream(exp.seed), exp.draws)
        mean, se = rv.empirical_laplace(a, lam)
        z = np.abs(mean - model.scaler.laplace(lam)) / np.maximum(se, 1e-300)
        record("scaler_laplace_exceedances", int(np.sum(z > sig)) <= 1, int(np.sum(z > sig)), 1)

    if isinstance(model, pr.ScaledFLSM):
        bias = max(pr.flsm_bias(model.flsm, t, exp.p_grid) for t in positive_times)
        record("flsm_discretisation_bias", bias < tol["flsm_bias"], bias, tol["flsm_bias"])

    p = np.asarray(exp.p_grid)
    streams = rv.spawn_streams(exp.seed + 1, len(positive_times))
    for t, stream in zip(positive_times, streams):
        x = pr.sample_marginal(model, t, stream, exp.draws)
        mean, se = pr.empirical_char(x, p)
        exact = so.multiplier(series, psi, t, p)
        z = np.maximum(np.abs(mean.real - exact.real) / np.maximum(se.real, 1e-15),
                       np.abs(mean.imag - exact.imag) / np.maximum(se.imag, 1e-15))
        # a discretised FLSM carries a known bias, so allow its tolerance on top
        slack = tol["flsm_bias"] if isinstance(model, pr.ScaledFLSM) else 0.0
        ok = np.abs(mean - exact) <= sig * np.abs(se) + slack + 1e-12
        record(f"characteristic_function[t={t:g}]", bool(np.all(ok)), float(np.max(z)), sig)

        spectral = so.solve_spectral(exp.initial, psi, series, t, exp.grid)
        mc = so.mc_solve(exp.initial, model, t, exp.grid, exp.draws, exp.seed + 2)
        cmp = so.compare_fields(spectral, mc, sigmas=sig)
        record(f"spectral_vs_monte_carlo[t={t:g}]", cmp.fraction_outside <= tol["band_fraction"],
               cmp.fraction_outside, tol["band_fraction"])

        if k.singularity_aware:
            rel = so.check_general_relation(model, psi, k, t, p, min(exp.draws, 100000), exp.seed + 3,
                                            sigmas=sig)
            record(f"general_relation[t={t:g}]", rel.passed, rel.max_residual, rel.band)
    return checks


def cmd_validate(exp: Experiment) -> int:
    checks = run_validation(exp)
    passed = all(c["passed"] for c in checks)
    _write_json(exp.output_dir / "validate.json", {"passed": passed, "checks": checks})
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['check']}: measured {c['measured']:.3g} "
              f"(threshold {c['threshold']:.3g})")
    return 0 if passed else 2


_HANDLERS = {
    "phi": cmd_phi,
    "kernel-check": cmd_kernel_check,
    "sample": cmd_sample,
    "simulate": cmd_simulate,
    "solve-spectral": cmd_solve_spectral,
    "solve-mc": cmd_solve_mc,
    "validate": cmd_validate,
}


def run(exp: Experiment, command: str) -> int:
    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    return _HANDLERS[command](exp)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracevo", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML experiment file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--draws", type=int, help="override the number of draws")
    parser.add_argument("--out", help="output directory")
    return parser


def main(argv: Optional[list] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        exp = build_experiment(load_config(args.config), seed=args.seed, draws=args.draws,
                               out=args.out)
        return run(exp, args.command)
    except FracEvoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
