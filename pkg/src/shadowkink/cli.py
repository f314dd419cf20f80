"""Command-line orchestration.

    shadow-kink <command> --config <path> [--epsilon X] [--a Y] [--out DIR]
                [--no-figures]

Runs are configured by a single JSON file (reproducibility of numeric-heavy
experiments beats long flag lists); a few override flags cover interactive
use.  Every command writes its reports as JSON, profile data as
full-precision CSV, and a rendered PNG figure alongside (unless
--no-figures).  Re-running a command on the same config byte-reproduces
every output file.

Exit codes: 0 success, 2 configuration/precondition failure, 3 solver
nonconvergence, 4 topology/branch/pole errors, 1 anything else.  Every
failure prints a JSON object {code, message, context} to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import figures
from .blowdown import (
    compare_blowup,
    division_diagnostic,
    fit_zero_scaling,
    rescale_blowup,
    tanh_layer_check,
)
from .errors import (
    BranchCaptureError,
    ConfigError,
    ConventionError,
    NonconvergenceError,
    PoleError,
    PreconditionError,
    ShadowKinkError,
    TopologyError,
)
from .kink import SolverConfig, solve_eta, solve_minimizer
from .model import PotentialSpec, alpha_of, compute_thresholds, validate_assumptions
from .painleve import PiiConfig, backlund_step, linearization_spectrum, solve_pii
from .util import fnum, write_csv, write_json

_SOLVER_KEYS = {
    "L", "n", "tol", "max_iters", "damping_min", "continuation_eps",
    "layer_centers", "refine", "check_second_variation",
}
_PII_KEYS = {"s_minus", "s_plus", "h", "tol", "max_iters", "damping_min", "order", "c0", "check_truncation"}

_COMMANDS = {
    "validate": {"n_samples", "L_val"},
    "thresholds": {"quad_n", "refine_tol"},
    "solve": {"epsilon", "a", "solver"},
    "eta": {"epsilon", "a", "solver"},
    "pii": {"alpha", "branch", "pii"},
    "backlund": {"alpha", "branch", "direction", "pii"},
    "spectrum": {"alpha", "branch", "T", "k", "spectrum_n", "pii"},
    "blowup": {"epsilon", "a", "s_window", "solver", "pii"},
    "scaling": {"eps_ladder", "a", "solver", "pii", "predict"},
    "tanh-check": {"epsilon", "a", "solver"},
    "division": {"epsilon", "a", "solver"},
}


def _require(cfg, key, types, check=None, what=""):
    if key not in cfg:
        raise ConfigError(f"missing required key '{key}'", key=key)
    val = cfg[key]
    if not isinstance(val, types):
        raise ConfigError(f"key '{key}' has the wrong type", key=key, got=type(val).__name__)
    if check is not None and not check(val):
        raise ConfigError(f"key '{key}' {what}", key=key, value=val)
    return val


def _positive(cfg, key):
    return float(_require(cfg, key, (int, float), lambda v: v > 0, "must be positive"))


def _load_config(path, command, overrides):
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", path=str(path)) from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    allowed = _COMMANDS[command] | {"spec", "output_dir"}
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys for '{command}': {unknown}", unknown=unknown)
    for block, keys in (("solver", _SOLVER_KEYS), ("pii", _PII_KEYS)):
        if block in cfg:
            if not isinstance(cfg[block], dict):
                raise ConfigError(f"'{block}' must be an object")
            bad = sorted(set(cfg[block]) - keys)
            if bad:
                raise ConfigError(f"unknown keys in '{block}': {bad}", unknown=bad)
    if "spec" not in cfg:
        raise ConfigError("config must carry a 'spec' object")
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    return cfg


def _solver_config(cfg):
    block = dict(cfg.get("solver", {}))
    if "continuation_eps" in block:
        block["continuation_eps"] = tuple(block["continuation_eps"])
    if "layer_centers" in block:
        block["layer_centers"] = tuple(block["layer_centers"])
    return SolverConfig(**block)


def _pii_config(cfg):
    return PiiConfig(**cfg.get("pii", {}))


def _out_dir(cfg):
    out = Path(cfg.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _branch(cfg):
    return _require(cfg, "branch", str, lambda b: b in ("plus", "minus"), "must be 'plus' or 'minus'")


def _alpha(cfg):
    return float(_require(cfg, "alpha", (int, float), lambda v: v <= 0, "must be nonpositive"))


def _kink_outputs(sol, out, render, stem=None):
    stem = stem or f"kink_eps{fnum(sol.epsilon)}_a{fnum(sol.a)}"
    paths = [
        write_csv(out / f"{stem}.csv", ["x", "v"], [sol.grid.nodes, sol.values]),
        write_json(out / f"{stem}.json", sol.to_json()),
    ]
    if render:
        paths.append(
            figures.profile_figure(
                sol.grid.nodes, sol.values, out / f"{stem}.png",
                f"kink, eps = {fnum(sol.epsilon)}, a = {fnum(sol.a)}", zero=sol.rho,
            )
        )
    return paths


def _pii_outputs(sol, out, render, stem=None):
    stem = stem or f"pii_alpha{fnum(sol.alpha)}_{sol.branch}"
    paths = [
        write_csv(out / f"{stem}.csv", ["s", "y"], [sol.grid.nodes, sol.values]),
        write_json(out / f"{stem}.json", sol.to_json()),
    ]
    if render:
        paths.append(figures.pii_figure(sol, out / f"{stem}.png"))
    return paths


def _cmd_validate(spec, cfg, out, render):
    n_samples = int(cfg.get("n_samples", 512))
    report = validate_assumptions(spec, n_samples, cfg.get("L_val"))
    return [write_json(out / "assumptions.json", report.to_json())]


def _cmd_thresholds(spec, cfg, out, render):
    report = compute_thresholds(
        spec, int(cfg.get("quad_n", 20000)), float(cfg.get("refine_tol", 1e-10))
    )
    return [write_json(out / "thresholds.json", report.to_json())]


def _cmd_solve(spec, cfg, out, render):
    sol = solve_minimizer(spec, _positive(cfg, "epsilon"), _positive(cfg, "a"), _solver_config(cfg))
    return _kink_outputs(sol, out, render)


def _cmd_eta(spec, cfg, out, render):
    eps = _positive(cfg, "epsilon")
    a = float(_require(cfg, "a", (int, float), lambda v: v >= 0, "must be nonnegative"))
    sol = solve_eta(spec, eps, a, _solver_config(cfg))
    stem = f"eta_eps{fnum(eps)}_a{fnum(a)}"
    paths = [
        write_csv(out / f"{stem}.csv", ["x", "eta"], [sol.grid.nodes, sol.values]),
        write_json(out / f"{stem}.json", sol.to_json()),
    ]
    if render:
        paths.append(
            figures.profile_figure(
                sol.grid.nodes, sol.values, out / f"{stem}.png",
                f"half-line solution, eps = {fnum(eps)}, a = {fnum(a)}", ylabel="eta",
            )
        )
    return paths


def _cmd_pii(spec, cfg, out, render):
    sol = solve_pii(_alpha(cfg), _branch(cfg), _pii_config(cfg))
    return _pii_outputs(sol, out, render)


def _cmd_backlund(spec, cfg, out, render):
    direction = _require(cfg, "direction", str, lambda d: d in ("up", "down"), "must be 'up' or 'down'")
    base = solve_pii(_alpha(cfg), _branch(cfg), _pii_config(cfg))
    stepped = backlund_step(base, direction)
    return _pii_outputs(stepped, out, render, stem=f"backlund_alpha{fnum(stepped.alpha)}_{direction}")


def _cmd_spectrum(spec, cfg, out, render):
    T = _positive(cfg, "T")
    k = int(_require(cfg, "k", int, lambda v: v >= 1, "must be at least 1"))
    sol = solve_pii(_alpha(cfg), _branch(cfg), _pii_config(cfg))
    report = linearization_spectrum(sol, T, k, int(cfg.get("spectrum_n", 8000)))
    stem = f"spectrum_alpha{fnum(report.alpha)}_{report.branch}"
    paths = [write_json(out / f"{stem}.json", report.to_json())]
    if render:
        paths.append(figures.spectrum_figure(report, out / f"{stem}.png"))
    return paths


def _cmd_blowup(spec, cfg, out, render):
    eps = _positive(cfg, "epsilon")
    a = _positive(cfg, "a")
    window = cfg.get("s_window", [-5.0, 5.0])
    if not (isinstance(window, (list, tuple)) and len(window) == 2 and window[0] < window[1]):
        raise ConfigError("s_window must be an ascending pair", s_window=window)
    sol = solve_minimizer(spec, eps, a, _solver_config(cfg))
    alpha = alpha_of(spec, a).alpha
    pii_cfg = _pii_config(cfg)
    plus = solve_pii(alpha, "plus", pii_cfg)
    try:
        minus = solve_pii(alpha, "minus", pii_cfg)
    except (NonconvergenceError, BranchCaptureError):
        minus = None                  # sign-changing branch only guaranteed near alpha = 0
    report = compare_blowup(sol, plus, minus, window)
    s, resc = rescale_blowup(sol, spec, window)
    matched = plus if report.matched_branch == "plus" else minus
    from scipy.interpolate import CubicSpline

    minus_y = -CubicSpline(matched.grid.nodes, matched.values)(s)
    stem = f"blowup_eps{fnum(eps)}_a{fnum(a)}"
    paths = [
        write_json(out / f"{stem}.json", report.to_json()),
        write_csv(out / f"{stem}.csv", ["s", "rescaled_v", "minus_Y", "error"],
                  [s, resc, minus_y, abs(resc - minus_y)]),
    ]
    if render:
        paths.append(
            figures.blowup_figure(
                s, resc, minus_y, out / f"{stem}.png",
                f"corner blow-down, eps = {fnum(eps)}, matched branch {report.matched_branch}",
            )
        )
    return paths


def _cmd_scaling(spec, cfg, out, render):
    ladder = _require(cfg, "eps_ladder", list, lambda v: len(v) >= 4, "needs at least 4 entries")
    ladder = [float(e) for e in ladder]
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("eps_ladder must be strictly decreasing", eps_ladder=ladder)
    a = _positive(cfg, "a")
    solver_cfg = _solver_config(cfg)
    threads = os.environ.get("SHADOW_KINK_THREADS")
    workers = max(1, int(threads)) if threads else (os.cpu_count() or 1)

    def run(eps):
        return solve_minimizer(spec, eps, a, solver_cfg)

    with ThreadPoolExecutor(max_workers=min(workers, len(ladder))) as pool:
        sols = list(pool.map(run, ladder))
    sols.sort(key=lambda s: -s.epsilon)
    pii_minus = None
    if cfg.get("predict", True):
        alpha = alpha_of(spec, a).alpha
        if -0.5 < alpha < 0.0:
            pii_minus = solve_pii(alpha, "minus", _pii_config(cfg))
    report = fit_zero_scaling([(s.epsilon, s.rho) for s in sols], spec, pii_minus)
    paths = [write_json(out / "scaling.json", report.to_json())]
    for sol in sols:
        paths.extend(_kink_outputs(sol, out, render=False))
    if render:
        paths.append(figures.scaling_figure(report, out / "scaling.png"))
    return paths


def _cmd_tanh_check(spec, cfg, out, render):
    eps = _positive(cfg, "epsilon")
    a = _positive(cfg, "a")
    sol = solve_minimizer(spec, eps, a, _solver_config(cfg))
    sup = tanh_layer_check(sol, spec)
    stem = f"tanh_check_eps{fnum(eps)}_a{fnum(a)}"
    payload = {"epsilon": eps, "a": a, "rho": sol.rho, "sup_error": sup, "window_halfwidth": 6.0 * eps}
    paths = [write_json(out / f"{stem}.json", payload)]
    if render:
        import numpy as np

        x = sol.grid.nodes
        mask = abs(x - sol.rho) <= 6.0 * eps
        amp = float(spec.mu(sol.rho)) ** 0.5
        template = amp * np.tanh((float(spec.mu(sol.rho)) / 2.0) ** 0.5 * (x[mask] - sol.rho) / eps)
        paths.append(
            figures.tanh_figure(
                x[mask], sol.values[mask], template, sol.rho, out / f"{stem}.png",
                f"interior layer vs tanh template, sup error = {sup:.2e}",
            )
        )
    return paths


def _cmd_division(spec, cfg, out, render):
    eps = _positive(cfg, "epsilon")
    a = _positive(cfg, "a")
    solver_cfg = _solver_config(cfg)
    kink = solve_minimizer(spec, eps, a, solver_cfg)
    eta = solve_eta(spec, eps, a, solver_cfg, match=kink)
    report = division_diagnostic(kink, eta)
    stem = f"division_eps{fnum(eps)}_a{fnum(a)}"
    paths = [
        write_json(out / f"{stem}.json", report.to_json()),
        write_csv(out / f"{stem}.csv", ["x", "w"], [report.x, report.w]),
    ]
    if render:
        paths.append(
            figures.division_figure(report, out / f"{stem}.png", f"division diagnostic, eps = {fnum(eps)}")
        )
    return paths


_DISPATCH = {
    "validate": _cmd_validate,
    "thresholds": _cmd_thresholds,
    "solve": _cmd_solve,
    "eta": _cmd_eta,
    "pii": _cmd_pii,
    "backlund": _cmd_backlund,
    "spectrum": _cmd_spectrum,
    "blowup": _cmd_blowup,
    "scaling": _cmd_scaling,
    "tanh-check": _cmd_tanh_check,
    "division": _cmd_division,
}


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="shadow-kink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _DISPATCH:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--a", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--no-figures", action="store_true")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(
            args.config,
            args.command,
            {"epsilon": args.epsilon, "a": args.a, "output_dir": args.out},
        )
        spec = PotentialSpec.from_json(cfg["spec"])
        out = _out_dir(cfg)
        paths = _DISPATCH[args.command](spec, cfg, out, render=not args.no_figures)
    except ShadowKinkError as exc:
        print(json.dumps(exc.to_json(), sort_keys=True))
        if isinstance(exc, (ConfigError, PreconditionError)):
            return 2
        if isinstance(exc, NonconvergenceError):
            return 3
        if isinstance(exc, (TopologyError, BranchCaptureError, PoleError, ConventionError)):
            return 4
        return 1
    print(json.dumps({"command": args.command, "outputs": [str(p) for p in paths], "status": "ok"}, sort_keys=True))
    return 0


def main():  # console entry point
    sys.exit(run())


if __name__ == "__main__":
    main()
