"""Batch front end: TOML-configured runs with JSON/CSV artifacts.

Exit codes: 0 success, 1 configuration or usage error, 2 a requested
solve did not converge, 3 numerical failure (overflow, subsonic input,
instability). Outputs are deterministic for a fixed config: keys are
sorted, no timestamps are written, and every artifact embeds the
resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from .analysis import (
    decay_rate,
    dispersion_curve,
    fit_decay,
    kdv_coefficients,
    kdv_compare,
    kdv_profile,
)
from .config import RunConfig, parse_config
from .convolution import conv_spectral
from .energy import energy_report
from .errors import (
    ConfigError,
    DecayOverflowError,
    DegenerateProfileError,
    GridMismatchError,
    InstabilityError,
    PotentialOverflowError,
    SubsonicError,
)
from .grids import Grid, Profile, profile_to_csv
from .materials import Bond, DiscreteCoupling, potential_library, silling_medium
from .solver import (
    SolveOptions,
    localization_ratio,
    solve,
    support_width,
    sweep_K,
    threshold_detect,
)
from .timedomain import launch_wave, simulate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOCONV = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (
    PotentialOverflowError,
    DecayOverflowError,
    SubsonicError,
    InstabilityError,
    DegenerateProfileError,
    FloatingPointError,
)


def _jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def _solution_summary(sol) -> dict:
    return {
        "K": sol.K,
        "P": sol.P,
        "Q": sol.Q,
        "sigma2": sol.sigma2,
        "sigma": sol.sigma,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "min_gain": sol.min_gain,
        "converged": sol.converged,
        "status": sol.status,
        "sign": sol.sign,
        "localization_ratio": localization_ratio(sol.profile),
        "cone": asdict(sol.cone),
    }


def _resolve_outdir(cli_outdir, cfg: RunConfig = None) -> str:
    outdir = cli_outdir or os.environ.get("PERIWAVE_OUTDIR")
    if outdir is None and cfg is not None:
        outdir = cfg.outdir
    outdir = outdir or "."
    os.makedirs(outdir, exist_ok=True)
    return outdir


def _apply_threads(threads):
    if threads is None:
        env = os.environ.get("PERIWAVE_THREADS")
        threads = int(env) if env else None
    if threads is not None:
        if threads < 1:
            raise ConfigError("--threads must be a positive integer")
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    return threads


def _numeric_section(cfg: RunConfig, name: str) -> dict:
    section = cfg.raw.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    return section


def _require_K(section: dict, name: str) -> float:
    K = section.get("K")
    if not isinstance(K, (int, float)) or isinstance(K, bool) or K <= 0:
        raise ConfigError(f"[{name}] needs a positive numeric K")
    return float(K)


def cmd_solve(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "solve")
    K = _require_K(section, "solve")
    sol = solve(K, cfg.coupling, cfg.grid, cfg.solver)
    profile_to_csv(sol.profile, os.path.join(outdir, "profile.csv"))
    payload = {"solution": _solution_summary(sol), "config": cfg.resolved()}
    if sol.history is not None:
        payload["history"] = {
            "P": sol.history.P,
            "K": sol.history.K,
            "residual": sol.history.residual,
        }
    _write_json(os.path.join(outdir, "solution.json"), payload)
    print(f"solve: K={K:g} sigma={sol.sigma:.8g} status={sol.status}")
    return EXIT_OK if sol.converged else EXIT_NOCONV


def _sweep_values(section: dict) -> list:
    if "K_values" in section:
        values = section["K_values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("[sweep] K_values must be a nonempty list")
        return [float(v) for v in values]
    try:
        lo = float(section["K_min"])
        hi = float(section["K_max"])
        count = int(section["count"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("[sweep] needs K_values or K_min/K_max/count")
    spacing = section.get("spacing", "linear")
    if spacing == "linear":
        return list(np.linspace(lo, hi, count))
    if spacing == "log":
        if lo <= 0:
            raise ConfigError("[sweep] log spacing needs K_min > 0")
        return list(np.geomspace(lo, hi, count))
    raise ConfigError(f"[sweep] unknown spacing {spacing!r}")


def _sweep_table_rows(rows):
    for r in rows:
        yield (r.K, r.P, r.sigma, r.ratio, r.converged, r.status)


def cmd_sweep(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "sweep")
    K_values = _sweep_values(section)
    warm = section.get("warm_start", True)
    trigger = float(section.get("trigger", 2.0))
    rows = sweep_K(K_values, cfg.coupling, cfg.grid, cfg.solver, warm_start=bool(warm))
    report = threshold_detect(rows, trigger=trigger)
    _write_csv(
        os.path.join(outdir, "sweep.csv"),
        ["K", "P", "sigma", "ratio", "converged", "status"],
        _sweep_table_rows(rows),
    )
    _write_json(
        os.path.join(outdir, "threshold.json"),
        {"threshold": asdict(report), "config": cfg.resolved()},
    )
    if report.found:
        print(f"sweep: threshold bracket ({report.K_low:g}, {report.K_high:g})")
    else:
        print(f"sweep: no threshold ({report.reason})")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOCONV


def cmd_dispersion(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "dispersion")
    k_max = float(section.get("k_max", 4.0 * math.pi))
    samples = int(section.get("samples", 256))
    curve = dispersion_curve(cfg.coupling, k_max, samples)
    _write_csv(
        os.path.join(outdir, "dispersion.csv"),
        ["k", "theta2", "omega2"],
        zip(curve.k.tolist(), curve.theta2.tolist(), curve.omega2.tolist()),
    )
    _write_json(
        os.path.join(outdir, "dispersion.json"),
        {"c0": curve.c0, "c_inf": curve.c_inf, "config": cfg.resolved()},
    )
    print(f"dispersion: c0={curve.c0:.8g}")
    return EXIT_OK


def cmd_decay(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "decay")
    K = _require_K(section, "decay")
    sol = solve(K, cfg.coupling, cfg.grid, cfg.solver)
    if not sol.converged:
        print(f"decay: solve did not converge (status {sol.status})", file=sys.stderr)
        return EXIT_NOCONV
    window = section.get("window")
    if window is None:
        window = (1.0, 0.6 * cfg.grid.L)
    coupling = cfg.coupling
    values = sol.profile
    if sol.sign == "negative":
        values = Profile(sol.profile.grid, -sol.profile.values)
    lam_predicted = decay_rate(sol.sigma2, coupling)
    lam_measured = fit_decay(values, window)
    rel = abs(lam_measured - lam_predicted) / lam_predicted
    _write_json(
        os.path.join(outdir, "decay.json"),
        {
            "K": K,
            "sigma2": sol.sigma2,
            "lambda_predicted": lam_predicted,
            "lambda_measured": lam_measured,
            "relative_mismatch": rel,
            "window": list(window),
            "config": cfg.resolved(),
        },
    )
    print(f"decay: predicted={lam_predicted:.6g} measured={lam_measured:.6g} rel={rel:.3%}")
    return EXIT_OK


def cmd_kdv(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "kdv")
    eps_values = section.get("eps_values", [0.4, 0.2, 0.1])
    if not isinstance(eps_values, list) or not eps_values:
        raise ConfigError("[kdv] eps_values must be a nonempty list")
    coef = kdv_coefficients(cfg.coupling)
    if coef.degenerate:
        print("kdv: cubic coefficient not positive; long-wave limit degenerate", file=sys.stderr)
        return EXIT_NUMERIC
    rows = []
    for eps in [float(e) for e in eps_values]:
        # kinetic value of the predicted wave: K = 3 eps^3 sqrt(c1) / c2^2
        K = 3.0 * eps ** 3 * math.sqrt(coef.c1_curvature) / coef.c2 ** 2
        sol = solve(K, cfg.coupling, cfg.grid, cfg.solver)
        if not sol.converged:
            print(f"kdv: solve at K={K:g} did not converge", file=sys.stderr)
            return EXIT_NOCONV
        cmp = kdv_compare(sol, cfg.coupling)
        rows.append((eps, K, cmp.eps, cmp.sup_error, cmp.l2_error, cmp.amplitude_ratio))
    _write_csv(
        os.path.join(outdir, "kdv.csv"),
        ["eps_target", "K", "eps_measured", "sup_error", "l2_error", "amplitude_ratio"],
        rows,
    )
    _write_json(
        os.path.join(outdir, "kdv.json"),
        {
            "coefficients": asdict(coef),
            "ladder": [
                dict(zip(("eps_target", "K", "eps_measured", "sup_error", "l2_error", "amplitude_ratio"), r))
                for r in rows
            ],
            "config": cfg.resolved(),
        },
    )
    print("kdv: sup errors " + ", ".join(f"{r[3]:.4f}" for r in rows))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "simulate")
    K = _require_K(section, "simulate")
    duration = float(section.get("duration", 10.0))
    dt = float(section.get("dt", 1e-3))
    checkpoints = int(section.get("checkpoints", 50))
    sol = solve(K, cfg.coupling, cfg.grid, cfg.solver)
    if not sol.converged:
        print(f"simulate: solve did not converge (status {sol.status})", file=sys.stderr)
        return EXIT_NOCONV
    state = launch_wave(sol, cfg.coupling)
    report = simulate(state, cfg.coupling, duration, dt=dt, checkpoints=checkpoints)
    speed_err = abs(report.measured_speed - sol.sigma) / sol.sigma
    _write_json(
        os.path.join(outdir, "propagation.json"),
        {
            "report": asdict(report),
            "sigma": sol.sigma,
            "speed_relative_error": speed_err,
            "config": cfg.resolved(),
        },
    )
    print(
        f"simulate: speed={report.measured_speed:.6g} (sigma={sol.sigma:.6g}), "
        f"shape_error={report.shape_error:.3%}, drift={report.energy_drift:.3g}"
    )
    return EXIT_OK if report.status == "ok" else EXIT_NUMERIC


def cmd_check(cfg: RunConfig, outdir: str) -> int:
    section = _numeric_section(cfg, "check") or _numeric_section(cfg, "solve")
    K = _require_K(section, "check")
    from .solver import initial_profile

    W = initial_profile(
        cfg.solver.initial if cfg.solver.initial != "supplied" else "gaussian",
        K,
        cfg.grid,
        width=cfg.solver.initial_width,
    )
    report = energy_report(W, cfg.coupling)
    payload = {"report": report.to_json(), "config": cfg.resolved()}
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    return EXIT_OK


def _reproduce_fig1(outdir: str) -> int:
    grid = Grid(10.0, 512)
    meta = {"figure": "fig1", "grid": {"L": grid.L, "N": grid.N}, "profiles": []}
    opts = SolveOptions(sign="negative", initial="gaussian")
    for H in (0.5, 1.0, 2.0):
        coupling = silling_medium(H, c2=0.5, c3=-1.0 / 6.0, xi_step=H / 200.0)
        sol = solve(1.0, coupling, grid, opts)
        name = f"fig1_profile_H{H:g}.csv"
        profile_to_csv(sol.profile, os.path.join(outdir, name))
        meta["profiles"].append(
            {"H": H, "file": name, **{k: v for k, v in _solution_summary(sol).items() if k != "cone"}}
        )
    coupling = silling_medium(1.0, c2=0.5, c3=-1.0 / 6.0, xi_step=0.005)
    rows = sweep_K(
        list(np.geomspace(0.1, 2.0, 8)), coupling, grid, opts, warm_start=False
    )
    _write_csv(
        os.path.join(outdir, "fig1_sweep.csv"),
        ["K", "P", "sigma", "ratio", "converged", "status"],
        _sweep_table_rows(rows),
    )
    meta["sweep"] = "fig1_sweep.csv"
    _write_json(os.path.join(outdir, "fig1.json"), meta)
    ok = all(r.converged for r in rows) and all(p["converged"] for p in meta["profiles"])
    return EXIT_OK if ok else EXIT_NOCONV


def _threshold_figure(outdir: str, tag: str, coupling, grid: Grid, K_values, profile_Ks) -> int:
    opts = SolveOptions(initial="indicator")
    rows = sweep_K(K_values, coupling, grid, opts, warm_start=False)
    report = threshold_detect(rows, trigger=1.5)
    _write_csv(
        os.path.join(outdir, f"{tag}_sweep.csv"),
        ["K", "P", "sigma", "ratio", "converged", "status"],
        _sweep_table_rows(rows),
    )
    columns = [("x", grid.nodes)]
    for K in profile_Ks:
        sol = solve(K, coupling, grid, opts)
        columns.append((f"W_K{K:g}", sol.profile.values))
    _write_csv(
        os.path.join(outdir, f"{tag}_profiles.csv"),
        [name for name, _ in columns],
        zip(*[vals.tolist() for _, vals in columns]),
    )
    _write_json(
        os.path.join(outdir, f"{tag}.json"),
        {
            "figure": tag,
            "threshold": asdict(report),
            "sweep": f"{tag}_sweep.csv",
            "profiles": f"{tag}_profiles.csv",
        },
    )
    if report.found:
        print(f"{tag}: threshold bracket ({report.K_low:g}, {report.K_high:g})")
    else:
        print(f"{tag}: no threshold ({report.reason})")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOCONV


def _reproduce_fig4(outdir: str) -> int:
    grid = Grid(4.0, 512)
    opts = SolveOptions(initial="gaussian")
    columns = [("x", grid.nodes)]
    meta = {"figure": "fig4", "K": 1.0, "profiles": []}
    for p in (1.5, 2.5, 3.0, 4.0):
        coupling = DiscreteCoupling((Bond(1.0, potential_library("hertz", p=p)),))
        sol = solve(1.0, coupling, grid, opts)
        distance = conv_spectral(sol.profile, 1.0)
        columns.append((f"W_p{p:g}", sol.profile.values))
        columns.append((f"AW_p{p:g}", distance.values))
        meta["profiles"].append(
            {"p": p, **{k: v for k, v in _solution_summary(sol).items() if k != "cone"}}
        )
    _write_csv(
        os.path.join(outdir, "fig4_profiles.csv"),
        [name for name, _ in columns],
        zip(*[vals.tolist() for _, vals in columns]),
    )
    _write_json(os.path.join(outdir, "fig4.json"), meta)
    ok = all(entry["converged"] for entry in meta["profiles"])
    return EXIT_OK if ok else EXIT_NOCONV


def _reproduce_fig6(outdir: str) -> int:
    grid = Grid(10.0, 1024)
    opts = SolveOptions(initial="gaussian")
    meta = {"figure": "fig6", "grid": {"L": grid.L, "N": grid.N}, "runs": []}
    variants = {
        "uniform": [1.0] * 5,
        "decaying": [1.0 / m for m in range(1, 6)],
    }
    ok = True
    for variant, betas in variants.items():
        bonds = tuple(
            Bond(float(m), potential_library("cosh", beta=betas[m - 1])) for m in range(1, 6)
        )
        coupling = DiscreteCoupling(bonds)
        for K in (1.0, 10.0, 100.0):
            sol = solve(K, coupling, grid, opts)
            ok = ok and sol.converged
            columns = [("x", grid.nodes), ("W", sol.profile.values)]
            for bond in bonds:
                columns.append(
                    (f"AW_xi{bond.xi:g}", conv_spectral(sol.profile, bond.xi).values)
                )
            name = f"fig6_{variant}_K{K:g}.csv"
            _write_csv(
                os.path.join(outdir, name),
                [n for n, _ in columns],
                zip(*[vals.tolist() for _, vals in columns]),
            )
            meta["runs"].append(
                {
                    "variant": variant,
                    "K": K,
                    "file": name,
                    "ratio": localization_ratio(sol.profile),
                    "support_width": support_width(sol.profile),
                    "sigma": sol.sigma,
                    "converged": sol.converged,
                }
            )
    _write_json(os.path.join(outdir, "fig6.json"), meta)
    return EXIT_OK if ok else EXIT_NOCONV


def cmd_reproduce(target: str, outdir: str) -> int:
    if target == "fig1":
        return _reproduce_fig1(outdir)
    if target == "fig2":
        grid = Grid(5.0, 512)
        coupling = DiscreteCoupling(
            (
                Bond(1.0, potential_library("poly26")),
                Bond(2.0, potential_library("poly26")),
            )
        )
        return _threshold_figure(
            outdir, "fig2", coupling, grid,
            [0.05, 0.1, 0.15, 0.25, 0.35, 0.5],
            profile_Ks=(0.1, 0.25, 0.5),
        )
    if target == "fig3":
        grid = Grid(4.0, 512)
        coupling = DiscreteCoupling((Bond(1.0, potential_library("pwlin")),))
        return _threshold_figure(
            outdir, "fig3", coupling, grid,
            [0.8, 0.9, 1.0, 1.1, 1.2, 1.3],
            profile_Ks=(0.9, 1.1, 1.3),
        )
    if target == "fig4":
        return _reproduce_fig4(outdir)
    if target == "fig6":
        return _reproduce_fig6(outdir)
    raise ConfigError(f"unknown reproduce target {target!r}")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; route those to the config exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


_CONFIG_COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "dispersion": cmd_dispersion,
    "decay": cmd_decay,
    "kdv": cmd_kdv,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = _Parser(
        prog="periwave",
        description="Traveling waves in peridynamical media: solver and analysis front end.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("-o", "--outdir", default=None, help="output directory (env PERIWAVE_OUTDIR)")
        p.add_argument("--threads", type=int, default=None, help="cap worker threads (env PERIWAVE_THREADS)")

    for name in _CONFIG_COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", required=True, help="TOML run configuration")
        add_common(p)

    p = sub.add_parser("reproduce")
    p.add_argument("target", choices=["fig1", "fig2", "fig3", "fig4", "fig6"])
    add_common(p)

    args = parser.parse_args(argv)
    try:
        _apply_threads(args.threads)
        if args.command == "reproduce":
            outdir = _resolve_outdir(args.outdir)
            return cmd_reproduce(args.target, outdir)
        cfg = parse_config(args.config)
        outdir = _resolve_outdir(args.outdir, cfg)
        return _CONFIG_COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"periwave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GridMismatchError as exc:
        print(f"periwave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"periwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"periwave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
