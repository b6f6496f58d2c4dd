"""``pme-focus`` command line.

::

    pme-focus oracle   --config run.cfg --out out/
    pme-focus simulate --config run.cfg --set grid.n=2000
    pme-focus analyze  --out out/
    pme-focus sweep    --set sweep.m=1.5,2,3 --jobs 4

Exit codes: 0 success, 2 configuration or precondition error, 3 numerical
failure (stability, positivity, domain too small), 4 analysis failure (not
focused, too few samples in the fit window).
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, asymptotics, exact, io, solver
from ._backend import BACKEND
from .config import MODES, ConfigError, RunConfig, load_config
from .errors import (
    AnalysisError, InsufficientSamplesError, NotFocusedError, NumericalError, PMEError,
    PreconditionError)

logger = logging.getLogger("pme_focus")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ANALYSIS = 0, 2, 3, 4
# fewer cells than this across the initial support triggers a warning
LOW_RES_CELLS = 8
TAYLOR_PISTAR = (0.2, 0.5, 0.8)
TAYLOR_PI2 = (1e-1, 1e-2, 1e-3, 1e-4)
PROFILE_ETA_C = (-0.1, -0.3, -0.6)
PROFILE_X_XI = (0.2, 0.1, 0.05)


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, AnalysisError):
        return EXIT_ANALYSIS
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_CONFIG


def error_tag(exc: BaseException) -> str:
    if isinstance(exc, NotFocusedError):
        return "error:not_focused"
    if isinstance(exc, InsufficientSamplesError):
        return "error:insufficient_samples"
    if isinstance(exc, AnalysisError):
        return "error:analysis"
    if isinstance(exc, NumericalError):
        return "error:numerical"
    return "error:precondition"


# {{{ shared pieces

def validate(cfg: RunConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    asymptotics.FitWindow(cfg.lo_frac, cfg.hi_frac)
    if cfg.sample_every < 1:
        raise ConfigError("numerics.sample_every must be >= 1")
    if cfg.mode == "sweep":
        return
    exact.GasParams(cfg.m, cfg.d, cfg.pde_consistent)
    exact.focusing_amplitude(cfg.xi, cfg.tau, cfg.m)
    if cfg.mode in ("simulate",):
        if not cfg.tau < cfg.t0_value < cfg.t_end_value:
            raise PreconditionError("need tau < numerics.t0 < numerics.t_end")
        solver_config(cfg)


def derived_block(cfg: RunConfig) -> Dict[str, float]:
    beta, B = exact.derived_constants(cfg.m, cfg.pde_consistent)
    A = exact.focusing_amplitude(cfg.xi, cfg.tau, cfg.m, cfg.pde_consistent)
    c_star, p = exact.c_star_symmetric(cfg.xi, cfg.tau, cfg.m, cfg.pde_consistent)
    out = {"beta": beta, "B": B, "A": A, "M": exact.barenblatt_mass(A, cfg.m), "p": p}
    if cfg.d == 1:
        out["c_star_exact"] = c_star
    return out


def solver_config(cfg: RunConfig) -> solver.SolverConfig:
    return solver.SolverConfig(
        exact.GasParams(cfg.m, cfg.d, cfg.pde_consistent), cfg.rmax_value, cfg.n,
        cfg.cfl, cfg.eps_iface, cfg.eps_focus, cfg.t0_value, cfg.t_end_value)


def simulate_case(cfg: RunConfig) -> Tuple[solver.RunResult, solver.SolverConfig, bool]:
    """Focusing run started on the point-mass profile; returns ``(result, config, low_res)``."""
    scfg = solver_config(cfg)
    field = exact.BarenblattField.focusing(cfg.xi, cfg.tau, cfg.m, cfg.pde_consistent)
    state = solver.barenblatt_initial_state(scfg, field, cfg.t0_value)
    lo, hi = exact.support_interval(cfg.t0_value, field)
    low_res = (hi - lo) < LOW_RES_CELLS * scfg.dx
    if low_res:
        logger.warning("initial support spans %.3g cells; results are low resolution",
                       (hi - lo) / scfg.dx)
    result = solver.run(state, scfg, cfg.sample_every, cfg.snapshot_times)
    return result, scfg, low_res


def fit_case(cfg: RunConfig, trace: solver.InterfaceTrace) -> asymptotics.CStarEstimate:
    window = asymptotics.FitWindow(cfg.lo_frac, cfg.hi_frac)
    return asymptotics.estimate_c_star(asymptotics.normalize_time(trace), window, cfg.tau)


def manifest(cfg: RunConfig, derived=None, results=None) -> dict:
    return {"config": cfg.to_mapping(), "derived": derived or {}, "results": results or {},
            "version": __version__}


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out

# }}}


# {{{ commands

def cmd_oracle(cfg: RunConfig) -> int:
    """Closed-form profiles at ``oracle.times`` plus derived constants."""
    out = _outdir(cfg)
    derived = derived_block(cfg)
    field = exact.BarenblattField.focusing(cfg.xi, cfg.tau, cfg.m, cfg.pde_consistent)
    x = np.linspace(0.0, 2.0 * cfg.xi, cfg.oracle_points)
    for t in cfg.oracle_times:
        if not cfg.tau < t <= 0:
            raise PreconditionError(f"oracle time {t!r} outside (tau, 0]")
    files = []
    for k, t in enumerate(cfg.oracle_times):
        profiles = {
            "barenblatt": exact.barenblatt_pressure(x, t, field),
            "focusing_pair": exact.focusing_pair_pressure(x, t, cfg.xi, cfg.tau, cfg.m,
                                                          cfg.pde_consistent),
            "graveleau": exact.graveleau_pressure(x, t, derived["c_star_exact"]),
        }
        for name, v in profiles.items():
            path = out / f"{name}_{k}.csv"
            io.write_csv(path, io.ORACLE_HEADER, zip(x, v))
            files.append(path.name)
    io.write_json(out / "manifest.json",
                  manifest(cfg, derived, {"times": list(cfg.oracle_times), "files": files}))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    start = time.perf_counter()
    result, scfg, low_res = simulate_case(cfg)
    wall = time.perf_counter() - start

    io.write_csv(out / "interface.csv", io.TRACE_HEADER,
                 zip(result.trace.t, result.trace.a, result.trace.b))
    for k, snap in enumerate(result.snapshots):
        io.write_csv(out / f"prof_{k}.csv", io.PROFILE_HEADER, zip(snap.r, snap.u, snap.v))
    results = {
        "T_num": result.trace.focus_time,
        "final_time": result.state.time,
        "steps": result.steps,
        "n_samples": len(result.trace),
        "max_mass_drift": result.max_mass_drift,
        "min_density": result.min_density,
        "snapshot_times": [s.t for s in result.snapshots],
        "low_resolution": bool(low_res),
        "backend": BACKEND,
    }
    io.write_json(out / "manifest.json", manifest(cfg, derived_block(cfg), results))
    io.write_json(out / "timing.json", {"wall_seconds": wall})
    logger.info("simulate: %d steps, T_num=%s, %.2f s", result.steps, result.trace.focus_time, wall)
    return EXIT_OK


def _load_snapshots(directory: Path, times: Sequence[float]) -> List[solver.Snapshot]:
    snaps = []
    for k, t in enumerate(times):
        path = directory / f"prof_{k}.csv"
        if not path.is_file():
            return []
        r, u, v = io.read_csv(path, io.PROFILE_HEADER)
        snaps.append(solver.Snapshot(float(t), np.array(r), np.array(u), np.array(v)))
    return snaps


def cmd_analyze(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    trace_path = Path(cfg.analyze_trace or out / "interface.csv")
    manifest_path = Path(cfg.analyze_manifest or trace_path.parent / "manifest.json")
    run_manifest = io.read_json(manifest_path) if manifest_path.is_file() else None
    if run_manifest is not None and "config" in run_manifest:
        physics = {k: v for k, v in run_manifest["config"].items() if k.startswith("physics.")}
        cfg = cfg.replace(**{name: val for name, val in
                             RunConfig.from_mapping(physics).__dict__.items()
                             if name in ("m", "d", "xi", "tau", "pde_consistent")})

    t, a, b = io.read_csv(trace_path, io.TRACE_HEADER)
    focus = cfg.analyze_focus_time
    if focus is None and run_manifest is not None:
        focus = run_manifest.get("results", {}).get("T_num")
    trace = solver.InterfaceTrace(list(t), list(a), list(b), focus)
    if focus is None:
        raise NotFocusedError(f"{trace_path}: run did not focus (no T_num)")

    est = fit_case(cfg, trace)
    report = {"c_hat": est.c_hat, "stderr": est.stderr, "n_samples": est.n_samples,
              "window": {"lo_frac": cfg.lo_frac, "hi_frac": cfg.hi_frac},
              "focus_time": focus, "residual_norm": est.residual_norm}
    if cfg.d == 1:
        c_exact, p = exact.c_star_symmetric(cfg.xi, cfg.tau, cfg.m, cfg.pde_consistent)
        report.update(c_star_exact=c_exact, p=p, rel_err=abs(est.c_hat - c_exact) / c_exact)

    remainders = asymptotics.taylor_remainder_scan(cfg.m, TAYLOR_PISTAR, TAYLOR_PI2,
                                                   cfg.pde_consistent)
    io.write_csv(out / "taylor_remainder.csv", ("PiStar", "Pi2", "remainder"),
                 ((ps, p2, remainders[i, j]) for i, ps in enumerate(TAYLOR_PISTAR)
                  for j, p2 in enumerate(TAYLOR_PI2)))

    times = (run_manifest or {}).get("results", {}).get("snapshot_times") or []
    snaps = _load_snapshots(trace_path.parent, times)
    report["profile_table"] = None
    if len(snaps) >= 2:
        evaluator = asymptotics.SnapshotEvaluator(snaps, time_shift=focus)
        etas = [e / est.c_hat for e in PROFILE_ETA_C]
        xs = [f * cfg.xi for f in PROFILE_X_XI]
        try:
            table = asymptotics.profile_convergence(evaluator, est.c_hat, etas, xs)
        except PreconditionError as exc:
            logger.warning("profile convergence table skipped: %s", exc)
        else:
            io.write_csv(out / "profile_convergence.csv", ("eta", "x", "rel_err"), table.rows())
            report["profile_table"] = "profile_convergence.csv"
    io.write_json(out / "cstar.json", report)
    return EXIT_OK


def _sweep_case(args) -> Tuple[list, Optional[str], int]:
    cfg, m, xi, tau = args
    row: list = [m, xi, tau, None, None, None, None, None]
    try:
        beta, _ = exact.derived_constants(m, cfg.pde_consistent)
        c_exact, p = exact.c_star_symmetric(xi, tau, m, cfg.pde_consistent)
        row[3:6] = [p, beta, c_exact]
        case = cfg.replace(m=m, xi=xi, tau=tau, mode="simulate", snapshot_times=())
        validate(case)
        result, _, _ = simulate_case(case)
        est = fit_case(case, result.trace)
        row[6] = est.c_hat
        row[7] = abs(est.c_hat - c_exact) / c_exact
        return row, None, EXIT_OK
    except PMEError as exc:
        row[6] = error_tag(exc)
        return row, f"{type(exc).__name__}: {exc}", exit_code(exc)


def sweep_cases(cfg: RunConfig):
    combos = sorted(itertools.product(cfg.sweep_m, cfg.sweep_xi, cfg.sweep_tau))
    if len(combos) > cfg.sweep_max_runs:
        raise ConfigError(f"sweep has {len(combos)} runs, cap is {cfg.sweep_max_runs}")
    return combos


def cmd_sweep(cfg: RunConfig, jobs: Optional[int] = None) -> int:
    out = _outdir(cfg)
    combos = sweep_cases(cfg)
    jobs = jobs or os.cpu_count() or 1
    tasks = [(cfg, m, xi, tau) for m, xi, tau in combos]
    if jobs == 1 or len(tasks) <= 1:
        results = [_sweep_case(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_sweep_case, tasks))
    io.write_csv(out / "sweep.csv", io.SWEEP_HEADER, (row for row, _, _ in results))
    failures = [{"m": r[0], "xi": r[1], "tau": r[2], "error": msg}
                for r, msg, _ in results if msg is not None]
    io.write_json(out / "sweep_manifest.json",
                  manifest(cfg, results={"runs": len(results), "failures": failures}))
    codes = [code for _, _, code in results if code != EXIT_OK]
    return codes[0] if codes else EXIT_OK

# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pme-focus",
        description="Porous medium focusing: exact solutions, simulation, c* analysis.")
    parser.add_argument("command", choices=MODES)
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a configuration key (repeatable)")
    parser.add_argument("--out", help="output directory (output.dir)")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallel sweep workers (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides, **{"output.dir": args.out})
        cfg = cfg.replace(mode=args.command)
        validate(cfg)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if cfg.mode == "oracle":
            return cmd_oracle(cfg)
        if cfg.mode == "simulate":
            return cmd_simulate(cfg)
        if cfg.mode == "analyze":
            return cmd_analyze(cfg)
        return cmd_sweep(cfg, args.jobs)
    except PMEError as exc:
        print(f"pme-focus: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
