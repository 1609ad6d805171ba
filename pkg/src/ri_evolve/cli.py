"""``ri-evolve`` command line: ode, pde, hysteresis, verify and sweep.

Exit codes: 0 success, 1 a requested check failed, 2 configuration error,
3 solver guard violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import verification as ver
from .config import ConfigError, RunConfig
from .dissipation import map_from_spec
from .energy import energy_from_spec
from .ode_evolution import (
    BracketTooSmall,
    GuardViolated,
    Loading,
    MMParams,
    Trajectory,
    VVParams,
    loading_from_spec,
    run_hysteresis,
    run_minimizing_movements,
    run_viscous,
    vanishing_viscosity_limit,
)
from .pde_evolution import (
    Field,
    Grid,
    disk_field,
    radial_mcf_run,
    run_pde,
    scenario_from_name,
    stable_dt,
    unit_disk_field,
)

log = logging.getLogger("ri_evolve")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


# -- building blocks ----------------------------------------------------------


def _energy(cfg: RunConfig):
    if cfg.energy is None:
        raise ConfigError("energy", "an energy spec is required")
    try:
        return energy_from_spec(cfg.energy)
    except ValueError as exc:
        raise ConfigError("energy", str(exc)) from None


def _loading(cfg: RunConfig) -> Loading:
    try:
        return loading_from_spec(cfg.loading)
    except ValueError as exc:
        raise ConfigError("loading", str(exc)) from None


def _vv(cfg: RunConfig, eps: Optional[float] = None) -> VVParams:
    return VVParams(eps=float(eps if eps is not None else cfg.vv_eps),
                    h=None if cfg.vv_h is None else float(cfg.vv_h),
                    root_tol=float(cfg.vv_root_tol))


def _mm(cfg: RunConfig, T: float, N: Optional[int] = None) -> MMParams:
    return MMParams.uniform(T, int(N if N is not None else cfg.mm_steps),
                            scan_points=int(cfg.mm_scan_points), tie_tol=float(cfg.mm_tie_tol),
                            selection=cfg.mm_selection)


def solve_ode(cfg: RunConfig) -> Trajectory:
    land, loading = _energy(cfg), _loading(cfg)
    if cfg.scheme == "mm":
        return run_minimizing_movements(land, loading, _mm(cfg, loading.T))
    if cfg.scheme == "vv":
        return run_viscous(land, loading, _vv(cfg))
    seq = [float(v) for v in cfg.vv_eps_sequence]
    return vanishing_viscosity_limit(land, loading, seq, h=None if cfg.vv_h is None else float(cfg.vv_h),
                                     root_tol=float(cfg.vv_root_tol))


def run_suite(name: str, traj: Trajectory, land, loading: Loading) -> list[ver.CheckReport]:
    if name == "mm_lemmas":
        return ver.mm_lemma_suite(traj, land, loading)
    if name == "inclusion":
        return [ver.check_discrete_inclusion(traj, map_from_spec("sign_subdifferential"),
                                             land.fit_bracket(*loading.value_range), loading)]
    if name == "stick":
        return [ver.check_stick(traj, loading)]
    raise ConfigError("suite", f"unknown suite {name!r} (mm_lemmas, inclusion, stick)")


def _write_report(path: Optional[str], reports: Sequence[ver.CheckReport]) -> None:
    for r in reports:
        log.info("%s", r)
    if path:
        with open(path, "w") as fh:
            json.dump([r.record() for r in reports], fh, indent=1)


def _forcing(spec: str):
    """``zero``, ``const:v`` or ``cubed:c`` (``c (1 + (t (1-|x|²)_+)³)``)."""
    head, _, arg = str(spec).partition(":")
    if head == "zero":
        return lambda X, t: 0.0
    try:
        val = float(arg)
    except ValueError:
        raise ConfigError("pde.forcing", f"bad forcing {spec!r}") from None
    if head == "const":
        return lambda X, t: val
    if head == "cubed":
        def f(X, t):
            r2 = sum(x * x for x in X)
            return val * (1.0 + (t * np.clip(1.0 - r2, 0.0, None)) ** 3)
        return f
    raise ConfigError("pde.forcing", f"bad forcing {spec!r}")


# -- commands -------------------------------------------------------------------


def cmd_ode(cfg: RunConfig) -> int:
    traj = solve_ode(cfg)
    if cfg.out:
        traj.to_csv(cfg.out)
    for j in traj.jumps:
        log.info("jump at t=%.6g f=%.6g: %.6g -> %.6g", j.t, j.f, j.u_before, j.u_after)
    if cfg.check or cfg.report:
        land, loading = _energy(cfg), _loading(cfg)
        suite = cfg.suite if cfg.scheme == "mm" else "inclusion"
        reports = run_suite(suite, traj, land, loading)
        _write_report(cfg.report, reports)
        return EXIT_OK if ver.summarize(reports) else EXIT_CHECK
    return EXIT_OK


def cmd_pde(cfg: RunConfig) -> int:
    if cfg.pde_scenario == "mcf_radial":
        res = radial_mcf_run(int(cfg.pde_n), float(cfg.pde_r0), float(cfg.pde_reg_eps), T=float(cfg.pde_T),
                             dt=None if cfg.pde_dt == "auto" else float(cfg.pde_dt))
        log.info("radial run: %s (hit time %s)", res.classification, res.hit_time)
        if cfg.out:
            os.makedirs(cfg.out, exist_ok=True)
            res.trajectory.to_csv(os.path.join(cfg.out, "radius.csv"))
        return EXIT_OK
    sc = scenario_from_name(cfg.pde_scenario, _forcing(cfg.pde_forcing), float(cfg.pde_reg_eps),
                            None if cfg.pde_sigma is None else float(cfg.pde_sigma))
    nx = int(cfg.pde_nx)
    if cfg.pde_scenario == "sticktion_heat":
        u0 = Field(Grid.square(0.0, 1.0, nx, dim=1), np.zeros(nx))
    elif cfg.pde_scenario == "nonconvex_cubed":
        u0 = unit_disk_field(Grid.square(-1.0, 1.0, nx))
    else:
        u0 = disk_field(Grid.square(-3.0, 3.0, nx), float(cfg.pde_r0))
    dt = None if cfg.pde_dt == "auto" else float(cfg.pde_dt)
    run = run_pde(sc, u0, float(cfg.pde_T), int(cfg.pde_snapshots), dt)
    if cfg.out:
        run.write(cfg.out)
    log.info("%d steps of dt=%.3g (limit %.3g)", run.steps, run.dt, stable_dt(sc, u0.grid))
    return EXIT_OK


def cmd_hysteresis(cfg: RunConfig) -> int:
    if cfg.figure1:
        cfg.energy, cfg.loading = "cubic_paper", "paper_f"
    land, loading = _energy(cfg), _loading(cfg)
    rep = run_hysteresis(land, loading, _vv(cfg), _mm(cfg, loading.T))
    outdir = cfg.out or "hysteresis"
    rep.write(outdir, svg=cfg.svg)
    summary = []
    for scheme, matches in rep.matches.items():
        for m in matches:
            summary.append({
                "scheme": scheme, "direction": m.prediction.direction,
                "predicted_f": m.prediction.f_level, "predicted_t": m.prediction.t,
                "realized_f": None if m.realized is None else m.realized.f,
                "realized_t": None if m.realized is None else m.realized.t,
                "f_error": None if m.realized is None else m.f_error,
            })
            log.info("%s %+d: predicted f=%.4f realized %s", scheme, m.prediction.direction,
                     m.prediction.f_level, "-" if m.realized is None else f"{m.realized.f:.4f}")
    with open(os.path.join(outdir, "jumps.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    traj = Trajectory.from_csv(cfg.run)
    land = _energy(cfg) if cfg.energy is not None else energy_from_spec("cubic_paper")
    loading = _loading(cfg)
    reports = run_suite(cfg.suite, traj, land, loading)
    _write_report(cfg.report, reports)
    return EXIT_OK if ver.summarize(reports) else EXIT_CHECK


def _sweep_one(args):
    cfg, value = args
    cfg = RunConfig.from_flat(cfg)
    land, loading = _energy(cfg), _loading(cfg)
    if cfg.sweep_axis == "N":
        traj = run_minimizing_movements(land, loading, _mm(cfg, loading.T, int(value)))
        reports = ver.mm_lemma_suite(traj, land, loading)
    else:
        vv = _vv(cfg, value if cfg.sweep_axis == "eps" else None)
        if cfg.sweep_axis == "h":
            vv.h = float(value)
        traj = run_viscous(land, loading, vv)
        reports = [ver.check_discrete_inclusion(traj, map_from_spec("sign_subdifferential"),
                                                land.fit_bracket(*loading.value_range), loading)]
    return {
        "axis": cfg.sweep_axis, "value": value, "final_u": float(traj.values[-1]),
        "jump_t": ";".join(f"{j.t:.6g}" for j in traj.jumps),
        "jump_f": ";".join(f"{j.f:.6g}" for j in traj.jumps),
        "checks_pass": ver.summarize(reports),
    }, traj


def sweep_workers(n_jobs: int) -> int:
    cap = os.environ.get("RI_EVOLVE_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_jobs, limit))


def cmd_sweep(cfg: RunConfig) -> int:
    values = [float(v) for v in cfg.sweep_values]
    if cfg.sweep_axis == "N":
        values = [int(v) for v in values]
    jobs = [(cfg.to_flat(), v) for v in values]
    workers = sweep_workers(len(jobs))
    if workers == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    rows = [r for r, _ in results]
    if cfg.sweep_axis == "eps":
        trajs = [(float(v), tr) for v, (_, tr) in zip(values, results)]
        mono = ver.check_monotone_in_eps(trajs, 10 * float(cfg.vv_root_tol))
        log.info("%s", mono)
        for r in rows:
            r["monotone_in_eps"] = mono.passed
    out = cfg.out or "sweep.csv"
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    ok = all(r["checks_pass"] and r.get("monotone_in_eps", True) for r in rows)
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"ode": cmd_ode, "pde": cmd_pde, "hysteresis": cmd_hysteresis, "verify": cmd_verify, "sweep": cmd_sweep}


# -- argument parsing ----------------------------------------------------------------


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", default=argparse.SUPPRESS, help="YAML file with flat dotted keys")
    shared.add_argument("--dump-config", metavar="PATH", default=argparse.SUPPRESS,
                        help="write the effective config ('-' for stdout)")
    shared.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="ri-evolve", description=__doc__.splitlines()[0], parents=[shared])
    sub = p.add_subparsers(dest="command", required=True)
    _add_parser = sub.add_parser

    def add_parser(name, **kw):
        return _add_parser(name, parents=[shared], **kw)

    sub.add_parser = add_parser

    def common(sp):
        sp.add_argument("--energy", help="cubic_paper | linear | poly:c0,c1,...")
        sp.add_argument("--loading", help="paper_f | ramp:T[:slope] | const:T[:value]")
        sp.add_argument("--out")

    sp = sub.add_parser("ode", help="solve the scalar evolution")
    common(sp)
    sp.add_argument("--scheme", choices=["mm", "vv", "vv_limit"])
    sp.add_argument("--steps", dest="mm.steps", type=int)
    sp.add_argument("--selection", dest="mm.selection", choices=["global", "extremal"])
    sp.add_argument("--eps", dest="vv.eps", type=float)
    sp.add_argument("--h", dest="vv.h", type=float)
    sp.add_argument("--eps-sequence", dest="vv.eps_sequence", type=_csv_floats)
    sp.add_argument("--report")
    sp.add_argument("--check", action="store_true", default=None)

    sp = sub.add_parser("pde", help="run a PDE scenario")
    sp.add_argument("--scenario", dest="pde.scenario")
    sp.add_argument("--nx", dest="pde.nx", type=int)
    sp.add_argument("--dt", dest="pde.dt")
    sp.add_argument("--T", dest="pde.T", type=float)
    sp.add_argument("--snapshots", dest="pde.snapshots", type=int)
    sp.add_argument("--reg-eps", dest="pde.reg_eps", type=float)
    sp.add_argument("--sigma", dest="pde.sigma", type=float)
    sp.add_argument("--forcing", dest="pde.forcing")
    sp.add_argument("--r0", dest="pde.r0", type=float)
    sp.add_argument("--n", dest="pde.n", type=int)
    sp.add_argument("--out")

    sp = sub.add_parser("hysteresis", help="hysteresis loops and jump comparison")
    common(sp)
    sp.add_argument("--figure1", action="store_true", default=None)
    sp.add_argument("--steps", dest="mm.steps", type=int)
    sp.add_argument("--selection", dest="mm.selection", choices=["global", "extremal"])
    sp.add_argument("--eps", dest="vv.eps", type=float)
    sp.add_argument("--no-svg", dest="svg", action="store_false", default=None)

    sp = sub.add_parser("verify", help="check a stored trajectory")
    common(sp)
    sp.add_argument("--run")
    sp.add_argument("--suite", choices=["mm_lemmas", "inclusion", "stick"])
    sp.add_argument("--report")

    sp = sub.add_parser("sweep", help="one run per parameter value")
    common(sp)
    sp.add_argument("--axis", dest="sweep.axis", choices=["eps", "h", "N"])
    sp.add_argument("--values", dest="sweep.values", type=_csv_floats)
    sp.add_argument("--scheme", choices=["mm", "vv"])
    sp.add_argument("--selection", dest="mm.selection", choices=["global", "extremal"])
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    config = getattr(args, "config", None)
    base = RunConfig.load(config) if config else RunConfig()
    skip = {"config", "dump_config", "verbose"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    return base.merged(overrides).validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        dump = getattr(args, "dump_config", None)
        if dump:
            text = cfg.dump()
            if dump == "-":
                sys.stdout.write(text)
            else:
                with open(dump, "w") as fh:
                    fh.write(text)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"ri-evolve: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GuardViolated, BracketTooSmall) as exc:
        print(f"ri-evolve: solver guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"ri-evolve: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
