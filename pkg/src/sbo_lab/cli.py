"""Command-line entry point: ``sbo-lab <command> [--config C] [--out DIR] [--seed S] [--quiet]``.

Every command writes its artifacts plus ``summary.json`` into ``--out`` and
exits 0 only when all of its checks pass (1 on failed checks, 2 on bad
configuration, 3 when the run aborted and the artifacts are partial).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import diagnostics as D
from . import estimates as ES
from .convergence import spatial_convergence, temporal_convergence
from .grid import make_grid
from .integrator import StepLimitExceeded, evolve, evolve_pair_with_difference
from .io import (
    ConfigError,
    RunConfig,
    config_to_dict,
    load_config,
    write_csv,
    write_json,
    write_snapshot,
)
from .model import (
    DiffState,
    InitDataSpec,
    SboState,
    choose_lambda,
    joint_norm,
    make_state,
    rescale_initdata,
    scaling_norm_check,
    unscale_initdata,
)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_ABORTED = 0, 1, 2, 3


def worker_count() -> int:
    """Parallelism cap from ``SBO_LAB_THREADS`` (default 1)."""
    raw = os.environ.get("SBO_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class Session:
    """Collects checks and artifacts for one command invocation."""

    def __init__(self, command: str, out: Path, cfg: RunConfig, quiet: bool):
        self.command = command
        self.out = out
        self.cfg = cfg
        self.quiet = quiet
        self.checks: dict[str, dict] = {}
        self.info: dict[str, object] = {}
        self.artifacts: list[str] = []

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def check(self, name: str, passed: bool, **values) -> None:
        self.checks[name] = {"passed": bool(passed), **values}
        self.say(f"{'PASS' if passed else 'FAIL'} {name}")

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def finish(self, partial: bool = False, error: str | None = None) -> int:
        summary = {
            "command": self.command,
            "passed": self.passed and not partial,
            "partial": partial,
            "checks": self.checks,
            "info": self.info,
            "artifacts": sorted(self.artifacts),
            "config": config_to_dict(self.cfg),
        }
        if error is not None:
            summary["error"] = error
        write_json(self.out / "summary.json", summary)
        if partial:
            return EXIT_ABORTED
        return EXIT_OK if self.passed else EXIT_FAILED


def _seeded(spec: InitDataSpec, seed: int) -> InitDataSpec:
    if spec.family == "random-band-limited" and seed:
        return replace(spec, seed=spec.seed + seed)
    return spec


def _initial_state(cfg: RunConfig) -> SboState:
    return make_state(cfg.make_grid(), _seeded(cfg.u0, cfg.seed), _seeded(cfg.v0, cfg.seed))


def _horizon(cfg: RunConfig, st: SboState) -> float:
    if cfg.horizon.auto:
        return ES.apriori_time(joint_norm(st.grid, st.u, st.v, cfg.diagnostics.s), cfg.horizon.A_s)
    return cfg.horizon.T


def _drift(a: float, b: float) -> float:
    return abs(b - a) / abs(a) if a != 0 else abs(b - a)


def _write_records(sess: Session, name: str, recs) -> None:
    write_csv(sess.path(name), D.CSV_COLUMNS, (r.row() for r in recs))


def cmd_run(sess: Session) -> None:
    cfg = sess.cfg
    st = _initial_state(cfg)
    T = _horizon(cfg, st)
    sess.info["T"] = T
    traj = evolve(st, cfg.params, T, cfg.controls)
    recs = D.records(traj, cfg.params, cfg.diagnostics.s, cfg.diagnostics.oversample)
    _write_records(sess, "diagnostics.csv", recs)
    write_snapshot(sess.path("final.sbo"), traj.final)
    sess.info.update(status=traj.status, accepted=traj.accepted, rejected=traj.rejected)
    dg = cfg.diagnostics
    first, last = recs[0], recs[-1]
    sess.check("completed", traj.status == "completed", status=traj.status)
    sess.check("E1_drift", abs(last.E1 - first.E1) <= dg.e1_abs_tol, value=abs(last.E1 - first.E1))
    sess.check("E2_drift", _drift(first.E2, last.E2) <= dg.e2_rel_tol, value=_drift(first.E2, last.E2))
    for name in ("E3", "E4"):
        d = _drift(getattr(first, name), getattr(last, name))
        sess.check(f"{name}_drift", d <= dg.e34_rel_tol, value=d)
    gr = D.gronwall_check(traj, cfg.params, dg.s, dg.kappa, dg.oversample)
    sess.check("gronwall", gr.holds, kappa=dg.kappa, minimal_kappa=gr.minimal_constant)
    coer = D.coercivity_check(st, dg.s)
    sess.info["coercivity_t0"] = {"ratio": coer.ratio, "holds": coer.holds}


def cmd_diff_run(sess: Session) -> None:
    cfg = sess.cfg
    a0 = _initial_state(cfg)
    g = a0.grid
    eps = cfg.diff.epsilon
    du = _seeded(cfg.diff.u0, cfg.seed).evaluate(g)
    dv = _seeded(cfg.diff.v0, cfg.seed).evaluate(g, real=True)
    b0 = SboState(g, a0.u + eps * du, a0.v + eps * dv, a0.t)
    T = _horizon(cfg, a0)
    sess.info["T"] = T
    ta, tb, td = evolve_pair_with_difference(a0, b0, cfg.params, T, cfg.controls)
    dg = cfg.diagnostics
    _write_records(sess, "run_a.csv", D.records(ta, cfg.params, dg.s, dg.oversample))
    _write_records(sess, "run_b.csv", D.records(tb, cfg.params, dg.s, dg.oversample))
    write_csv(sess.path("diff.csv"), D.DIFF_CSV_COLUMNS,
              (r.row() for r in D.diff_records(td, dg.s, dg.oversample)))
    sess.check("completed", td.status == "completed", status=td.status)
    K = max(D.accumulated_vx(ta, dg.oversample), D.accumulated_vx(tb, dg.oversample))
    lip = D.lipschitz_check(td, K, dg.lipschitz_c)
    write_json(sess.path("lipschitz.json"), {"K": K, "c": dg.lipschitz_c, **D.as_dict(lip)})
    sess.check("lipschitz", lip.holds, minimal_c=lip.minimal_constant, growth_rate=lip.growth_rate)
    worst = 0.0
    for a, b, d in zip(ta.states, tb.states, td.states):
        sub = DiffState.from_pair(a, b)
        den = math.sqrt(D.diff_norms(sub, 0.0))
        gap = DiffState(g, d.w - sub.w, d.z - sub.z, sub.u_sum, sub.v_sum, d.t)
        num = math.sqrt(D.diff_norms(gap, 0.0))
        worst = max(worst, num / den if den > 0 else num)
    sess.check("difference_matches_subtraction", worst <= 1e-6, max_rel=worst)


def cmd_convergence(sess: Session) -> None:
    cfg = sess.cfg
    L, N = cfg.grid.L, cfg.grid.N
    g = cfg.make_grid()
    wave_u = InitDataSpec("plane-wave", amplitude=1.0, wavenumber=float(g.k[3]))
    wave_v = InitDataSpec("plane-wave", amplitude=1.0)
    sizes = tuple(N >> j for j in (3, 2, 1, 0) if (N >> j) >= 8)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        ft = pool.submit(temporal_convergence, wave_u, wave_v, L, min(N, 256), cfg.params, 1.0)
        fd = pool.submit(temporal_convergence, _seeded(cfg.u0, cfg.seed), _seeded(cfg.v0, cfg.seed),
                         L, N, cfg.params, 1.0)
        fs = pool.submit(spatial_convergence, _seeded(cfg.u0, cfg.seed), _seeded(cfg.v0, cfg.seed),
                         L, cfg.params, 1.0, sizes)
        temporal, temporal_data, spatial = ft.result(), fd.result(), fs.result()
    for name, tab in (("temporal.csv", temporal), ("temporal_data.csv", temporal_data)):
        write_csv(sess.path(name), ("dt", "error"), zip(tab.levels, tab.errors))
    write_csv(sess.path("spatial.csv"), ("N", "error"), zip(spatial.levels, spatial.errors))
    write_json(sess.path("convergence.json"), {"temporal_plane_wave": temporal,
                                               "temporal_config_data": temporal_data,
                                               "spatial": spatial})
    sess.check("temporal_order", abs(temporal.fitted_slope - 4.0) <= 0.3, slope=temporal.fitted_slope)
    drop = spatial.extra["drop_factors"][0] if spatial.extra["drop_factors"] else math.nan
    sess.check("spatial_drop", drop >= 100.0, first_drop=drop)


def estimates_report(samples: int, seed: int, s: float) -> tuple[dict, dict[str, bool]]:
    """All probe, Bona-Smith and formula results plus their pass flags."""
    jobs: list[Callable] = [
        lambda: ES.probe_fractional_leibniz(0.5, 0.25, 0.25, 2, 4, 4, samples, seed),
        lambda: ES.probe_kato_ponce(0.75, "I", (2, np.inf, 2), samples, seed),
        lambda: ES.probe_kato_ponce(0.75, "I", (2, np.inf, 2), samples, seed, hilbert=True),
        lambda: ES.probe_kato_ponce(1.5, "II", (2, np.inf, 2, np.inf, 2), samples, seed),
        lambda: ES.probe_kato_ponce(1.5, "II", (2, np.inf, 2, np.inf, 2), samples, seed, hilbert=True),
        lambda: ES.probe_calderon(1, 1, 2, samples, seed),
        lambda: ES.probe_sharp_commutation(0.25, 0.5, 2, samples, seed),
    ]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        probes = list(pool.map(lambda f: f(), jobs))
    flags = {f"probe:{p.tag}": p.passed for p in probes}
    bona = []
    for component, level in (("u", s + 0.5), ("v", s)):
        spec = ES.bona_smith_spec(level, seed=seed)
        for sigma in (0.0, 0.5 * s, s):
            rep = ES.bona_smith_rates(spec, s, sigma, level=level)
            bona.append({"component": component, **D.as_dict(rep)})
            flags[f"bona-smith:{component}:sigma={sigma:g}"] = rep.passed
    report = {
        "probes": probes,
        "bona_smith": bona,
        "symbol_sups": {"T1": ES.C.t1_symbol_sup(), "T2": ES.C.t2_symbol_sup()},
        "apriori_time": {"A_s=64,norm=0": ES.apriori_time(0.0, 64.0), "A_s=64,norm=1": ES.apriori_time(1.0, 64.0)},
        "seed": seed,
        "samples": samples,
    }
    return report, flags


def cmd_estimates(sess: Session) -> None:
    cfg = sess.cfg
    report, flags = estimates_report(cfg.estimates.samples, cfg.seed, cfg.diagnostics.s)
    write_json(sess.path("estimates.json"), report)
    for name, ok in flags.items():
        sess.check(name, ok)


def cmd_rescale_check(sess: Session) -> None:
    cfg = sess.cfg
    g = cfg.make_grid()
    s = cfg.diagnostics.s
    u0, v0 = _seeded(cfg.u0, cfg.seed), _seeded(cfg.v0, cfg.seed)
    rows, worst, roundtrip = [], 0.0, True
    for lam in cfg.rescale.lambdas:
        rep = scaling_norm_check(u0, v0, lam, s, g)
        for r in (rep.u_l2_ratio, rep.v_l2_ratio):
            if r != 0:
                worst = max(worst, abs(r / rep.sqrt_lam - 1.0))
        for spec in (u0, v0):
            roundtrip &= unscale_initdata(rescale_initdata(spec, lam), lam) == spec
        rows.append(rep)
    sess.check("l2_scaling_identity", worst <= 1e-8, max_rel_error=worst)
    sess.check("lambda_roundtrip", roundtrip)
    lam = choose_lambda(u0, v0, cfg.rescale.delta, s, g)
    gl = make_grid(g.L / lam, g.N)
    nrm = joint_norm(gl, rescale_initdata(u0, lam).evaluate(gl), rescale_initdata(v0, lam).evaluate(gl, real=True), s)
    sess.check("choose_lambda", nrm <= cfg.rescale.delta, lam=lam, norm=nrm, delta=cfg.rescale.delta)
    write_json(sess.path("rescale.json"), {"sweep": rows, "choose_lambda": {"lambda": lam, "norm": nrm}})


COMMANDS = {
    "run": cmd_run,
    "diff-run": cmd_diff_run,
    "convergence": cmd_convergence,
    "estimates": cmd_estimates,
    "rescale-check": cmd_rescale_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbo-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--out", default="sbo_out", help="output directory (default: sbo_out)")
        p.add_argument("--seed", type=int, help="override the configuration seed (u64)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            print("config error: seed: must be a u64", file=sys.stderr)
            return EXIT_CONFIG
        cfg = replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sess = Session(args.command, out, cfg, args.quiet)
    try:
        COMMANDS[args.command](sess)
    except (StepLimitExceeded, FloatingPointError, RuntimeError, ValueError) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return sess.finish(partial=True, error=str(exc))
    return sess.finish()


if __name__ == "__main__":
    sys.exit(main())
