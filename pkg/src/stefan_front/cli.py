"""Command-line orchestration: stefan-front <command> --config <path>.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (blow-up or a non-monotone threshold search).
"""

from __future__ import annotations

import argparse
import multiprocessing
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import classify, runio, semiwave
from . import solver as solver_mod
from .config import JobConfig, parse_config
from .errors import (BlowupError, MonotoneViolation, ParseError,
                     StefanFrontError)
from .solver import SolverConfig, Termination


def _solver_config(job: JobConfig, nl, mu=None, sigma=None, h0=None,
                   for_threshold=False) -> SolverConfig:
    u0 = job.initial if sigma is None else replace(
        job.initial, sigma=job.initial.sigma * sigma)
    return SolverConfig(
        nl=nl, mu=mu if mu is not None else job.mu,
        h0=h0 if h0 is not None else job.h0, u0=u0,
        t_max=job.threshold_t_max if for_threshold else job.t_max,
        N=job.threshold_N if for_threshold else job.N,
        dt_safety=job.dt_safety,
        snapshot_every=(job.threshold_snapshot_every if for_threshold
                        else job.snapshot_every),
        tolerances=job.tolerances, certify=job.certify)


def _simulate_one(job: JobConfig, outdir: Path, mu=None, sigma=None, h0=None):
    nl = job.build_nonlinearity()
    cfg = _solver_config(job, nl, mu=mu, sigma=sigma, h0=h0)
    run = solver_mod.run(cfg)
    verdict = classify.classify_run(run, nl, cfg.mu,
                                    spread_tol=job.spread_tol,
                                    vanish_tol=job.vanish_tol,
                                    trans_tol=job.trans_tol)
    runio.write_run_artifacts(run, outdir, verdict=verdict,
                              emit_plot_data=job.emit_plot_data)
    return run, verdict


def _sweep_worker(args):
    job, outdir, index, mu, sigma, h0 = args
    subdir = Path(outdir) / f"run_{index:04d}"
    run, verdict = _simulate_one(job, subdir, mu=mu, sigma=sigma, h0=h0)
    c_hat = ""
    if verdict.outcome is classify.Outcome.SPREADING:
        try:
            c_hat = f"{classify.speed_estimate(run)[0]:.8g}"
        except StefanFrontError:
            c_hat = ""
    blown = run.termination is Termination.BLOWUP
    return (index, mu, sigma, h0, verdict.outcome.value, c_hat,
            run.final.max_u(), run.final.span, blown)


def execute(job: JobConfig, out_override: str | None = None,
            jobs: int | None = None) -> int:
    """Run a parsed job, writing artifacts to its output directory."""
    outdir = Path(out_override or job.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    runio.write_json(outdir / "config.json", job.descriptor())
    nl = job.build_nonlinearity()

    if job.command == "simulate":
        run, _ = _simulate_one(job, outdir)
        return 2 if run.termination is Termination.BLOWUP else 0

    if job.command == "semiwave":
        result = semiwave.c_star(nl, job.mu)
        runio.write_semiwave_artifacts(result, outdir)
        return 0

    if job.command == "threshold":
        result = classify.sigma_star(
            nl, job.mu, job.h0, job.initial, job.threshold_tol,
            job.threshold_budget, t_max=job.threshold_t_max,
            N=job.threshold_N, snapshot_every=job.threshold_snapshot_every,
            dt_safety=job.dt_safety)
        runio.write_threshold_artifacts(result, outdir)
        return 0

    # sweep
    points = job.sweep_jobs()
    tasks = [(job, str(outdir), i, m, s, h)
             for i, (m, s, h) in enumerate(points)]
    nworkers = jobs or os.cpu_count() or 1
    if nworkers > 1 and len(tasks) > 1:
        with multiprocessing.get_context("fork").Pool(nworkers) as pool:
            rows = pool.map(_sweep_worker, tasks)
    else:
        rows = [_sweep_worker(t) for t in tasks]
    rows.sort()
    lines = ["index,mu,sigma,h0,verdict,c_hat,max_u,final_span"]
    any_blowup = False
    for index, mu, sigma, h0, outcome, c_hat, max_u, span, blown in rows:
        any_blowup = any_blowup or blown
        lines.append(f"{index},{mu:.17g},{sigma:.17g},{h0:.17g},{outcome},"
                     f"{c_hat},{max_u:.17g},{span:.17g}")
    (outdir / "summary.csv").write_text("\n".join(lines) + "\n")
    return 2 if any_blowup else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stefan-front",
        description="Free-boundary reaction-diffusion runs, semi-wave speeds, "
                    "and sharp-threshold searches.")
    parser.add_argument("command", choices=("simulate", "semiwave",
                                            "threshold", "sweep"))
    parser.add_argument("--config", required=True, help="JSON job config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--jobs", type=int, default=None,
                        help="sweep worker count (default: CPU count)")
    args = parser.parse_args(argv)
    try:
        job = parse_config(args.config)
        if job.command != args.command:
            raise ParseError(
                f"config command {job.command!r} does not match CLI "
                f"command {args.command!r}")
        return execute(job, out_override=args.out, jobs=args.jobs)
    except (BlowupError, MonotoneViolation) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except StefanFrontError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
