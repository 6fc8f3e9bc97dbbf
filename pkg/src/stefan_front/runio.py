"""Deterministic artifact writers: CSV data files and JSON reports.

Data files carry no timestamps, so identical configurations reproduce
byte-identical CSVs.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .classify import ThresholdResult, Verdict
from .semiwave import SemiWaveResult
from .solver import Run

_FMT = "%.17g"


def _write_csv(path: Path, header: str, rows: np.ndarray):
    np.savetxt(path, np.atleast_2d(rows), fmt=_FMT, delimiter=",",
               header=header, comments="")


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               allow_nan=False) + "\n")


def export_profile(path: Path, first: np.ndarray, second: np.ndarray,
                   header: str = "z,q"):
    """Two-column CSV export for wave and stationary profiles."""
    _write_csv(Path(path), header, np.column_stack([first, second]))


def write_run_artifacts(run: Run, outdir: Path, verdict: Verdict | None = None,
                        emit_plot_data: bool = False):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(outdir / "fronts.csv", "t,g,h,gprime,hprime", run.fronts)

    rows = []
    for s in run.snapshots:
        x = s.x
        for j in range(len(s.U)):
            rows.append((s.t, s.y[j], x[j], s.U[j]))
    _write_csv(outdir / "snapshots.csv", "t,y,x,u", np.asarray(rows))

    report = {
        "config_hash": run.config_hash,
        "config": run.config.descriptor(),
        "termination": run.termination.value,
        "t_final": run.t_final,
        "warnings": run.warnings,
        "checks": {k: (None if not math.isfinite(v) else v)
                   for k, v in run.checks.items()},
        "certificate": run.certificate.descriptor() if run.certificate else None,
    }
    write_json(outdir / "report.json", report)
    if verdict is not None:
        write_json(outdir / "verdict.json", verdict.descriptor())
    if emit_plot_data:
        fr = run.fronts
        keep = fr[:, 0] > 0.0 if len(fr) else np.zeros(0, dtype=bool)
        if keep.any():
            # thin to ~2000 rows; the full history stays in fronts.csv
            idx = np.unique(np.linspace(0, keep.sum() - 1, 2000).astype(int))
            sub = fr[keep][idx]
            rows = np.column_stack([sub[:, 0], sub[:, 2] / sub[:, 0],
                                    -sub[:, 1] / sub[:, 0]])
            _write_csv(outdir / "front_speed.csv", "t,h_over_t,neg_g_over_t",
                       rows)
        else:
            (outdir / "front_speed.csv").write_text("t,h_over_t,neg_g_over_t\n")


def write_semiwave_artifacts(result: SemiWaveResult, outdir: Path):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "semiwave.json", result.summary())
    export_profile(outdir / "semiwave_profile.csv", result.z, result.q)


def write_threshold_artifacts(result: ThresholdResult, outdir: Path):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "threshold.json", result.descriptor())
