"""Strict job configuration: JSON in, validated JobConfig out.

Unknown keys are errors; every accepted knob has an explicit default so a
config echo reproduces the run exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError
from .nonlinearity import Nonlinearity, catalog
from .solver import InitialData, SolverTolerances

COMMANDS = ("simulate", "semiwave", "threshold", "sweep")

_NL_KEYS = {"name", "theta", "delta0", "coeffs", "u_cap", "grid_n"}
_INITIAL_KEYS = {"family", "sigma", "values"}
_TOL_KEYS = {"blowup_factor", "vanish_stop", "sign_tol", "check_tol",
             "overshoot_tol"}
_SOLVER_KEYS = {"mu", "h0", "t_max", "N", "dt_safety", "snapshot_every",
                "initial", "tolerances", "certify"}
_CLASSIFIER_KEYS = {"spread_tol", "vanish_tol", "trans_tol"}
_THRESHOLD_KEYS = {"tol", "budget", "t_max", "N", "snapshot_every"}
_SWEEP_KEYS = {"mu", "sigma", "h0"}
_TOP_KEYS = {"command", "nonlinearity", "solver", "classifier", "threshold",
             "sweep", "output_dir", "emit_plot_data"}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ParseError(f"unknown key {sorted(unknown)[0]!r} in {where}")


def _number(section: dict, key: str, default, where: str, lo=None, hi=None):
    val = section.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParseError(f"{where}.{key} must be a number, got {val!r}")
    val = float(val)
    if lo is not None and val < lo:
        raise ParseError(f"{where}.{key} must be >= {lo}, got {val}")
    if hi is not None and val > hi:
        raise ParseError(f"{where}.{key} must be <= {hi}, got {val}")
    return val


@dataclass
class JobConfig:
    command: str
    nl_spec: dict
    mu: float = 1.0
    h0: float = 1.0
    t_max: float = 50.0
    N: int = 401
    dt_safety: float = 0.4
    snapshot_every: float = 0.25
    initial: InitialData = field(default_factory=InitialData)
    tolerances: SolverTolerances = field(default_factory=SolverTolerances)
    certify: bool = True
    spread_tol: float = 1e-2
    vanish_tol: float = 1e-4
    trans_tol: float = 5e-2
    threshold_tol: float = 0.01
    threshold_budget: int = 30
    threshold_t_max: float = 150.0
    threshold_N: int = 201
    threshold_snapshot_every: float = 1.0
    sweep_mu: tuple = ()
    sweep_sigma: tuple = ()
    sweep_h0: tuple = ()
    output_dir: str = "out"
    emit_plot_data: bool = False

    def build_nonlinearity(self) -> Nonlinearity:
        spec = self.nl_spec
        return catalog(spec["name"], theta=spec.get("theta"),
                       coeffs=spec.get("coeffs"),
                       u_cap=spec.get("u_cap", 3.0),
                       grid_n=int(spec.get("grid_n", 513)))

    def sweep_jobs(self) -> list[tuple[float, float, float]]:
        return [(m, s, h) for m in self.sweep_mu for s in self.sweep_sigma
                for h in self.sweep_h0]

    def descriptor(self) -> dict:
        d = {
            "command": self.command,
            "nonlinearity": dict(self.nl_spec),
            "solver": {
                "mu": self.mu, "h0": self.h0, "t_max": self.t_max,
                "N": self.N, "dt_safety": self.dt_safety,
                "snapshot_every": self.snapshot_every,
                "initial": {"family": self.initial.family,
                            "sigma": self.initial.sigma,
                            **({"values": list(self.initial.values)}
                               if self.initial.values is not None else {})},
                "tolerances": vars(self.tolerances).copy(),
                "certify": self.certify,
            },
            "classifier": {"spread_tol": self.spread_tol,
                           "vanish_tol": self.vanish_tol,
                           "trans_tol": self.trans_tol},
            "output_dir": self.output_dir,
            "emit_plot_data": self.emit_plot_data,
        }
        if self.command == "threshold":
            d["threshold"] = {"tol": self.threshold_tol,
                              "budget": self.threshold_budget,
                              "t_max": self.threshold_t_max,
                              "N": self.threshold_N,
                              "snapshot_every": self.threshold_snapshot_every}
        if self.command == "sweep":
            d["sweep"] = {"mu": list(self.sweep_mu),
                          "sigma": list(self.sweep_sigma),
                          "h0": list(self.sweep_h0)}
        return d


def _parse_nl(section) -> dict:
    if not isinstance(section, dict):
        raise ParseError("nonlinearity must be an object")
    _check_keys(section, _NL_KEYS, "nonlinearity")
    name = section.get("name")
    if name not in ("logistic", "cubic_bistable", "combustion", "custom"):
        raise ParseError(f"nonlinearity.name must name a catalog entry, got {name!r}")
    theta = _number(section, "theta", None, "nonlinearity")
    if name in ("cubic_bistable", "combustion"):
        if theta is None:
            raise ParseError(f"nonlinearity {name!r} requires theta")
        if not 0.0 < theta < 1.0:
            raise ParseError(f"nonlinearity.theta must lie in (0, 1), got {theta}")
    if name == "custom" and not isinstance(section.get("coeffs"), list):
        raise ParseError("nonlinearity 'custom' requires a coeffs list")
    out = {"name": name}
    for key in ("theta", "delta0", "u_cap", "grid_n", "coeffs"):
        if key in section:
            out[key] = section[key]
    return out


def _parse_initial(section) -> InitialData:
    _check_keys(section, _INITIAL_KEYS, "solver.initial")
    family = section.get("family", "cosine")
    if family not in ("cosine", "quad", "samples"):
        raise ParseError(f"solver.initial.family must be cosine/quad/samples, "
                         f"got {family!r}")
    sigma = _number(section, "sigma", 1.0, "solver.initial", lo=0.0)
    values = section.get("values")
    if values is not None:
        if not isinstance(values, list):
            raise ParseError("solver.initial.values must be a list")
        values = tuple(float(v) for v in values)
    return InitialData(family=family, sigma=sigma, values=values)


def parse_config(path: str | Path) -> JobConfig:
    """Load and validate a job configuration file (strict schema)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})")
    if not isinstance(raw, dict):
        raise ParseError("top-level config must be an object")
    _check_keys(raw, _TOP_KEYS, "top level")

    command = raw.get("command")
    if command not in COMMANDS:
        raise ParseError(f"command must be one of {COMMANDS}, got {command!r}")
    if "nonlinearity" not in raw:
        raise ParseError("missing required section 'nonlinearity'")
    job = JobConfig(command=command, nl_spec=_parse_nl(raw["nonlinearity"]))

    solver = raw.get("solver", {})
    if not isinstance(solver, dict):
        raise ParseError("solver must be an object")
    _check_keys(solver, _SOLVER_KEYS, "solver")
    job.mu = _number(solver, "mu", job.mu, "solver", lo=1e-12)
    job.h0 = _number(solver, "h0", job.h0, "solver", lo=1e-12)
    job.t_max = _number(solver, "t_max", job.t_max, "solver", lo=1e-12)
    N = solver.get("N", job.N)
    if not isinstance(N, int) or N < 5 or N % 2 == 0:
        raise ParseError(f"solver.N must be an odd integer >= 5, got {N!r}")
    job.N = N
    job.dt_safety = _number(solver, "dt_safety", job.dt_safety, "solver",
                            lo=1e-6, hi=1.0)
    job.snapshot_every = _number(solver, "snapshot_every", job.snapshot_every,
                                 "solver", lo=1e-12)
    if "initial" in solver:
        job.initial = _parse_initial(solver["initial"])
    if "tolerances" in solver:
        tols = solver["tolerances"]
        _check_keys(tols, _TOL_KEYS, "solver.tolerances")
        job.tolerances = SolverTolerances(**{
            k: _number(tols, k, getattr(SolverTolerances(), k),
                       "solver.tolerances", lo=0.0)
            for k in _TOL_KEYS if k in tols})
    certify = solver.get("certify", True)
    if not isinstance(certify, bool):
        raise ParseError(f"solver.certify must be a boolean, got {certify!r}")
    job.certify = certify

    cls = raw.get("classifier", {})
    _check_keys(cls, _CLASSIFIER_KEYS, "classifier")
    job.spread_tol = _number(cls, "spread_tol", job.spread_tol, "classifier", lo=0.0)
    job.vanish_tol = _number(cls, "vanish_tol", job.vanish_tol, "classifier", lo=0.0)
    job.trans_tol = _number(cls, "trans_tol", job.trans_tol, "classifier", lo=0.0)

    thr = raw.get("threshold", {})
    _check_keys(thr, _THRESHOLD_KEYS, "threshold")
    job.threshold_tol = _number(thr, "tol", job.threshold_tol, "threshold", lo=0.0)
    budget = thr.get("budget", job.threshold_budget)
    if not isinstance(budget, int) or budget < 1:
        raise ParseError(f"threshold.budget must be a positive integer, got {budget!r}")
    job.threshold_budget = budget
    job.threshold_t_max = _number(thr, "t_max", job.threshold_t_max,
                                  "threshold", lo=1e-12)
    thr_n = thr.get("N", job.threshold_N)
    if not isinstance(thr_n, int) or thr_n < 5 or thr_n % 2 == 0:
        raise ParseError(f"threshold.N must be an odd integer >= 5, got {thr_n!r}")
    job.threshold_N = thr_n
    job.threshold_snapshot_every = _number(
        thr, "snapshot_every", job.threshold_snapshot_every, "threshold", lo=1e-12)

    if command == "sweep":
        sweep = raw.get("sweep")
        if not isinstance(sweep, dict):
            raise ParseError("sweep command requires a sweep section")
        _check_keys(sweep, _SWEEP_KEYS, "sweep")
        for axis in ("mu", "sigma", "h0"):
            vals = sweep.get(axis)
            if not isinstance(vals, list) or not vals:
                raise ParseError(f"sweep.{axis} must be a non-empty list")
            setattr(job, f"sweep_{axis}",
                    tuple(float(v) for v in vals))
    elif "sweep" in raw:
        raise ParseError("sweep section is only valid for the sweep command")

    outdir = raw.get("output_dir", job.output_dir)
    if not isinstance(outdir, str):
        raise ParseError(f"output_dir must be a string, got {outdir!r}")
    job.output_dir = outdir
    emit = raw.get("emit_plot_data", False)
    if not isinstance(emit, bool):
        raise ParseError(f"emit_plot_data must be a boolean, got {emit!r}")
    job.emit_plot_data = emit
    return job
