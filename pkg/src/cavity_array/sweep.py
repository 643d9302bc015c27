"""Parameter sweeps: config parsing, task dispatch, CSV datasets and run manifests.

A config is an INI file::

    [params]
    delta = 0          ; emitter-cavity detuning, units of g
    J = 0.5
    gamma_a = 0.1
    gamma_sigma = 0.01
    P_sigma = 5

    [lattice]
    N = 12
    m = 1

    [sweep]
    P_sigma = logspace(-1, 2, 31)
    J = 0.5, 10

    [task]
    name = steady

    [solver]
    cutoff = 25

Sweep values are comma lists or ``linspace(a, b, n)``, ``logspace(a, b, n)``
(base-10 exponents), ``geomspace(a, b, n)`` and ``range(a, b, step)``. Axes
form a Cartesian product in file order with the last axis varying fastest.
``delta_over_J`` sets the detuning in units of the tunneling rate.
"""

from concurrent.futures import ProcessPoolExecutor
import configparser
from dataclasses import dataclass, field
import hashlib
import itertools
import json
import math
import os
from pathlib import Path
import re
import time

import numpy as np

from . import __version__
from .correlations import analytic_decay_1d, correlation_profile, fit_decay, regime_estimates
from .exceptions import CavityArrayError, ConfigError
from .model import LatticeSpec, ModelParams
from .oracle import solve_oracle
from .spectrum import detector_spectrum, multimode_drive
from .steady import lasing_benchmarks, solve

__all__ = ["SweepConfig", "RunManifest", "TASKS", "COLUMNS", "load_config",
           "parse_config", "sweep_points", "run", "read_csv", "format_value"]

TASKS = ("steady", "correlations", "fit", "analytic", "oracle", "spectrum",
         "figure2", "figure3")

PARAM_NAMES = ("delta", "J", "gamma_a", "gamma_sigma", "P_sigma", "gamma_phi", "g")
LATTICE_NAMES = ("N", "m")
AXIS_NAMES = PARAM_NAMES + LATTICE_NAMES + ("delta_over_J",)

PREFIX = ["point", "N", "m", "delta[g]", "J[g]", "gamma_a[g]", "gamma_sigma[g]",
          "P_sigma[g]", "gamma_phi[g]"]

_STEADY = ["n_a", "n_sigma", "F[g]", "F_tilde[g]", "delta_sq[g^2]", "residual[g]",
           "n_a_L", "validated_regime"]
_FIT = ["n_a", "n_sigma", "c1", "c2", "nu[1/site]", "lambda_fit[1/site]",
        "rms_residual", "window_end", "fragile", "lambda_analytic[1/site]",
        "q_analytic[1/site]"]

COLUMNS = {
    "steady": PREFIX + _STEADY + ["status"],
    "correlations": PREFIX + ["n_a", "x", "C"] + ["status"],
    "fit": PREFIX + _FIT + ["status"],
    "analytic": PREFIX + ["n_sigma", "u_re", "u_im", "lambda[1/site]", "q[1/site]",
                          "critical", "lambda_bulk[1/site]", "lambda_edge[1/site]"] + ["status"],
    "oracle": PREFIX + ["cutoff", "bond_convention", "n_a", "n_sigma", "g2", "cross_re",
                        "cross_im", "mean_field_abs", "leakage", "cutoff_sufficient",
                        "n_a_rate", "rel_dev"] + ["status"],
    "spectrum": PREFIX + ["n_a", "omega[g]", "S", "S_raw", "settled"] + ["status"],
    "figure2": PREFIX + _STEADY + ["status"],
    "figure2_modes": PREFIX + ["mode", "k[rad]", "omega_k[g]", "n_k"] + ["status"],
    "figure3": PREFIX + _FIT + ["status"],
}

SOLVER_DEFAULTS = {
    "xtol": 0.0,
    "cutoff": None,
    "min_cutoff": 0,
    "convention": "bloch",
    "gamma_d": 0.3,
    "epsilon": 1e-3,
    "omega_min": -25.0,
    "omega_max": 25.0,
    "omega_points": 601,
    "oracle_method": "auto",
}


@dataclass
class SweepConfig:
    """A parsed sweep: base parameters, lattice, axes, task and options."""

    base: ModelParams
    lattice: LatticeSpec
    axes: list
    task: str
    out_dir: Path = Path("out")
    solver: dict = field(default_factory=dict)
    workers: int = 1
    plots: bool = True
    echo: dict = field(default_factory=dict)

    def options(self):
        opts = dict(SOLVER_DEFAULTS)
        opts.update(self.solver)
        return opts


@dataclass
class RunManifest:
    config: dict
    version: str
    task: str
    rows: dict
    files: list
    wall_time: float
    conventions: dict
    warnings: list
    failures: list

    def to_dict(self):
        return {
            "config": self.config,
            "version": self.version,
            "task": self.task,
            "rows": self.rows,
            "files": self.files,
            "wall_time_s": self.wall_time,
            "conventions": self.conventions,
            "warnings": self.warnings,
            "failures": self.failures,
        }

    def write(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# config parsing

_FUNC = re.compile(r"^(linspace|logspace|geomspace|range)\s*\((.*)\)$")


def _line_of(text, section, key):
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", stripped, re.I):
            return lineno
    return None


def _fail(text, section, key, message):
    line = _line_of(text, section, key) if key else None
    where = f"line {line}, " if line else ""
    raise ConfigError(f"{where}[{section}] {key or ''}: {message}".rstrip(": "))


def parse_values(spec):
    """Parse a sweep value expression into a list of floats."""
    spec = spec.strip()
    m = _FUNC.match(spec)
    if m:
        name, body = m.groups()
        args = [float(a) for a in body.split(",")]
        if name == "range":
            if len(args) != 3 or args[2] == 0:
                raise ValueError("range needs (start, stop, nonzero step)")
            values = list(np.arange(*args))
        else:
            if len(args) != 3 or int(args[2]) != args[2] or args[2] < 1:
                raise ValueError(f"{name} needs (start, stop, count)")
            values = list(getattr(np, name)(args[0], args[1], int(args[2])))
    else:
        values = [float(v) for v in spec.split(",") if v.strip()]
    if not values:
        raise ValueError("empty value list")
    return [float(v) for v in values]


def parse_config(text, out_dir=None):
    """Build a :class:`SweepConfig` from INI text.

    Raises
    ------
    ConfigError
        With the offending line and field on any schema violation.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    known = {"params", "lattice", "sweep", "task", "solver", "output"}
    for section in cp.sections():
        if section not in known:
            _fail(text, section, None, f"unknown section (expected one of {sorted(known)})")

    params = {}
    if cp.has_section("params"):
        for key, value in cp.items("params"):
            if key not in PARAM_NAMES + ("omega_sigma", "omega_a"):
                _fail(text, "params", key, "unknown parameter")
            try:
                params[key] = float(value)
            except ValueError:
                _fail(text, "params", key, f"not a number: {value!r}")
    delta = params.pop("delta", None)
    try:
        base = ModelParams(**params)
        if delta is not None:
            base = base.replace(delta=delta)
    except (TypeError, CavityArrayError) as exc:
        raise ConfigError(f"[params]: {exc}") from exc

    lat = {}
    if cp.has_section("lattice"):
        for key, value in cp.items("lattice"):
            if key not in LATTICE_NAMES:
                _fail(text, "lattice", key, "unknown field")
            try:
                lat[key] = int(value)
            except ValueError:
                _fail(text, "lattice", key, f"not an integer: {value!r}")
    try:
        lattice = LatticeSpec(**lat)
    except CavityArrayError as exc:
        raise ConfigError(f"[lattice]: {exc}") from exc

    axes = []
    if cp.has_section("sweep"):
        for key, value in cp.items("sweep"):
            if key not in AXIS_NAMES:
                _fail(text, "sweep", key, "sweep axis does not name a parameter")
            try:
                axes.append((key, parse_values(value)))
            except ValueError as exc:
                _fail(text, "sweep", key, str(exc))

    if not cp.has_option("task", "name"):
        raise ConfigError("[task] name: missing (one of " + ", ".join(TASKS) + ")")
    task = cp.get("task", "name").strip()
    if task not in TASKS:
        _fail(text, "task", "name", f"unknown task {task!r}")

    solver = {}
    if cp.has_section("solver"):
        for key, value in cp.items("solver"):
            lk = key.lower()
            if lk not in SOLVER_DEFAULTS:
                _fail(text, "solver", key, "unknown solver option")
            if lk in ("convention", "oracle_method"):
                solver[lk] = value.strip()
            else:
                try:
                    solver[lk] = int(value) if lk in ("cutoff", "min_cutoff", "omega_points") else float(value)
                except ValueError:
                    _fail(text, "solver", key, f"not a number: {value!r}")

    workers, plots = 1, True
    out = out_dir
    if cp.has_section("output"):
        for key, value in cp.items("output"):
            if key == "dir":
                out = out or value.strip()
            elif key == "workers":
                try:
                    workers = int(value)
                except ValueError:
                    _fail(text, "output", key, f"not an integer: {value!r}")
            elif key == "plots":
                plots = value.strip().lower() in ("1", "true", "yes", "on")
            else:
                _fail(text, "output", key, "unknown output option")
    for key in cp.options("task"):
        if key != "name":
            _fail(text, "task", key, "unknown task option")

    echo = {s: dict(cp.items(s)) for s in cp.sections()}
    return SweepConfig(base=base, lattice=lattice, axes=axes, task=task,
                       out_dir=Path(out or "out"), solver=solver, workers=workers,
                       plots=plots, echo=echo)


def load_config(path, out_dir=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, out_dir=out_dir)


def sweep_points(config):
    """All ``(ModelParams, LatticeSpec)`` points of the Cartesian sweep, in order."""
    names = [name for name, _ in config.axes]
    grids = [values for _, values in config.axes]
    points = []
    for combo in itertools.product(*grids):
        values = dict(zip(names, combo))
        lat = {"N": config.lattice.N, "m": config.lattice.m}
        for key in LATTICE_NAMES:
            if key in values:
                lat[key] = int(round(values.pop(key)))
        ratio = values.pop("delta_over_J", None)
        params = config.base.replace(**values)
        if ratio is not None:
            params = params.replace(delta=ratio * params.J)
        points.append((params, LatticeSpec(**lat)))
    return points


# ---------------------------------------------------------------------------
# tasks; each returns (rows per table, warnings)

def _prefix(index, params, lattice):
    return {"point": index, "N": lattice.N, "m": lattice.m, "delta[g]": params.delta,
            "J[g]": params.J, "gamma_a[g]": params.gamma_a,
            "gamma_sigma[g]": params.gamma_sigma, "P_sigma[g]": params.P_sigma,
            "gamma_phi[g]": params.gamma_phi}


def _steady_fields(state):
    p = state.params
    return {"n_a": state.n_a, "n_sigma": state.n_sigma, "F[g]": state.F,
            "F_tilde[g]": state.F_tilde, "delta_sq[g^2]": state.delta_sq,
            "residual[g]": state.residual, "n_a_L": lasing_benchmarks(p).n_a_L,
            "validated_regime": state.validated_regime}


def _regime_warning(state):
    if not state.validated_regime:
        p = state.params
        return [f"P_sigma={p.P_sigma} is not above gamma_a, gamma_sigma: "
                "outside the validated rate-equation regime"]
    return []


def _task_steady(params, lattice, opts):
    state = solve(params, lattice, xtol=opts["xtol"])
    return {"main": [_steady_fields(state)]}, _regime_warning(state)


def _task_figure2(params, lattice, opts):
    state = solve(params, lattice, xtol=opts["xtol"])
    spec = state.spectrum
    modes = [{"mode": i, "k[rad]": float(spec.k[i, 0]), "omega_k[g]": float(spec.omega_k[i]),
              "n_k": float(state.n_k[i])} for i in range(spec.n_modes)]
    return {"main": [_steady_fields(state)], "modes": modes}, _regime_warning(state)


def _task_correlations(params, lattice, opts):
    state = solve(params, lattice, xtol=opts["xtol"])
    prof = correlation_profile(state)
    N, m = lattice.N, lattice.m
    rows = []
    for x in range(0, N // 2 + 1):
        r = (x,) + (0,) * (m - 1)
        rows.append({"n_a": state.n_a, "x": x, "C": float(prof.at(*r))})
    return {"main": rows}, _regime_warning(state)


def _task_fit(params, lattice, opts):
    state = solve(params, lattice, xtol=opts["xtol"])
    fit = fit_decay(correlation_profile(state))
    lam_a = q_a = math.nan
    if params.J > 0 and state.delta_sq > 0:
        dec = analytic_decay_1d(params, state.n_sigma)
        lam_a, q_a = dec.lam, abs(dec.q)
    warnings = _regime_warning(state)
    if fit.fragile:
        warnings.append("fragile fit: correlations vanish within 3 sites")
    row = {"n_a": state.n_a, "n_sigma": state.n_sigma, "c1": fit.c1, "c2": fit.c2,
           "nu[1/site]": fit.nu, "lambda_fit[1/site]": fit.lam,
           "rms_residual": fit.rms_residual, "window_end": fit.fit_window[1],
           "fragile": fit.fragile, "lambda_analytic[1/site]": lam_a,
           "q_analytic[1/site]": q_a}
    return {"main": [row]}, warnings


def _task_analytic(params, lattice, opts):
    state = solve(params, lattice, xtol=opts["xtol"])
    dec = analytic_decay_1d(params, state.n_sigma)
    est = regime_estimates(params, state.n_sigma)
    warnings = ["critical: vanishing decay rate"] if dec.critical else []
    row = {"n_sigma": state.n_sigma, "u_re": dec.u.real, "u_im": dec.u.imag,
           "lambda[1/site]": dec.lam, "q[1/site]": dec.q, "critical": dec.critical,
           "lambda_bulk[1/site]": est.lambda_bulk, "lambda_edge[1/site]": est.lambda_edge}
    return {"main": [row]}, warnings


def _task_oracle(params, lattice, opts):
    if lattice.m != 1:
        raise CavityArrayError("the exact solver is one-dimensional")
    rate = solve(params, lattice, xtol=opts["xtol"])
    res = solve_oracle(params, N=lattice.N, cutoff=opts["cutoff"],
                       convention=opts["convention"], method=opts["oracle_method"],
                       min_cutoff=opts["min_cutoff"])
    cutoff = res.trunc.cutoff
    warnings = []
    if not res.cutoff_sufficient:
        warnings.append(f"cutoff {cutoff} leaks {res.leakage:.2e} into the top Fock level")
    n_a = float(res.n_a[0])
    cross = res.cross_coherence
    row = {"cutoff": cutoff, "bond_convention": res.bond_convention, "n_a": n_a,
           "n_sigma": float(res.n_sigma[0]), "g2": res.g2[0],
           "cross_re": None if cross is None else cross.real,
           "cross_im": None if cross is None else cross.imag,
           "mean_field_abs": float(np.abs(res.mean_field).max()),
           "leakage": res.leakage, "cutoff_sufficient": res.cutoff_sufficient,
           "n_a_rate": rate.n_a,
           "rel_dev": (rate.n_a - n_a) / n_a if n_a > 0 else math.nan}
    return {"main": [row]}, warnings


def _task_spectrum(params, lattice, opts):
    state = solve(params, lattice, xtol=opts["xtol"])
    drive = multimode_drive(state)
    grid = np.linspace(opts["omega_min"], opts["omega_max"], int(opts["omega_points"]))
    res = detector_spectrum(params, drive, grid, Gamma_d=opts["gamma_d"], epsilon=opts["epsilon"])
    warnings = []
    if not res.settled.all():
        warnings.append(f"{int((~res.settled).sum())} detector frequencies did not settle")
    rows = [{"n_a": state.n_a, "omega[g]": float(w), "S": float(s), "S_raw": float(r),
             "settled": bool(ok)}
            for w, s, r, ok in zip(res.omega_grid, res.S, res.S_raw, res.settled)]
    return {"main": rows}, warnings


_DISPATCH = {
    "steady": _task_steady,
    "correlations": _task_correlations,
    "fit": _task_fit,
    "analytic": _task_analytic,
    "oracle": _task_oracle,
    "spectrum": _task_spectrum,
    "figure2": _task_figure2,
    "figure3": _task_fit,
}


def _run_point(job):
    task, index, params, lattice, opts = job
    try:
        tables, warnings = _DISPATCH[task](params, lattice, opts)
        return index, tables, warnings, None
    except (CavityArrayError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return index, None, [], f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------------------
# output

def format_value(value):
    """Fixed textual form of a CSV cell (17 significant digits for floats)."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.16e}"
    return str(value)


def _write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row.get(c)) for c in columns))
    data = ("\n".join(lines) + "\n").encode("ascii")
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_csv(path):
    """Read a dataset back as ``(columns, rows)`` with rows as string dicts."""
    text = Path(path).read_text().splitlines()
    if not text:
        return [], []
    columns = text[0].split(",")
    rows = [dict(zip(columns, line.split(","))) for line in text[1:] if line]
    return columns, rows


def _worker_count(requested):
    env = os.environ.get("SIMULATE_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, int(requested or 1))


def run(config, workers=None, emit=True):
    """Execute a sweep and write its CSV tables and ``manifest.json``.

    Failed points become rows holding only the parameter prefix and a
    ``status`` message; they are listed in the manifest and never abort the
    sweep. Rows are ordered by sweep index regardless of completion order.

    Returns
    -------
    RunManifest
    """
    start = time.perf_counter()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = config.options()
    points = sweep_points(config)
    jobs = [(config.task, i, p, lat, opts) for i, (p, lat) in enumerate(points)]

    n_workers = _worker_count(workers if workers is not None else config.workers)
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    tables = {"main": [], "modes": []}
    warnings, failures = [], []
    for index, point_tables, point_warnings, error in results:
        params, lattice = points[index]
        prefix = _prefix(index, params, lattice)
        for w in point_warnings:
            warnings.append({"point": index, "message": w})
        if error is not None:
            failures.append({"point": index, "error": error})
            tables["main"].append(dict(prefix, status=error.replace(",", ";")))
            continue
        for name, rows in point_tables.items():
            for row in rows:
                tables[name].append(dict(prefix, **row, status="ok"))

    files, counts = [], {}
    names = {"main": config.task}
    if config.task == "figure2":
        names["modes"] = "figure2_modes"
    for key, table_name in names.items():
        path = out / f"{table_name}.csv"
        digest = _write_csv(path, COLUMNS[table_name], tables[key])
        files.append({"path": path.name, "sha256": digest, "rows": len(tables[key])})
        counts[table_name] = len(tables[key])

    if emit and config.plots and tables["main"]:
        from .plots import emit_plots, plot_kinds_for_task
        for kind in plot_kinds_for_task(config.task):
            try:
                for plot_path in emit_plots(out / f"{config.task}.csv", kind, out):
                    data = Path(plot_path).read_bytes()
                    files.append({"path": Path(plot_path).name,
                                  "sha256": hashlib.sha256(data).hexdigest(), "rows": None})
            except ValueError as exc:
                warnings.append({"point": None, "message": f"plot {kind}: {exc}"})

    manifest = RunManifest(
        config=config.echo or _echo(config),
        version=__version__,
        task=config.task,
        rows=counts,
        files=files,
        wall_time=time.perf_counter() - start,
        conventions={
            "units": "all rates and frequencies in units of g; omega_a = 0",
            "bond_convention": opts["convention"],
            "spectrum_normalization": "peak",
            "csv_float_format": "%.16e",
            "momentum_order": "lexicographic in grid index, last axis fastest",
        },
        warnings=warnings,
        failures=failures,
    )
    manifest.write(out / "manifest.json")
    return manifest


def _echo(config):
    p = config.base
    return {
        "params": {"delta": p.delta, "J": p.J, "gamma_a": p.gamma_a,
                   "gamma_sigma": p.gamma_sigma, "P_sigma": p.P_sigma,
                   "gamma_phi": p.gamma_phi, "g": p.g},
        "lattice": {"N": config.lattice.N, "m": config.lattice.m},
        "sweep": {name: list(values) for name, values in config.axes},
        "task": {"name": config.task},
        "solver": dict(config.solver),
    }
