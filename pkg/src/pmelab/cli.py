"""Command-line front end: ``pmelab {green,meanvalue,solve,verify} --config run.toml``.

A run is described by one TOML file with the sections ``manifold``,
``problem``, ``solver``, ``green``, ``meanvalue`` and ``output``.  Unknown keys
and type mismatches are errors; all of them are collected and reported
together before anything is computed.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 a verification check failed.
"""
import argparse
from dataclasses import dataclass, field, fields
import json
import os
import re
import sys
import tempfile

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import NotNonparabolicError, PmeLabError
from .green import ball_green, green_upper_bound_check, level_radius, whole_green
from .manifold import ManifoldProfile, check_hypothesis
from .potential import (RadialField, RadialMeasure, audit_M_monotonicity, mean_value_M,
                        mean_value_m, potential)
from .solver import SolverConfig, solve_ball, solve_cauchy
from .verify import SUITES, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3
KINDS = ("euclidean", "hyperbolic", "exponential_power", "tabulated")

_NUM = (int, float)
_SCHEMA = {
    "manifold": {"kind": str, "N": int, "a": _NUM, "table": str},
    "problem": {"m": _NUM, "atom": _NUM, "shells": list, "R": (list, *_NUM), "eps": (list, *_NUM),
                "require_hypothesis": bool},
    "solver": {f.name: f.type for f in fields(SolverConfig) if f.name != "m"},
    "green": {"R": _NUM, "r_min": _NUM, "r_max": _NUM, "samples": int},
    "meanvalue": {"alpha": _NUM, "r_min": _NUM, "r_max": _NUM, "samples": int, "field": str},
    "output": {"directory": str, "snapshot_stride": int, "formats": list},
}
_TYPE_NAMES = {str: "string", int: "integer", float: "number", bool: "boolean", list: "array",
               tuple: "array"}


class ConfigError(PmeLabError):
    """Configuration problems; ``errors`` lists every message found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    """Validated contents of a configuration file."""

    profile: ManifoldProfile = None
    m: float = 2.0
    measure: RadialMeasure = None
    R_schedule: list = field(default_factory=lambda: [8.0])
    eps_schedule: list = field(default_factory=lambda: [0.02])
    require_hypothesis: bool = True
    solver: SolverConfig = None
    green: dict = field(default_factory=dict)
    meanvalue: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: str = ""


# ---------------------------------------------------------------------- parsing
def _line_of(text, section, key):
    """Line number of ``key = ...`` inside ``[section]`` (0 when not found)."""
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        head = re.match(r"\[\s*([A-Za-z_]+)\s*\]", stripped)
        if head:
            current = head.group(1)
        elif current == section and re.match(rf"{re.escape(key)}\s*=", stripped):
            return n
    return 0


def _type_ok(value, expected):
    expected = expected if isinstance(expected, tuple) else (expected,)
    if isinstance(value, bool) and bool not in expected:
        return False
    if value is None:
        return False
    if float in expected and isinstance(value, int):
        return True
    return isinstance(value, expected) or (tuple in expected and isinstance(value, list))


def _expected_name(expected):
    expected = expected if isinstance(expected, tuple) else (expected,)
    names = sorted({_TYPE_NAMES.get(t, t.__name__) for t in expected})
    return " or ".join(names)


def _schedule(value):
    return [float(v) for v in value] if isinstance(value, list) else [float(value)]


def parse_config(path):
    """Read and validate a TOML run configuration.

    Returns a :class:`RunConfig`; raises :class:`ConfigError` carrying every
    problem found (unknown sections or keys, wrong types with their line
    numbers, out-of-range values, missing files).
    """
    try:
        with open(path, "rb") as fh:
            raw_bytes = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from None
    text = raw_bytes.decode("utf-8", errors="replace")
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None
    return config_from_dict(raw, text=text, base=os.path.dirname(os.path.abspath(path)), source=str(path))


def config_from_dict(raw, text="", base=".", source=""):
    """Validate an already-parsed mapping (the body of :func:`parse_config`)."""
    errors = []

    def err(section, key, msg):
        line = _line_of(text, section, key) if key else 0
        where = f"line {line}: " if line else ""
        errors.append(f"{where}{section}{'.' + key if key else ''}: {msg}")

    # keys that fail the schema are reported and dropped, so range checks
    # below still run on everything else
    clean = {}
    for section, body in raw.items():
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        if not isinstance(body, dict):
            errors.append(f"[{section}] must be a table")
            continue
        clean[section] = {}
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                err(section, key, "unknown key")
            elif not _type_ok(value, _SCHEMA[section][key]):
                err(section, key, f"expected {_expected_name(_SCHEMA[section][key])}, "
                                  f"got {type(value).__name__}")
            elif isinstance(value, list) and key in ("R", "eps", "snapshot_times") and \
                    not all(_type_ok(v, _NUM) for v in value):
                err(section, key, "expected an array of numbers")
            else:
                clean[section][key] = value
    raw = clean

    man = raw.get("manifold", {})
    prob = raw.get("problem", {})
    cfg = RunConfig(source=source)

    # manifold
    kind = man.get("kind", "euclidean")
    N = man.get("N", 3)
    if kind not in KINDS:
        err("manifold", "kind", f"must be one of {', '.join(KINDS)}")
    if N < 2:
        err("manifold", "N", "N must be at least 2")
    a = man.get("a", 1.0)
    if kind == "exponential_power" and not 0 < a <= 2:
        err("manifold", "a", "a must lie in (0, 2]")
    table = man.get("table")
    if kind == "tabulated":
        if table is None:
            err("manifold", "kind", "tabulated profiles need a 'table' file")
        else:
            table = table if os.path.isabs(table) else os.path.join(base, table)
            if not os.path.isfile(table):
                err("manifold", "table", f"file not found: {table}")

    # problem
    m = prob.get("m", 2.0)
    if not m > 1:
        err("problem", "m", "m must exceed 1")
    atom = prob.get("atom", 1.0 if "shells" not in prob else 0.0)
    shells = prob.get("shells", [])
    for k, sh in enumerate(shells):
        if not (isinstance(sh, list) and len(sh) == 3 and all(_type_ok(v, _NUM) for v in sh)):
            err("problem", "shells", f"entry {k} must be [inner, outer, value]")
        elif not 0 <= sh[0] < sh[1]:
            err("problem", "shells", f"entry {k} needs 0 <= inner < outer")
    R_schedule = _schedule(prob.get("R", 8.0))
    eps_schedule = _schedule(prob.get("eps", 0.02))
    if any(R <= 0 for R in R_schedule) or any(b <= a_ for a_, b in zip(R_schedule, R_schedule[1:])):
        err("problem", "R", "radii must be positive and increasing")
    if any(e <= 0 for e in eps_schedule) or any(b >= a_ for a_, b in zip(eps_schedule, eps_schedule[1:])):
        err("problem", "eps", "mollification radii must be positive and decreasing")
    elif R_schedule and max(eps_schedule) > min(R_schedule):
        err("problem", "eps", "mollification radius exceeds the smallest ball")

    # solver
    solver_kw = dict(raw.get("solver", {}))
    if "snapshot_times" in solver_kw:
        solver_kw["snapshot_times"] = tuple(float(t) for t in solver_kw["snapshot_times"])
    probe = SolverConfig.__new__(SolverConfig)
    for f in fields(SolverConfig):
        object.__setattr__(probe, f.name, solver_kw.get(f.name, f.default))
    object.__setattr__(probe, "m", m if m > 1 else 2.0)
    for msg in probe.validation_errors():
        key = msg.split()[0]
        err("solver", key if key in solver_kw else "", msg)

    # green / meanvalue / output
    green = {"R": None, "r_min": 1e-2, "r_max": 10.0, "samples": 200, **raw.get("green", {})}
    mean = {"alpha": 1.0, "r_min": 0.1, "r_max": 10.0, "samples": 30, "field": None, **raw.get("meanvalue", {})}
    out = {"directory": "pmelab_out", "snapshot_stride": 1, "formats": ["csv", "json"], **raw.get("output", {})}
    for sec, d in (("green", green), ("meanvalue", mean)):
        if not 0 < d["r_min"] < d["r_max"]:
            err(sec, "r_min", "need 0 < r_min < r_max")
        if d["samples"] < 2:
            err(sec, "samples", "need at least 2 samples")
    if green["R"] is not None and green["R"] <= 0:
        err("green", "R", "ball radius must be positive")
    if mean["alpha"] <= 0:
        err("meanvalue", "alpha", "alpha must be positive")
    if mean["field"] is not None:
        path = mean["field"] if os.path.isabs(mean["field"]) else os.path.join(base, mean["field"])
        if not os.path.isfile(path):
            err("meanvalue", "field", f"file not found: {path}")
        mean["field"] = path
    if out["snapshot_stride"] < 1:
        err("output", "snapshot_stride", "must be at least 1")
    bad = [f for f in out["formats"] if f not in ("csv", "json")]
    if bad:
        err("output", "formats", f"unknown formats {bad}; allowed: csv, json")

    if errors:
        raise ConfigError(errors)

    try:
        if kind == "tabulated":
            cfg.profile = ManifoldProfile.from_table_file(table, N)
        elif kind == "exponential_power":
            cfg.profile = ManifoldProfile.exponential_power(N, a)
        else:
            cfg.profile = getattr(ManifoldProfile, kind)(N)
    except (PmeLabError, ValueError, OSError) as exc:
        raise ConfigError([f"manifold: {exc}"]) from None
    density = None
    for inner, outer, value in shells:
        piece = RadialMeasure.shell(inner, outer, value).density
        density = piece if density is None else _merge_fields(density, piece)
    cfg.measure = RadialMeasure(atom, density, cfg.profile)
    cfg.m = float(m)
    cfg.R_schedule, cfg.eps_schedule = R_schedule, eps_schedule
    cfg.require_hypothesis = prob.get("require_hypothesis", True)
    cfg.solver = SolverConfig(m=float(m), **solver_kw)
    cfg.green, cfg.meanvalue, cfg.output = green, mean, out
    return cfg


def _merge_fields(a, b):
    edges = np.union1d(a.edges, b.edges)
    centers = 0.5 * (edges[:-1] + edges[1:])

    def lookup(f, x):
        k = np.clip(np.searchsorted(f.edges, x) - 1, 0, f.values.size - 1)
        return np.where(x < f.edges[-1], f.values[k], 0.0)

    return RadialField(edges, lookup(a, centers) + lookup(b, centers))


# ---------------------------------------------------------------------- output
def _fmt(x):
    return format(float(x), ".17g")


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, columns):
    """Write columns with a fixed header, 17 significant digits, atomically."""
    rows = [",".join(header)]
    rows += [",".join(_fmt(v) for v in row) for row in zip(*columns)]
    _atomic_write(path, "\n".join(rows) + "\n")


def write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def read_field_csv(path):
    """Read an ``r,u`` CSV (cell centers and values) back into a field."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    r, u = data[:, 0], data[:, 1]
    mids = 0.5 * (r[1:] + r[:-1])
    outer = r[-1] + (r[-1] - mids[-1] if mids.size else r[-1])
    return RadialField(np.concatenate([[0.0], mids, [outer]]), u)


# ---------------------------------------------------------------------- subcommands
def cmd_green(cfg, out):
    profile = cfg.profile
    g = cfg.green
    if g["R"] is None:
        gp = whole_green(profile)
    else:
        gp = ball_green(profile, g["R"])
    r_max = g["r_max"] if g["R"] is None else min(g["r_max"], g["R"])
    r = np.geomspace(g["r_min"], r_max, g["samples"])
    if g["R"] is not None:
        r = r[r < g["R"]]
    G = gp(r)
    files = []
    if "csv" in cfg.output["formats"]:
        files.append(_emit_csv(out, "green.csv", ["r", "G"], [r, G]))
    report = {"profile": profile.kind, "N": profile.N, "R": g["R"],
              "hypothesis": check_hypothesis(profile, r_max).as_dict()}
    if profile.N >= 3:
        report["bound_check"] = green_upper_bound_check(profile, r).as_dict() if g["R"] is None else None
    if "json" in cfg.output["formats"]:
        files.append(_emit_json(out, "green_report.json", report))
    return EXIT_OK, {"files": files}


def cmd_meanvalue(cfg, out):
    profile, mv = cfg.profile, cfg.meanvalue
    gp = whole_green(profile)
    r = np.geomspace(mv["r_min"], mv["r_max"], mv["samples"])
    if mv["field"] is not None:
        u = read_field_csv(mv["field"])
        source = mv["field"]
    else:
        reach = float(level_radius(gp, 1.0 / mv["r_max"]))
        support = cfg.measure.density.edges[-1] if cfg.measure.density is not None else 0.0
        outer = 1.05 * max(reach, support, 1e-3)
        edges = np.concatenate([[0.0], np.geomspace(1e-5 * outer, outer, 1500)])
        u = potential(cfg.measure, gp, edges)
        source = "potential of configured measure"
    m_r = mean_value_m(u, gp, r)
    M_r = mean_value_M(u, gp, r, mv["alpha"])
    audit = audit_M_monotonicity(u, gp, mv["alpha"], r)
    files = []
    if "csv" in cfg.output["formats"]:
        files.append(_emit_csv(out, "meanvalue.csv", ["r", "m_r", "M_r"], [r, m_r, M_r]))
    if "json" in cfg.output["formats"]:
        files.append(_emit_json(out, "meanvalue_report.json", {"source": source, **audit.as_dict()}))
    code = EXIT_OK if audit.passed else EXIT_CHECK
    return code, {"files": files, "monotone": audit.passed}


def cmd_solve(cfg, out):
    profile, solver = cfg.profile, cfg.solver
    if len(cfg.R_schedule) == 1 and len(cfg.eps_schedule) == 1:
        traj = solve_ball(profile, cfg.R_schedule[0], cfg.measure, cfg.eps_schedule[0], solver,
                          require_hypothesis=cfg.require_hypothesis)
    else:
        traj = solve_cauchy(profile, cfg.measure, solver, cfg.R_schedule, cfg.eps_schedule,
                            require_hypothesis=cfg.require_hypothesis)
    files = []
    stride = cfg.output["snapshot_stride"]
    keep = list(range(0, len(traj.times), stride))
    if keep[-1] != len(traj.times) - 1:
        keep.append(len(traj.times) - 1)
    if "csv" in cfg.output["formats"]:
        centers = traj.grid.centers
        for n, k in enumerate(keep):
            files.append(_emit_csv(out, os.path.join("snapshots", f"u_{n:04d}.csv"), ["r", "u"],
                                   [centers, traj.snapshots[k]]))
        files.append(_emit_csv(out, "snapshot_times.csv", ["index", "t"],
                               [range(len(keep)), [traj.times[k] for k in keep]]))
        d = traj.diagnostics()
        cols = ["t", "mass", "linf", "lmp1", "dissipation", "boundary_flux"]
        files.append(_emit_csv(out, "diagnostics.csv", cols, [d[c] for c in cols]))
    alpha, beta = solver.exponents(profile.N)
    summary = {
        "profile": profile.kind, "N": profile.N, "m": solver.m,
        "R": traj.R, "eps": traj.eps, "t_end": traj.times[-1],
        "steps": traj.steps, "rejected": traj.rejected, "newton_iterations": traj.newton_iterations,
        "aborted": traj.aborted, "message": traj.message,
        "mass_final": traj.diag_mass[-1], "linf_final": traj.diag_linf[-1],
        "boundary_flux": traj.diag_boundary_flux[-1], "energy_defect": traj.energy_defect(),
        "alpha": alpha, "beta": beta,
        "cauchy_report": traj.report.as_dict() if traj.report is not None else None,
    }
    if "json" in cfg.output["formats"]:
        files.append(_emit_json(out, "summary.json", summary))
    if traj.aborted:
        return EXIT_NUMERICAL, {"files": files, "error": traj.message}
    if traj.report is not None and not traj.report.passed:
        return EXIT_CHECK, {"files": files}
    return EXIT_OK, {"files": files}


def cmd_verify(cfg, out, suite="all", quiet=False):
    profile = cfg.profile if cfg is not None else None
    reports = run_suite(suite, profile=profile)
    if not quiet:
        for rep in reports:
            print(rep.summary_line(), file=sys.stderr)
    files = []
    if cfg is None or "json" in cfg.output["formats"]:
        files.append(_emit_json(out, "verify_report.json", [r.as_dict() for r in reports]))
    failed = [r.name for r in reports if not r.passed]
    return (EXIT_CHECK if failed else EXIT_OK), {"files": files, "checks": len(reports), "failed": failed}


def _emit_csv(out, name, header, cols):
    path = os.path.join(out, name)
    write_csv(path, header, cols)
    return path


def _emit_json(out, name, obj):
    path = os.path.join(out, name)
    write_json(path, obj)
    return path


COMMANDS = {"green": cmd_green, "meanvalue": cmd_meanvalue, "solve": cmd_solve, "verify": cmd_verify}


# ---------------------------------------------------------------------- entry point
def build_parser():
    parser = argparse.ArgumentParser(prog="pmelab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "verify", help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--quiet", action="store_true", help="suppress human-readable progress")
        if name == "verify":
            p.add_argument("--suite", default="all", choices=[*SUITES, "all"])
    return parser


def _fail(code, command, message):
    print(json.dumps({"command": command, "status": "error", "exit_code": code, "error": message}),
          file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        cfg = parse_config(args.config) if args.config else None
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return _fail(EXIT_CONFIG, command, str(exc))
    out = args.out or (cfg.output["directory"] if cfg else "pmelab_out")
    try:
        if command == "verify":
            code, info = cmd_verify(cfg, out, args.suite, args.quiet)
        else:
            code, info = COMMANDS[command](cfg, out)
    except NotNonparabolicError as exc:
        return _fail(EXIT_NUMERICAL, command, str(exc))
    except (PmeLabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERICAL, command, f"{type(exc).__name__}: {exc}")
    status = "ok" if code == EXIT_OK else "failed"
    print(json.dumps({"command": command, "status": status, "exit_code": code, **info},
                     default=_json_default, sort_keys=True))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
