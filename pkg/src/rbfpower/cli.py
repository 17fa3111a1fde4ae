"""Command-line experiment runner.

Subcommands: interpolate, power-function, verify-identity, convergence,
bound-check.  Every run writes ``metadata.json`` holding the fully resolved
configuration; passing that file back through ``--config`` repeats the run.

Exit codes: 0 success, 2 input/validation, 3 numerical failure, 4 I/O.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import tempfile
import time
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import __version__, bounds, spectral
from .exceptions import ConditioningWarning, NumericalError, ValidationError
from .geometry import (CenterSet, PolynomialBasis, read_centers, read_values,
                       uniform_grid)
from .interpolate import (CONDITION_WARN, RESIDUAL_RTOL, assemble,
                          lagrange_values, solve_interpolant)
from .kernel import RadialKernel, as_multi_index
from .kriging import kriging_values

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("interpolate", "power-function", "verify-identity", "convergence",
            "bound-check")

TOLERANCES = {
    "condition_warn": CONDITION_WARN,
    "residual_rtol": RESIDUAL_RTOL,
    "bound_rtol": bounds.BOUND_RTOL,
    "bound_atol": bounds.BOUND_ATOL,
    "slope_window": bounds.SLOPE_WINDOW,
    "quadrature_tail": spectral.TAIL_TARGET,
    "identity_match_factor": spectral.MATCH_FACTOR,
}

DEFAULTS = {
    "kernel": {"family": "gaussian", "shape": 1.0, "dimension": 1, "q": None},
    "centers": {"file": None, "points": None, "grid": None},
    "seed": 0,
    "workers": 1,
    "interpolate": {"values": None, "values_file": None, "function": None,
                    "evaluate": None},
    "power_function": {"mu": 0, "convention": "corrected",
                       "precision": "auto",
                       "samples": {"points": None, "count": 100, "box": None}},
    "verify_identity": {"mu": 0, "x": None, "weights": "lagrange",
                        "grid": None, "tol": None, "candidates": None},
    "convergence": {"box": None, "levels": [9, 17, 33, 65, 129],
                    "rho": 0.25, "mu": 0, "samples": 64,
                    "convention": "corrected", "precision": "auto",
                    "resolution": None},
    "bound_check": {"function": None, "grid": None, "precision": "auto",
                    "samples": {"points": None, "count": 1000, "box": None,
                                "at_centers": False}},
}
SECTION = {"interpolate": "interpolate", "power-function": "power_function",
           "verify-identity": "verify_identity",
           "convergence": "convergence", "bound-check": "bound_check"}


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- config

def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _set_dotted(cfg, assignment):
    if "=" not in assignment:
        raise ValidationError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ValidationError(f"--set {key}: cannot parse {raw!r}") from exc
    node = cfg
    parts = key.strip().split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def _read_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read config {path}: {exc}", EXIT_IO) from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: malformed config: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config must be a mapping")
    if "config" in data and "tool" in data:
        # metadata.json from an earlier run
        return data["config"], data.get("command"), path.parent
    return data, None, path.parent


def _absolute(cfg, base):
    for section, key in (("centers", "file"), ("interpolate", "values_file")):
        node = cfg.get(section) or {}
        if node.get(key):
            node[key] = str((base / node[key]).resolve())
    return cfg


def resolve_config(command, config_path=None, sets=(), seed=None,
                   workers=None):
    """Defaults, then the config file, then ``--set`` overrides, then flags."""
    cfg = {}
    base = Path.cwd()
    if config_path:
        cfg, recorded, base = _read_config(config_path)
        if recorded and recorded != command:
            raise ValidationError(f"metadata was written by {recorded!r}, "
                                  f"not {command!r}")
    for assignment in sets:
        _set_dotted(cfg, assignment)
    if seed is not None:
        cfg["seed"] = int(seed)
    if workers is not None:
        cfg["workers"] = int(workers)
    section = SECTION[command]
    keep = ("kernel", "seed", "workers", section)
    if command != "convergence":
        keep += ("centers",)
    unknown = set(cfg) - set(DEFAULTS) - {"tolerances"}
    if unknown:
        raise ValidationError(f"unknown config keys {sorted(unknown)}")
    resolved = {k: v for k, v in _merge(DEFAULTS, cfg).items() if k in keep}
    resolved["tolerances"] = dict(TOLERANCES)
    if not 0 <= int(resolved["seed"]) < 2 ** 64:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    if int(resolved["workers"]) < 1:
        raise ValidationError("workers must be positive")
    return _absolute(resolved, base)


# ---------------------------------------------------------------- builders

def build_kernel(cfg):
    k = cfg["kernel"]
    return RadialKernel(str(k["family"]), int(k["dimension"]),
                        float(k["shape"]))


def build_basis(cfg, kernel):
    q = cfg["kernel"].get("q")
    return None if q is None else PolynomialBasis(int(q), kernel.dim)


def build_centers(cfg, kernel):
    c = cfg["centers"]
    given = [k for k in ("file", "points", "grid") if c.get(k) is not None]
    if len(given) != 1:
        raise ValidationError("centers need exactly one of file, points, grid")
    if c.get("file"):
        centers = read_centers(c["file"])
    elif c.get("points") is not None:
        centers = CenterSet(np.asarray(c["points"], dtype=float)
                            .reshape(-1, kernel.dim))
    else:
        grid = c["grid"]
        centers = uniform_grid(grid["box"], grid["count"])
    if centers.dim != kernel.dim:
        raise ValidationError(f"centers have dimension {centers.dim}, "
                              f"kernel has {kernel.dim}")
    return centers


def build_function(spec, kernel):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValidationError("function needs a 'type' "
                              "(kernel_span or gaussian)")
    kind = spec["type"]
    if kind == "kernel_span":
        return spectral.SpectralFunction.kernel_span(
            kernel, spec["translates"], spec.get("coefficients"))
    if kind == "gaussian":
        return spectral.SpectralFunction.gaussian(
            float(spec["beta"]), spec.get("center"),
            float(spec.get("scale", 1.0)), kernel.dim)
    raise ValidationError(f"unknown function type {kind!r}")


def build_grid(spec, dim):
    if spec is None:
        return None
    return spectral.QuadratureGrid(dim, float(spec["T"]), int(spec["points"]),
                                   float(spec.get("epsilon", 0.0)))


def _box_of(centers):
    pts = centers.points
    return np.stack([pts.min(axis=0), pts.max(axis=0)], axis=1)


def build_samples(spec, centers, rng):
    n = centers.dim
    if spec.get("at_centers"):
        return centers.points.copy()
    if spec.get("points") is not None:
        return np.asarray(spec["points"], dtype=float).reshape(-1, n)
    box = (np.asarray(spec["box"], dtype=float).reshape(n, 2)
           if spec.get("box") is not None else _box_of(centers))
    count = int(spec["count"])
    if count < 1:
        raise ValidationError("sample count must be positive")
    return box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((count, n))


def _mu(value, dim):
    if isinstance(value, list):
        value = tuple(value)
    return as_multi_index(value, dim)


def _fmt(v):
    return repr(float(v))


def _csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) if not isinstance(v, (int, str)) else str(v)
                       for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False,
                      default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# ---------------------------------------------------------------- tasks

def run_interpolate(cfg):
    kernel = build_kernel(cfg)
    centers = build_centers(cfg, kernel)
    task = cfg["interpolate"]
    given = [k for k in ("values", "values_file", "function")
             if task.get(k) is not None]
    if len(given) != 1:
        raise ValidationError("interpolate needs exactly one of values, "
                              "values_file, function")
    if task.get("values") is not None:
        values = np.asarray(task["values"], dtype=float).reshape(-1)
    elif task.get("values_file"):
        values = read_values(task["values_file"])
    else:
        values = build_function(task["function"], kernel)(centers.points)
    system = assemble(kernel, centers, build_basis(cfg, kernel))
    interp = solve_interpolant(system, values)
    rhs = np.concatenate([values, np.zeros(system.Q)])
    sol = np.concatenate([interp.a, interp.b])
    files = {
        "coefficients_a.csv": _csv(["index", "a"], enumerate(interp.a)),
        "coefficients_b.csv": _csv(["index", "b"], enumerate(interp.b)),
        "residual.json": _json({"backward_error": system.residual(sol, rhs),
                                "condition": system.condition,
                                "M": system.M, "Q": system.Q}),
    }
    if task.get("evaluate") is not None:
        pts = np.asarray(task["evaluate"], dtype=float).reshape(-1, kernel.dim)
        names = ["x"] if kernel.dim == 1 else [f"x{k + 1}"
                                               for k in range(kernel.dim)]
        files["evaluation.csv"] = _csv(
            names + ["s"], [list(p) + [v] for p, v in zip(pts, interp(pts))])
    return files


def run_power_function(cfg):
    kernel = build_kernel(cfg)
    centers = build_centers(cfg, kernel)
    task = cfg["power_function"]
    rng = np.random.default_rng(int(cfg["seed"]))
    pts = build_samples(task["samples"], centers, rng)
    mu = _mu(task["mu"], kernel.dim)
    system = assemble(kernel, centers, build_basis(cfg, kernel))
    vals = kriging_values(system, pts, mu, task["convention"],
                          task["precision"])
    names = ["x"] if kernel.dim == 1 else [f"x{k + 1}"
                                           for k in range(kernel.dim)]
    rows = [list(p) + [v.kappa_sq, math.nan if v.kappa is None else v.kappa]
            for p, v in zip(pts, vals)]
    return {"power_function.csv": _csv(names + ["kappa_sq", "kappa"], rows)}


def run_verify_identity(cfg):
    kernel = build_kernel(cfg)
    centers = build_centers(cfg, kernel)
    task = cfg["verify_identity"]
    mu = _mu(task["mu"], kernel.dim)
    basis = build_basis(cfg, kernel)
    system = assemble(kernel, centers, basis)
    if task.get("x") is None:
        raise ValidationError("verify_identity.x is required")
    x = np.asarray(task["x"], dtype=float).reshape(kernel.dim)
    weights = task["weights"]
    if weights == "lagrange":
        U = lagrange_values(system, x[None, :], mu)[0]
    else:
        U = np.asarray(weights, dtype=float).reshape(system.M)
    candidates = dict(spectral.CANDIDATES)
    for name, spec in (task.get("candidates") or {}).items():
        candidates[name] = spectral.Candidate.from_dict(spec or {})
    report = spectral.adjudicate_identity(
        kernel, centers, U, x, mu, build_grid(task.get("grid"), kernel.dim),
        basis, candidates, task.get("tol"), workers=int(cfg["workers"]))
    return {"identity_report.json": report.to_json()}


def run_convergence(cfg):
    kernel = build_kernel(cfg)
    task = cfg["convergence"]
    box = task.get("box") or [[0.0, 1.0]] * kernel.dim
    study = bounds.convergence_study(
        kernel, box, task["levels"], float(task["rho"]),
        _mu(task["mu"], kernel.dim), int(task["samples"]),
        task["convention"], task["precision"], task.get("resolution"),
        cfg["kernel"].get("q"), workers=int(cfg["workers"]))
    return {"study.csv": study.to_csv(), "study.json": _json(study.to_dict()),
            "plot.dat": study.plot_data()}


def run_bound_check(cfg):
    kernel = build_kernel(cfg)
    centers = build_centers(cfg, kernel)
    task = cfg["bound_check"]
    if task.get("function") is None:
        raise ValidationError("bound_check.function is required")
    f = build_function(task["function"], kernel)
    rng = np.random.default_rng(int(cfg["seed"]))
    pts = build_samples(task["samples"], centers, rng)
    report = bounds.bound_check(
        kernel, centers, f, pts, build_grid(task.get("grid"), kernel.dim),
        task["precision"], cfg["kernel"].get("q"),
        workers=int(cfg["workers"]))
    summary = {"samples": len(pts), "violations": report.violations,
               "cf": report.cf, "max_lhs": float(report.lhs.max()),
               "min_margin": float(report.margin.min()),
               "precision_bits": report.bits}
    return {"bound_check.csv": report.to_csv(),
            "bound_check.json": _json(summary)}


RUNNERS = {"interpolate": run_interpolate,
           "power-function": run_power_function,
           "verify-identity": run_verify_identity,
           "convergence": run_convergence,
           "bound-check": run_bound_check}


# ---------------------------------------------------------------- output

def _prepare_out(out):
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise CLIError(f"output directory {out} is not writable: {exc}",
                       EXIT_IO) from exc
    return out


def _write_atomic(path, text):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def execute(command, cfg, out):
    """Run one resolved configuration and write its outputs; returns paths."""
    out = _prepare_out(out)
    start = time.perf_counter()
    files = RUNNERS[command](cfg)
    meta = {"tool": "rbfpower", "version": __version__, "command": command,
            "config": cfg,
            "wall_clock_seconds": time.perf_counter() - start}
    files["metadata.json"] = _json(meta)
    written = []
    try:
        for name, text in files.items():
            _write_atomic(out / name, text)
            written.append(out / name)
    except OSError as exc:
        raise CLIError(f"cannot write outputs to {out}: {exc}",
                       EXIT_IO) from exc
    return written


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rbfpower",
        description="RBF interpolation, Kriging functions and error-bound "
                    "checks.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH",
                       help="YAML/JSON config, or metadata.json of a past run")
        p.add_argument("--set", dest="sets", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a dotted config key (repeatable)")
        p.add_argument("--out", metavar="DIR", default="out",
                       help="output directory (default: out)")
        p.add_argument("--workers", type=int, metavar="N")
        p.add_argument("--seed", type=int, metavar="U64")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", ConditioningWarning)
            cfg = resolve_config(args.command, args.config, args.sets,
                                 args.seed, args.workers)
            written = execute(args.command, cfg, args.out)
    except CLIError as exc:
        print(f"rbfpower: error: {exc}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        print(f"rbfpower: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"rbfpower: numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"rbfpower: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (KeyError, TypeError, ValueError) as exc:
        print(f"rbfpower: invalid config: {exc!r}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"rbfpower: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
