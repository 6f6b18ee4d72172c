"""JSON run configuration.

Example::

    {
      "domain":   {"type": "annulus", "center": [0, 0], "r_in": 1, "r_out": 2},
      "h": 0.05,
      "boundary": {"type": "log_r"},
      "solver":   {"epsilon": 1.0},
      "checks":   ["lemma1", "lemma2", {"moving_plane": [0, 0.1]}],
      "output":   {"dir": "out", "pgm": "u.pgm"}
    }

Implicit domains give ``sdf`` as an expression in ``x`` and ``y`` built from
numbers, arithmetic and a fixed set of numpy functions.
"""
from __future__ import annotations

import ast
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boundary import Constant, Fourier, LogR, Zero
from .errors import ConfigError
from .geometry import Annulus, Disk, Implicit, Rectangle
from .nonlinear import SolverConfig

OUTPUT_DIR_ENV = "SEMILINEAR_OUTPUT_DIR"

CHECK_NAMES = ("lemma1", "lemma2", "symmetry", "moving_plane", "monotonicity", "radial_oracle")

_SDF_FUNCS = {
    "sqrt": np.sqrt, "hypot": np.hypot, "abs": np.abs, "minimum": np.minimum,
    "maximum": np.maximum, "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log,
    "arctan2": np.arctan2, "pi": math.pi,
}
_SDF_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
              ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def compile_sdf(expr):
    """Turn an expression string into a vectorised ``f(x, y)``."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError("domain.sdf", f"cannot parse {expr!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _SDF_NODES):
            raise ConfigError("domain.sdf", f"construct {type(node).__name__} not allowed")
        if isinstance(node, ast.Name) and node.id not in _SDF_FUNCS and node.id not in ("x", "y"):
            raise ConfigError("domain.sdf", f"unknown name {node.id!r}")
        if isinstance(node, ast.Call) and not isinstance(node.func, ast.Name):
            raise ConfigError("domain.sdf", "only plain function calls are allowed")
    code = compile(tree, "<sdf>", "eval")

    def sdf(x, y):
        return eval(code, {"__builtins__": {}}, dict(_SDF_FUNCS, x=x, y=y))

    return sdf


def _num(d, key, where, default=None):
    name = f"{where}.{key}" if where else key
    if key not in d:
        if default is not None:
            return default
        raise ConfigError(name, "missing")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(name, f"expected a finite number, got {v!r}")
    return float(v)


def parse_domain(d):
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("domain.type", "missing")
    kind = d["type"]
    if kind == "rectangle":
        return Rectangle(*(_num(d, k, "domain") for k in ("x_min", "x_max", "y_min", "y_max")))
    if kind == "disk":
        radius = _num(d, "R", "domain") if "R" in d else _num(d, "radius", "domain")
        return Disk(tuple(d.get("center", (0.0, 0.0))), radius)
    if kind == "annulus":
        return Annulus(tuple(d.get("center", (0.0, 0.0))), _num(d, "r_in", "domain"),
                       _num(d, "r_out", "domain"))
    if kind == "implicit":
        expr = d.get("sdf")
        if not isinstance(expr, str):
            raise ConfigError("domain.sdf", "expected an expression string in x and y")
        box = d.get("bounding_box")
        if not isinstance(box, (list, tuple)) or len(box) != 4:
            raise ConfigError("domain.bounding_box", "expected [x_min, x_max, y_min, y_max]")
        return Implicit(compile_sdf(expr), tuple(box), expression=expr)
    raise ConfigError("domain.type", f"unknown domain type {kind!r}")


def parse_boundary(d):
    if d is None:
        return Zero()
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("boundary.type", "missing")
    kind = d["type"]
    if kind == "zero":
        return Zero()
    if kind == "constant":
        return Constant(_num(d, "c", "boundary"))
    if kind == "log_r":
        return LogR()
    if kind == "fourier":
        a, b = d.get("a", []), d.get("b", [])
        if not isinstance(a, list) or not isinstance(b, list):
            raise ConfigError("boundary.a", "coefficient lists expected")
        return Fourier(_num(d, "a0", "boundary", 0.0), tuple(a), tuple(b))
    raise ConfigError("boundary.type", f"unknown boundary type {kind!r}")


_SOLVER_KEYS = {
    "epsilon", "newton_tol_abs", "newton_tol_rel", "max_newton", "max_backtracks",
    "sigma_schedule", "epsilon_schedule", "linear_tol", "linear_max_iter", "max_bisections",
}


def parse_solver(d, boundary):
    d = dict(d or {})
    unknown = set(d) - _SOLVER_KEYS
    if unknown:
        raise ConfigError(f"solver.{sorted(unknown)[0]}", "unknown key")
    if "epsilon" in d:
        _num(d, "epsilon", "solver")
    for key in ("sigma_schedule", "epsilon_schedule"):
        if key in d and d[key] is not None:
            if not isinstance(d[key], list):
                raise ConfigError(f"solver.{key}", "expected a list")
            d[key] = tuple(d[key])
    try:
        return SolverConfig(boundary=boundary, **d)
    except TypeError as exc:
        raise ConfigError("solver", str(exc)) from None


@dataclass(frozen=True)
class CheckSpec:
    name: str
    params: dict = field(default_factory=dict)


def parse_checks(items):
    out = []
    for k, item in enumerate(items or []):
        where = f"checks[{k}]"
        if isinstance(item, str):
            name, params = item, {}
        elif isinstance(item, dict) and "name" in item:
            params = {key: v for key, v in item.items() if key != "name"}
            name = item["name"]
        elif isinstance(item, dict) and len(item) == 1:
            (name, value), = item.items()
            params = {"lambdas": value} if name == "moving_plane" else dict(value or {})
        else:
            raise ConfigError(where, f"cannot read check {item!r}")
        if name not in CHECK_NAMES:
            raise ConfigError(where, f"unknown check {name!r}; expected one of {CHECK_NAMES}")
        if name == "moving_plane":
            lams = params.get("lambdas", [0.0])
            if not isinstance(lams, list) or not all(
                    isinstance(v, (int, float)) and v >= 0 for v in lams):
                raise ConfigError(f"{where}.lambdas", "expected a list of numbers >= 0")
            params = dict(params, lambdas=[float(v) for v in lams])
        out.append(CheckSpec(name, params))
    return tuple(out)


@dataclass(frozen=True)
class OutputSpec:
    dir: Path
    field_csv: str | None = "field.csv"
    report_json: str = "report.json"
    pgm: str | None = None
    convergence_csv: str = "convergence.csv"

    def path(self, name):
        return None if name is None else self.dir / name


def parse_output(d, base):
    d = dict(d or {})
    directory = os.environ.get(OUTPUT_DIR_ENV) or d.get("dir", "output")
    directory = Path(directory)
    if not directory.is_absolute():
        directory = Path(base) / directory
    return OutputSpec(
        dir=directory,
        field_csv=d.get("field_csv", "field.csv"),
        report_json=d.get("report_json", "report.json"),
        pgm=d.get("pgm"),
        convergence_csv=d.get("convergence_csv", "convergence.csv"),
    )


@dataclass(frozen=True)
class RunConfig:
    domain: object
    h: float
    boundary: object
    solver: SolverConfig
    checks: tuple
    output: OutputSpec
    raw: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            "domain": self.domain.to_dict(),
            "h": self.h,
            "boundary": self.boundary.to_dict(),
            "solver": self.solver.to_dict(),
            "checks": [{"name": c.name, **c.params} for c in self.checks],
        }


def parse_config(data, base="."):
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    domain = parse_domain(data.get("domain"))
    h = _num(data, "h", "")
    if h <= 0:
        raise ConfigError("h", f"must be > 0 (got {h})")
    boundary = parse_boundary(data.get("boundary"))
    solver = parse_solver(data.get("solver"), boundary)
    checks = parse_checks(data.get("checks"))
    output = parse_output(data.get("output"), base)
    return RunConfig(domain, h, boundary, solver, checks, output, data)


def load_config(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("<file>", f"{path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"{path} is not valid JSON: {exc}") from None
    return parse_config(data, base=path.parent)
