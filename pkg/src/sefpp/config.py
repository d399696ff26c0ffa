"""YAML run configuration -> problem, solver settings and output options.

Example::

    problem:
      D1: [[0.5]]
      D2: [[0.3333333333333333]]
      T1: {kind: affine, A: [[0.5]], b: [2.0], fixed_points: [[4.0]]}
      T2: {kind: affine, A: [[0.5]], b: [3.0]}
      x0: [1.0]
      y0: [1.0]
      solution: {p: [4.0], q: [6.0]}   # optional; enables the gamma column
    solver:
      mode: known-norm                 # known-norm | norm-free | decoupled-km
      alpha: 0.5
      tau: {kind: harmonic, c: 1.0, shift: 2.0}
      eta: auto
      zeta: auto
      max_iters: 100000
      stop_tolerance: 1.0e-6
      paper_exact_override: false
    output:
      format: csv                      # csv | jsonl
      path: p1.csv
      log_every: 1

Mapping kinds: ``affine`` (A, b), ``identity``, ``projection`` (set),
``prox`` (function, lambda), ``example`` (name: ex1_T, ex1_S, ex2_T, ex2_S).
Set kinds: ``box`` (lo, hi), ``ball`` (center, radius), ``halfspace``
(normal, offset). Function kinds: ``quadratic`` (A, b), ``l1`` (weight),
``indicator`` (set).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from . import fixtures
from .diagnostics import KnownSolution
from .errors import RejectedInputError, SefppError
from .linalg import LinearOperator
from .mappings import AffineMapping, ConvexSet, ProxFunction, identity_mapping, projection_mapping, prox_mapping
from .solvers import SefppProblem, SolverConfig
from .traceio import FORMATS

__all__ = ["ConfigError", "RunConfig", "OutputSpec", "load_config", "parse_config"]


class ConfigError(RejectedInputError):
    """Malformed configuration; ``path`` is the dotted field location."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class OutputSpec:
    format: str = "csv"
    path: Optional[str] = None
    log_every: int = 1


@dataclass
class RunConfig:
    problem: SefppProblem
    solver: SolverConfig
    output: OutputSpec
    solution: Optional[KnownSolution] = None


_EXAMPLES = {
    "ex1_T": fixtures.example1_T,
    "ex1_S": fixtures.example1_S,
    "ex2_T": fixtures.example2_T,
    "ex2_S": fixtures.example2_S,
}


def _section(d, key, path, required=True):
    if not isinstance(d, dict):
        raise ConfigError(path, f"expected a mapping, got {type(d).__name__}")
    if key not in d:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
        return None
    return d[key]


def _keys(d, allowed, path):
    if not isinstance(d, dict):
        raise ConfigError(path, f"expected a mapping, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(path, f"unknown field(s) {sorted(extra)}; allowed {sorted(allowed)}")


def _array(value, path, ndim):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"expected a numeric array ({exc})") from None
    if ndim == 2 and arr.ndim < 2:
        arr = np.atleast_2d(arr)
    if ndim == 1:
        arr = np.atleast_1d(arr)
    if arr.ndim != ndim:
        raise ConfigError(path, f"expected a {ndim}-D array, got shape {arr.shape}")
    return arr


def _wrap(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (SefppError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def _set(d, path):
    kind = _section(d, "kind", path)
    if kind == "box":
        _keys(d, {"kind", "lo", "hi", "dim"}, path)
        lo = _section(d, "lo", path)
        hi = _section(d, "hi", path)
        return _wrap(path, ConvexSet.box, _array(lo, f"{path}.lo", 1), _array(hi, f"{path}.hi", 1), d.get("dim"))
    if kind == "ball":
        _keys(d, {"kind", "center", "radius"}, path)
        return _wrap(path, ConvexSet.ball, _array(_section(d, "center", path), f"{path}.center", 1),
                     float(_section(d, "radius", path)))
    if kind == "halfspace":
        _keys(d, {"kind", "normal", "offset"}, path)
        return _wrap(path, ConvexSet.halfspace, _array(_section(d, "normal", path), f"{path}.normal", 1),
                     float(_section(d, "offset", path)))
    raise ConfigError(f"{path}.kind", f"unknown set kind {kind!r}; use box, ball or halfspace")


def _function(d, path):
    kind = _section(d, "kind", path)
    if kind == "quadratic":
        _keys(d, {"kind", "A", "b"}, path)
        return _wrap(path, ProxFunction.quadratic, _array(_section(d, "A", path), f"{path}.A", 2),
                     _array(_section(d, "b", path), f"{path}.b", 1))
    if kind == "l1":
        _keys(d, {"kind", "weight"}, path)
        return _wrap(path, ProxFunction.l1, float(d.get("weight", 1.0)))
    if kind == "indicator":
        _keys(d, {"kind", "set"}, path)
        return ProxFunction.indicator(_set(_section(d, "set", path), f"{path}.set"))
    raise ConfigError(f"{path}.kind", f"unknown function kind {kind!r}; use quadratic, l1 or indicator")


def _mapping(d, path, dim):
    kind = _section(d, "kind", path)
    fps = d.get("fixed_points", []) if isinstance(d, dict) else []
    if kind == "affine":
        _keys(d, {"kind", "A", "b", "fixed_points", "lipschitz"}, path)
        return _wrap(path, AffineMapping, _array(_section(d, "A", path), f"{path}.A", 2),
                     _array(_section(d, "b", path), f"{path}.b", 1), fixed_points=fps,
                     lipschitz=d.get("lipschitz"), name=path.rsplit(".", 1)[-1])
    if kind == "identity":
        _keys(d, {"kind"}, path)
        return identity_mapping(dim)
    if kind == "projection":
        _keys(d, {"kind", "set", "fixed_points"}, path)
        return _wrap(path, projection_mapping, _set(_section(d, "set", path), f"{path}.set"), fps)
    if kind == "prox":
        _keys(d, {"kind", "function", "lambda", "fixed_points"}, path)
        f = _function(_section(d, "function", path), f"{path}.function")
        lam = float(d.get("lambda", 1.0))
        if not lam > 0:
            raise ConfigError(f"{path}.lambda", f"must be positive, got {lam}")
        return _wrap(path, prox_mapping, f, lam, dim, fps)
    if kind == "example":
        _keys(d, {"kind", "name"}, path)
        name = _section(d, "name", path)
        if name not in _EXAMPLES:
            raise ConfigError(f"{path}.name", f"unknown example {name!r}; use one of {sorted(_EXAMPLES)}")
        return _EXAMPLES[name]()
    raise ConfigError(f"{path}.kind", f"unknown mapping kind {kind!r}; use affine, identity, "
                                      "projection, prox or example")


_SOLVER_KEYS = {"mode", "alpha", "tau", "eta", "zeta", "max_iters", "stop_tolerance",
                "paper_exact_override", "alpha_floor", "start_index", "accelerate", "semi_compact"}


def parse_config(data):
    """Build a ``RunConfig`` from already-loaded YAML data."""
    _keys(data, {"problem", "solver", "output"}, "")
    prob = _section(data, "problem", "")
    _keys(prob, {"D1", "D2", "T1", "T2", "x0", "y0", "solution"}, "problem")
    D1 = _wrap("problem.D1", LinearOperator, _array(_section(prob, "D1", "problem"), "problem.D1", 2))
    D2 = _wrap("problem.D2", LinearOperator, _array(_section(prob, "D2", "problem"), "problem.D2", 2))
    T1 = _mapping(_section(prob, "T1", "problem"), "problem.T1", D1.domain_dim)
    T2 = _mapping(_section(prob, "T2", "problem"), "problem.T2", D2.domain_dim)
    x0 = _array(_section(prob, "x0", "problem"), "problem.x0", 1)
    y0 = _array(_section(prob, "y0", "problem"), "problem.y0", 1)
    problem = _wrap("problem", SefppProblem, D1, D2, T1, T2, x0, y0)

    solution = None
    sol = prob.get("solution")
    if sol is not None:
        _keys(sol, {"p", "q"}, "problem.solution")
        solution = _wrap("problem.solution", KnownSolution,
                         _array(_section(sol, "p", "problem.solution"), "problem.solution.p", 1),
                         _array(_section(sol, "q", "problem.solution"), "problem.solution.q", 1))
        _wrap("problem.solution", solution.verify, problem)

    solver = dict(data.get("solver") or {})
    _keys(solver, _SOLVER_KEYS, "solver")
    for key in ("stop_tolerance", "alpha_floor", "eta", "zeta"):
        # PyYAML reads "1e-6" (no dot) as a string
        if isinstance(solver.get(key), str) and solver[key] != "auto":
            try:
                solver[key] = float(solver[key])
            except ValueError:
                raise ConfigError(f"solver.{key}", f"expected a number, got {solver[key]!r}") from None
    solver_cfg = _wrap("solver", SolverConfig, **solver)

    out = data.get("output") or {}
    _keys(out, {"format", "path", "log_every"}, "output")
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError("output.format", f"must be one of {FORMATS}, got {fmt!r}")
    every = out.get("log_every", 1)
    if not isinstance(every, int) or every < 1:
        raise ConfigError("output.log_every", f"must be a positive integer, got {every!r}")
    return RunConfig(problem, solver_cfg, OutputSpec(fmt, out.get("path"), every), solution)


def load_config(path):
    """Read and validate a YAML config file; errors carry line or field locations."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError("", f"YAML syntax error at {where}: {getattr(exc, 'problem', exc)}") from None
    if data is None:
        raise ConfigError("", "config file is empty")
    return parse_config(data)
