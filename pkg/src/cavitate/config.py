"""Run configuration: JSON parsing, validation and model construction."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import geometry as geo
from .constitutive import ReducedLaw, custom_law, example42, power_function
from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "load_config", "build_curvature", "build_law",
           "COMMANDS"]

COMMANDS = ("jacobi", "pcr", "incompressible", "compressible", "minimize", "sweep")

_POWER = {"terms": [], "log": 0.0, "const": 0.0}

_CURVATURE = {
    "zero": {"kind": None},
    "constant": {"kind": None, "value": None},
    "table": {"kind": None, "t": None, "kappa": None, "t_max": None},
    "revolution": {"kind": None, "psi": None, "r_max": None},
    "ellipsoid": {"kind": None, "A": None, "b": {"form": "one"}, "t_max": 20.0},
}

_MATERIAL = {
    "example42": {"family": None, "mu": 1.0, "nu": 0.0, "alpha": 2.0, "beta": 0.0,
                  "k": 2.0, "c1": None},
    "custom": {"family": None, "phi": None, "h": None},
    "reduced": {"family": None, "dphi_hat": None, "phi_hat": None},
}

_COMMAND = {
    "jacobi": {"name": None, "t_max": None, "points": 201},
    "pcr": {"name": None, "tol": 1e-10},
    "incompressible": {"name": None, "A_grid": None, "A_range": None, "P": None,
                       "tol": 1e-10},
    "compressible": {"name": None, "lambda": None, "branch": "auto", "points": 201,
                     "tol": 1e-10},
    "minimize": {"name": None, "lambda": None, "grid_size": 256, "tol": 1e-10},
    "sweep": {"name": None, "lambdas": None, "lambda_range": None, "tol": 1e-10},
}

_MODEL = {"n": None, "curvature": None, "t_max": None, "tol": 1e-10}


@dataclass
class RunConfig:
    model: dict
    material: dict
    command: dict

    @property
    def name(self) -> str:
        return self.command["name"]

    def to_dict(self):
        return {"model": self.model, "material": self.material, "command": self.command}


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _merge(obj, schema, path, required=()):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    for key in obj:
        if key not in schema:
            _fail(f"{path}.{key}", "unknown key")
    out = {}
    for key, default in schema.items():
        if key in obj:
            out[key] = obj[key]
        elif key in required:
            _fail(f"{path}.{key}", "missing required key")
        else:
            out[key] = default
    return out


def _num(v, path, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(path, "expected a finite number")
    v = float(v)
    if positive and not v > 0:
        _fail(path, "must be positive")
    if nonneg and v < 0:
        _fail(path, "must be nonnegative")
    return v


def _int(v, path, lo):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, "expected an integer")
    if v < lo:
        _fail(path, f"must be >= {lo}")
    return v


def _grid(v, path, positive=True):
    if not isinstance(v, list) or not v:
        _fail(path, "expected a non-empty list")
    g = [_num(x, f"{path}[{i}]", positive=positive) for i, x in enumerate(v)]
    if any(b <= a for a, b in zip(g, g[1:])):
        _fail(path, "must be strictly increasing")
    return g


def _range(v, path):
    r = _merge(v, {"start": None, "stop": None, "num": None, "spacing": "log"}, path,
               ("start", "stop", "num"))
    start = _num(r["start"], f"{path}.start", positive=True)
    stop = _num(r["stop"], f"{path}.stop", positive=True)
    num = _int(r["num"], f"{path}.num", 1)
    if stop < start or (num > 1 and stop == start):
        _fail(path, "stop must exceed start")
    if r["spacing"] not in ("log", "linear"):
        _fail(f"{path}.spacing", "must be 'log' or 'linear'")
    g = np.geomspace(start, stop, num) if r["spacing"] == "log" else np.linspace(start, stop, num)
    return [float(x) for x in g]


def _power_spec(v, path):
    s = _merge(v, _POWER, path)
    terms = s["terms"]
    if not isinstance(terms, list):
        _fail(f"{path}.terms", "expected a list of [coefficient, power] pairs")
    for i, t in enumerate(terms):
        if not (isinstance(t, list) and len(t) == 2):
            _fail(f"{path}.terms[{i}]", "expected [coefficient, power]")
        _num(t[0], f"{path}.terms[{i}][0]")
        _num(t[1], f"{path}.terms[{i}][1]")
    _num(s["log"], f"{path}.log")
    _num(s["const"], f"{path}.const")
    return s


def _check_curvature(c, path):
    if not isinstance(c, dict):
        _fail(path, "expected an object")
    kind = c.get("kind")
    if kind not in _CURVATURE:
        _fail(f"{path}.kind", f"must be one of {sorted(_CURVATURE)}")
    c = _merge(c, _CURVATURE[kind], path,
               {"constant": ("value",), "table": ("t", "kappa"), "revolution": ("psi",),
                "ellipsoid": ("A",)}.get(kind, ()))
    if kind == "constant":
        _num(c["value"], f"{path}.value")
    elif kind == "table":
        t = _grid(c["t"], f"{path}.t", positive=False)
        if not isinstance(c["kappa"], list) or len(c["kappa"]) != len(t):
            _fail(f"{path}.kappa", "must match the length of t")
        for i, k in enumerate(c["kappa"]):
            _num(k, f"{path}.kappa[{i}]")
        if c["t_max"] is not None:
            _num(c["t_max"], f"{path}.t_max", positive=True)
    elif kind == "revolution":
        psi = c["psi"]
        if not isinstance(psi, dict) or psi.get("form") not in ("alog1p_sq", "poly"):
            _fail(f"{path}.psi.form", "must be 'alog1p_sq' or 'poly'")
        if psi["form"] == "alog1p_sq":
            _merge(psi, {"form": None, "a": None}, f"{path}.psi", ("a",))
            _num(psi["a"], f"{path}.psi.a")
        else:
            _merge(psi, {"form": None, "coeffs": None}, f"{path}.psi", ("coeffs",))
            if not isinstance(psi["coeffs"], list):
                _fail(f"{path}.psi.coeffs", "expected a list")
        if c["r_max"] is not None:
            _num(c["r_max"], f"{path}.r_max", positive=True)
    elif kind == "ellipsoid":
        A = c["A"]
        if not (isinstance(A, list) and all(isinstance(r, list) for r in A)):
            _fail(f"{path}.A", "expected a square matrix")
        b = c["b"]
        if not isinstance(b, dict) or b.get("form") not in ("one", "exp", "exp_sq", "poly"):
            _fail(f"{path}.b.form", "must be one of one, exp, exp_sq, poly")
        _num(c["t_max"], f"{path}.t_max", positive=True)
    return c


def _check_material(m, path, n):
    if not isinstance(m, dict):
        _fail(path, "expected an object")
    fam = m.get("family")
    if fam not in _MATERIAL:
        _fail(f"{path}.family", f"must be one of {sorted(_MATERIAL)}")
    m = _merge(m, _MATERIAL[fam], path,
               {"custom": ("phi", "h"), "reduced": ("dphi_hat",)}.get(fam, ()))
    if fam == "example42":
        for key in ("mu", "nu", "alpha", "beta", "k"):
            _num(m[key], f"{path}.{key}")
        if m["c1"] is not None:
            _num(m["c1"], f"{path}.c1", positive=True)
        try:
            build_law(m, n)
        except ValueError as exc:
            _fail(path, str(exc))
    elif fam == "custom":
        m["phi"] = _power_spec(m["phi"], f"{path}.phi")
        m["h"] = _power_spec(m["h"], f"{path}.h")
    else:
        m["dphi_hat"] = _power_spec(m["dphi_hat"], f"{path}.dphi_hat")
        if m["phi_hat"] is not None:
            m["phi_hat"] = _power_spec(m["phi_hat"], f"{path}.phi_hat")
    return m


def _check_command(c, path):
    if not isinstance(c, dict):
        _fail(path, "expected an object")
    name = c.get("name")
    if name not in _COMMAND:
        _fail(f"{path}.name", f"must be one of {list(COMMANDS)}")
    req = {"compressible": ("lambda",), "minimize": ("lambda",)}.get(name, ())
    c = _merge(c, _COMMAND[name], path, req)
    if "tol" in c:
        _num(c["tol"], f"{path}.tol", positive=True)
    if name == "jacobi":
        if c["t_max"] is not None:
            _num(c["t_max"], f"{path}.t_max", positive=True)
        _int(c["points"], f"{path}.points", 2)
    elif name == "incompressible":
        if (c["A_grid"] is None) == (c["A_range"] is None):
            _fail(path, "give exactly one of A_grid or A_range")
        c["A_grid"] = (_grid(c["A_grid"], f"{path}.A_grid") if c["A_grid"] is not None
                       else _range(c["A_range"], f"{path}.A_range"))
        c["A_range"] = None
        if c["P"] is not None:
            _num(c["P"], f"{path}.P")
    elif name in ("compressible", "minimize"):
        _num(c["lambda"], f"{path}.lambda", positive=True)
        if name == "compressible":
            if c["branch"] not in ("auto", "regular", "cavitating"):
                _fail(f"{path}.branch", "must be auto, regular or cavitating")
            _int(c["points"], f"{path}.points", 2)
        else:
            _int(c["grid_size"], f"{path}.grid_size", 4)
    elif name == "sweep":
        if (c["lambdas"] is None) == (c["lambda_range"] is None):
            _fail(path, "give exactly one of lambdas or lambda_range")
        c["lambdas"] = (_grid(c["lambdas"], f"{path}.lambdas") if c["lambdas"] is not None
                        else _range(c["lambda_range"], f"{path}.lambda_range"))
        c["lambda_range"] = None
    return c


def parse_config(data: Any) -> RunConfig:
    """Validate a decoded JSON object and fill defaults."""
    top = _merge(data, {"model": None, "material": None, "command": None}, "$",
                 ("model", "material", "command"))
    model = _merge(top["model"], _MODEL, "$.model", ("n", "curvature"))
    n = model["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        _fail("$.model.n", "n must be an integer")
    if n < 2:
        _fail("$.model.n", "n must be ≥ 2")
    model["curvature"] = _check_curvature(model["curvature"], "$.model.curvature")
    if model["t_max"] is not None:
        _num(model["t_max"], "$.model.t_max", positive=True)
    _num(model["tol"], "$.model.tol", positive=True)
    material = _check_material(top["material"], "$.material", n)
    command = _check_command(top["command"], "$.command")
    return RunConfig(model, material, command)


def load_config(path) -> RunConfig:
    """Read JSON from ``path`` (``-`` for standard input) and validate it."""
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(data)


# ---------------------------------------------------------------------------
# builders


def build_curvature(spec: dict, n: int) -> geo.CurvatureProfile:
    kind = spec["kind"]
    if kind == "zero":
        return geo.zero_curvature()
    if kind == "constant":
        return geo.constant_curvature(spec["value"])
    if kind == "table":
        return geo.tabulated_curvature(spec["t"], spec["kappa"], spec.get("t_max"))
    if kind == "revolution":
        psi = spec["psi"]
        r_max = spec.get("r_max")
        if psi["form"] == "alog1p_sq":
            surf = geo.log_bump_surface(psi["a"], **({} if r_max is None else {"r_max": r_max}))
        else:
            surf = geo.polynomial_surface(psi["coeffs"], **({} if r_max is None else {"r_max": r_max}))
        return geo.curvature_of_revolution(surf)
    if kind == "ellipsoid":
        b = geo.RadialFunction.from_spec(spec["b"])
        metric = geo.ellipsoid_metric(n, spec["A"], b, spec["t_max"])
        return metric.curvature()
    raise ConfigError(f"unknown curvature kind {kind!r}")


def build_law(spec: dict, n: int):
    fam = spec["family"]
    if fam == "example42":
        keys = ("mu", "nu", "alpha", "beta", "k", "c1")
        return example42(n, **{k: spec[k] for k in keys if spec.get(k) is not None})
    if fam == "custom":
        return custom_law(n, spec["phi"], spec["h"])
    d = spec["dphi_hat"]
    g, gp, _ = power_function(d["terms"], d["log"], d["const"])
    e = spec.get("phi_hat")
    phi_hat = power_function(e["terms"], e["log"], e["const"])[0] if e else None
    return ReducedLaw(n, g, phi_hat, gp)
