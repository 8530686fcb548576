"""Experiment configuration: a YAML document validated into a :class:`RunConfig`.

Schema (every key optional unless noted; unknown keys are rejected)::

    problem: example1            # example1 | example2 | custom
    params:                      # c and beta are required for custom
      c: 1.0
      beta: 3.141592653589793
      nx: 32768                  # power of two >= 4
      t_max: 2.0
    boundary_matrix: [[-0.25, 0.0], [0.0, 1.0]]   # required for custom
    example2: {c1: 0.1, c2: 9.0, c3: 10.0, c4: 0.1}
    initial:                     # custom only
      v0: [1.0, 0.0]             # required for custom
      u0: {kind: lift}           # zero | lift | sine | gaussian
    scheme: {name: lie, theta: 0.5}   # lie | strang | weighted | naive
    steps: 20                    # step count for `run`
    sweep: {dyadic: [2, 11]}     # or {taus: [0.5, 0.25, ...]}
    reference: {mode: exact}     # or {mode: fine, factor: 64} / {mode: fine, nt_fine: 65536}
    fit: {window: [0, 9], plateau_threshold: 0.2}
    output: {path: out.csv, columns: 65}

Preset defaults: example1 uses nx=32768, t_max=2, dyadic 2..11 and the exact
solution; example2 uses nx=128, t_max=2, dyadic 2..10 and a fine run with 64
times the finest sweep step count.  Custom problems default to nx=256,
t_max=1, dyadic 2..10 and a fine-run reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from . import presets
from .analysis import Exact, ExperimentSpec, FineRun, dyadic_taus, steps_for
from .errors import ConfigurationError, ContractError
from .operators import DomainParams, dirichlet_lift
from .splitting import Problem, Scheme, SchemeKind


class ConfigParseError(ConfigurationError):
    pass


class ConfigValidationError(ConfigurationError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


_TOP_KEYS = {"problem", "params", "boundary_matrix", "example2", "initial", "scheme",
             "steps", "sweep", "reference", "fit", "output"}
_SUB_KEYS = {
    "params": {"c", "beta", "nx", "t_max"},
    "example2": {"c1", "c2", "c3", "c4"},
    "initial": {"v0", "u0"},
    "scheme": {"name", "theta"},
    "sweep": {"dyadic", "taus"},
    "reference": {"mode", "factor", "nt_fine"},
    "fit": {"window", "plateau_threshold"},
    "output": {"path", "columns"},
}
_U0_KEYS = {
    "zero": set(),
    "lift": set(),
    "sine": {"coefficients"},
    "gaussian": {"amplitude", "rate", "center"},
}

_PRESET_DEFAULTS = {
    "example1": {"nx": 32768, "t_max": 2.0, "dyadic": (2, 11), "reference": "exact"},
    "example2": {"nx": 128, "t_max": 2.0, "dyadic": (2, 10), "reference": "fine"},
    "custom": {"nx": 256, "t_max": 1.0, "dyadic": (2, 10), "reference": "fine"},
}


@dataclass(frozen=True)
class RunConfig:
    problem: str
    c: float
    beta: float
    nx: int
    t_max: float
    B: tuple[tuple[float, float], tuple[float, float]]
    example2: dict
    v0: tuple[float, float] | None
    u0: dict
    scheme: Scheme
    steps: int
    taus: tuple[float, ...]
    reference: str
    reference_factor: int
    nt_fine: int | None
    fit_window: tuple[int, int] | None
    plateau_threshold: float
    out: str | None
    columns: int


def _num(value, field, *, positive=False, integer=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(field, f"expected a number, got {value!r}")
    if integer and not (isinstance(value, int) or float(value).is_integer()):
        raise ConfigValidationError(field, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigValidationError(field, "must be finite")
    if positive and not value > 0:
        raise ConfigValidationError(field, f"must be positive, got {value!r}")
    if nonneg and value < 0:
        raise ConfigValidationError(field, f"must be nonnegative, got {value!r}")
    return int(value) if integer else float(value)


def _section(doc, key):
    sec = doc.get(key)
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigValidationError(key, "expected a mapping")
    unknown = set(sec) - _SUB_KEYS[key]
    if unknown:
        raise ConfigValidationError(f"{key}.{sorted(unknown)[0]}", "unknown key")
    return sec


def _pair(value, field, integer=False):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigValidationError(field, "expected a list of two numbers")
    return tuple(_num(x, f"{field}[{i}]", integer=integer) for i, x in enumerate(value))


def load_document(text: str) -> dict:
    """Parse YAML text into a mapping (empty documents give ``{}``)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigParseError(f"invalid YAML{where}: {getattr(exc, 'problem', exc)}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigParseError("top level of the config must be a mapping")
    return doc


def parse_config(text: str) -> RunConfig:
    return validate(load_document(text))


def validate(doc: dict[str, Any]) -> RunConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigValidationError(sorted(unknown)[0], "unknown key")

    kind = doc.get("problem", "example1")
    if kind not in _PRESET_DEFAULTS:
        raise ConfigValidationError("problem", f"must be example1, example2 or custom, got {kind!r}")
    defaults = _PRESET_DEFAULTS[kind]

    params = _section(doc, "params")
    if kind == "example1":
        c, beta = 1.0, math.pi
        if "c" in params or "beta" in params:
            raise ConfigValidationError("params", "example1 fixes c = 1 and beta = pi")
    elif kind == "example2":
        c, beta = None, 1.0
        if "c" in params or "beta" in params:
            raise ConfigValidationError("params", "example2 takes its diffusivity from example2.c1")
    else:
        for key in ("c", "beta"):
            if key not in params:
                raise ConfigValidationError(f"params.{key}", "required for custom problems")
        c = _num(params["c"], "params.c", positive=True)
        beta = _num(params["beta"], "params.beta", positive=True)
    nx = _num(params.get("nx", defaults["nx"]), "params.nx", integer=True)
    if nx < 4 or nx & (nx - 1):
        raise ConfigValidationError("params.nx", f"must be a power of two >= 4, got {nx}")
    t_max = _num(params.get("t_max", defaults["t_max"]), "params.t_max", positive=True)

    ex2 = dict(presets.EXAMPLE2_CONSTANTS)
    for key, val in _section(doc, "example2").items():
        ex2[key] = _num(val, f"example2.{key}", positive=True)
    if doc.get("example2") is not None and kind != "example2":
        raise ConfigValidationError("example2", "only valid with problem: example2")
    if kind == "example2":
        c = ex2["c1"]

    if "boundary_matrix" in doc:
        if kind != "custom":
            raise ConfigValidationError("boundary_matrix", "only valid with problem: custom")
        rows = doc["boundary_matrix"]
        if not isinstance(rows, list) or len(rows) != 2:
            raise ConfigValidationError("boundary_matrix", "expected a 2x2 list of lists")
        B = tuple(_pair(r, f"boundary_matrix[{i}]") for i, r in enumerate(rows))
    elif kind == "custom":
        raise ConfigValidationError("boundary_matrix", "required for custom problems")
    elif kind == "example1":
        B = presets.EXAMPLE1_B
    else:
        B = ((0.0, 1.0), (-ex2["c3"], 0.0))

    initial = _section(doc, "initial")
    v0, u0 = None, {"kind": "lift"}
    if initial and kind != "custom":
        raise ConfigValidationError("initial", "only valid with problem: custom")
    if kind == "custom":
        if "v0" not in initial:
            raise ConfigValidationError("initial.v0", "required for custom problems")
        v0 = _pair(initial["v0"], "initial.v0")
        u0 = _validate_u0(initial.get("u0", {"kind": "lift"}))

    sch = _section(doc, "scheme")
    name = sch.get("name", "lie")
    try:
        skind = SchemeKind(name)
    except ValueError:
        raise ConfigValidationError("scheme.name", f"unknown scheme {name!r}") from None
    if "theta" in sch and skind is not SchemeKind.WEIGHTED:
        raise ConfigValidationError("scheme.theta", "only valid for the weighted scheme")
    theta = _num(sch.get("theta", 0.5), "scheme.theta")
    if skind is SchemeKind.WEIGHTED and not 0 <= theta <= 1:
        raise ConfigValidationError("scheme.theta", f"must lie in [0, 1], got {theta}")
    scheme = Scheme.weighted(theta) if skind is SchemeKind.WEIGHTED else Scheme(skind)

    steps = _num(doc.get("steps", 20), "steps", integer=True, positive=True)

    sweep = _section(doc, "sweep")
    if "dyadic" in sweep and "taus" in sweep:
        raise ConfigValidationError("sweep", "give either dyadic or taus, not both")
    if "taus" in sweep:
        if not isinstance(sweep["taus"], list) or not sweep["taus"]:
            raise ConfigValidationError("sweep.taus", "expected a non-empty list")
        taus = tuple(_num(t, f"sweep.taus[{i}]", positive=True) for i, t in enumerate(sweep["taus"]))
        for i, tau in enumerate(taus):
            try:
                steps_for(tau, t_max)
            except ConfigurationError:
                raise ConfigValidationError(f"sweep.taus[{i}]", f"{tau} does not divide t_max={t_max}") from None
    else:
        k_min, k_max = _pair(sweep.get("dyadic", defaults["dyadic"]), "sweep.dyadic", integer=True)
        if not 0 <= k_min <= k_max:
            raise ConfigValidationError("sweep.dyadic", f"need 0 <= k_min <= k_max, got {k_min}, {k_max}")
        taus = tuple(dyadic_taus(t_max, k_min, k_max))

    ref = _section(doc, "reference")
    mode = ref.get("mode", defaults["reference"])
    if mode not in ("exact", "fine"):
        raise ConfigValidationError("reference.mode", f"must be exact or fine, got {mode!r}")
    if mode == "exact" and kind != "example1":
        raise ConfigValidationError("reference.mode", "an exact solution is only available for example1")
    if mode == "exact" and ("factor" in ref or "nt_fine" in ref):
        raise ConfigValidationError("reference", "factor/nt_fine only apply to mode: fine")
    if "factor" in ref and "nt_fine" in ref:
        raise ConfigValidationError("reference", "give either factor or nt_fine, not both")
    factor = _num(ref.get("factor", 64), "reference.factor", integer=True, positive=True)
    nt_fine = None
    finest = max(steps_for(t, t_max) for t in taus)
    if "nt_fine" in ref:
        nt_fine = _num(ref["nt_fine"], "reference.nt_fine", integer=True, positive=True)
        if nt_fine <= finest:
            raise ConfigValidationError("reference.nt_fine", f"must exceed the finest sweep step count {finest}")
    elif mode == "fine" and factor < 2:
        raise ConfigValidationError("reference.factor", "must be at least 2")

    fit = _section(doc, "fit")
    window = None
    if "window" in fit:
        window = _pair(fit["window"], "fit.window", integer=True)
        if not 0 <= window[0] < window[1] < len(taus):
            raise ConfigValidationError("fit.window", f"need 0 <= lo < hi < {len(taus)}, got {window}")
    threshold = _num(fit.get("plateau_threshold", 0.2), "fit.plateau_threshold", nonneg=True)

    out = _section(doc, "output")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigValidationError("output.path", "expected a string")
    columns = _num(out.get("columns", 65), "output.columns", integer=True, positive=True)

    return RunConfig(
        problem=kind, c=c, beta=beta, nx=nx, t_max=t_max, B=B, example2=ex2,
        v0=v0, u0=u0, scheme=scheme, steps=steps, taus=taus, reference=mode,
        reference_factor=factor, nt_fine=nt_fine, fit_window=window,
        plateau_threshold=threshold, out=path, columns=columns,
    )


def _validate_u0(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigValidationError("initial.u0", "expected a mapping with a 'kind' key")
    kind = spec["kind"]
    if kind not in _U0_KEYS:
        raise ConfigValidationError("initial.u0.kind", f"unknown kind {kind!r}")
    extra = set(spec) - _U0_KEYS[kind] - {"kind"}
    if extra:
        raise ConfigValidationError(f"initial.u0.{sorted(extra)[0]}", "unknown key")
    out = {"kind": kind}
    if kind == "sine":
        coeffs = spec.get("coefficients")
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigValidationError("initial.u0.coefficients", "expected a non-empty list")
        out["coefficients"] = tuple(_num(a, f"initial.u0.coefficients[{i}]") for i, a in enumerate(coeffs))
    elif kind == "gaussian":
        for key, default in (("amplitude", 1.0), ("rate", 1.0), ("center", None)):
            if key in spec:
                out[key] = _num(spec[key], f"initial.u0.{key}")
            elif default is not None:
                out[key] = default
    return out


def build_problem(cfg: RunConfig) -> Problem:
    t_max = cfg.t_max
    if cfg.problem == "example1":
        return presets.example1_problem(nx=cfg.nx, t_max=t_max)
    if cfg.problem == "example2":
        return presets.example2_problem(nx=cfg.nx, t_max=t_max, **cfg.example2)
    try:
        p = DomainParams(cfg.c, cfg.beta, cfg.nx)
    except ContractError as exc:
        raise ConfigValidationError("params", str(exc)) from None
    v0 = np.array(cfg.v0, dtype=float)
    kind = cfg.u0["kind"]
    if kind == "zero":
        u0 = np.zeros(p.n_interior)
    elif kind == "lift":
        u0 = dirichlet_lift(v0, p)
    elif kind == "sine":
        u0 = np.zeros(p.n_interior)
        for k, a in enumerate(cfg.u0["coefficients"], start=1):
            u0 += a * np.sin(k * np.pi * p.x / p.beta)
    else:
        center = cfg.u0.get("center", p.beta / 2)
        u0 = cfg.u0["amplitude"] * np.exp(-cfg.u0["rate"] * (p.x - center) ** 2)
    return Problem(p, np.array(cfg.B), u0, v0, t_max)


def build_spec(cfg: RunConfig, problem: Problem | None = None, scheme: Scheme | None = None) -> ExperimentSpec:
    problem = problem or build_problem(cfg)
    if cfg.reference == "exact":
        reference = Exact()
    else:
        finest = max(steps_for(t, cfg.t_max) for t in cfg.taus)
        reference = FineRun(cfg.nt_fine or cfg.reference_factor * finest)
    return ExperimentSpec(problem, scheme or cfg.scheme, cfg.taus, reference)
