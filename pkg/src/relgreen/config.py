"""Run configuration schema (YAML or JSON files).

Every block rejects unknown keys.  A config may carry several command
blocks; the subcommand picks one.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .core import ParticleConfig
from .errors import ConfigError
from .potentials import Potential


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Units(_Block):
    mass: float = Field(1.0, gt=0)
    light_speed: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)

    def particle(self) -> ParticleConfig:
        return ParticleConfig(self.mass, self.light_speed, self.hbar)


class Range(_Block):
    start: float
    stop: float
    num: int = Field(ge=0)


Axis = Union[List[float], Range, float]


def axis_values(axis: Axis) -> np.ndarray:
    if isinstance(axis, Range):
        return np.linspace(axis.start, axis.stop, axis.num)
    return np.atleast_1d(np.asarray(axis, dtype=float))


class PotentialSpec(_Block):
    kind: Literal["zero", "constant", "square-well", "tabulated"] = "zero"
    value: Optional[float] = None
    v_in: Optional[float] = None
    left: Optional[float] = None
    right: Optional[float] = None
    v_out: float = 0.0
    x: Optional[List[float]] = None
    v: Optional[List[float]] = None

    @model_validator(mode="after")
    def _fields_for_kind(self):
        need = {"constant": ("value",), "square-well": ("v_in", "left", "right"), "tabulated": ("x", "v")}
        missing = [k for k in need.get(self.kind, ()) if getattr(self, k) is None]
        if missing:
            raise ValueError(f"potential kind {self.kind!r} requires {missing}")
        return self

    def build(self) -> Potential:
        if self.kind == "zero":
            return Potential.zero()
        if self.kind == "constant":
            return Potential.constant(self.value)
        if self.kind == "square-well":
            return Potential.square_well(self.v_in, self.left, self.right, self.v_out)
        return Potential.tabulated(self.x, self.v)


class FreeBlock(_Block):
    x_b: Axis
    x_a: Axis
    energy: Axis
    energy_imag: float = 0.0


class WallBlock(_Block):
    a: float
    x_b: Axis
    x_a: Axis
    energy: Axis
    energy_imag: float = 0.0
    potential: PotentialSpec = PotentialSpec()


class BoxBlock(_Block):
    a: float
    b: float
    x_b: Axis
    x_a: Axis
    energy: Axis
    energy_imag: float = 0.0
    potential: PotentialSpec = PotentialSpec()

    @model_validator(mode="after")
    def _ordered(self):
        if not self.a < self.b:
            raise ValueError("box needs a < b")
        return self


class SpectrumBlock(_Block):
    a: float
    b: float
    e_min: float
    e_max: float
    n_scan: int = Field(256, ge=2)
    potential: PotentialSpec = PotentialSpec()

    @model_validator(mode="after")
    def _checks(self):
        if not self.a < self.b:
            raise ValueError("box needs a < b")
        if self.potential.kind not in ("zero", "constant"):
            raise ValueError("spectrum supports zero or constant potentials")
        return self


class MapExpressions(_Block):
    h: str
    dh: Optional[str] = None
    d2h: Optional[str] = None
    d3h: Optional[str] = None
    domain: Optional[Tuple[float, float]] = None

    def build(self, fd_fallback: bool = True):
        from .dk import DKMap

        fns = [None if e is None else compile_expression(e) for e in (self.h, self.dh, self.d2h, self.d3h)]
        domain = self.domain if self.domain is not None else (-math.inf, math.inf)
        return DKMap(*fns, domain=domain, fd_fallback=fd_fallback, name="expression")


def compile_expression(text: str):
    """Compile a formula in the single variable ``q`` into a float function."""
    import sympy

    q = sympy.Symbol("q")
    try:
        expr = sympy.sympify(text, locals={"q": q}, rational=False)
    except (sympy.SympifyError, SyntaxError, TypeError) as err:
        raise ConfigError(f"cannot parse map expression {text!r}: {err}") from None
    extra = expr.free_symbols - {q}
    if extra:
        raise ConfigError(f"map expression {text!r} uses unknown symbols {sorted(map(str, extra))}")
    fn = sympy.lambdify(q, expr, "math")
    return lambda x: float(fn(x))


class VeffBlock(_Block):
    map: Union[Literal["identity", "square", "exponential"], MapExpressions]
    q: Axis
    rho: float = Field(1.0, gt=0)
    fd_fallback: bool = True


class PathBlock(_Block):
    points: Optional[List[List[float]]] = None
    file: Optional[str] = None
    eps: float = Field(gt=0)
    rho: Union[float, List[float]] = 1.0
    energy: float = 0.0
    energy_imag: float = 0.0
    potential: float = 0.0
    vector_potential: Optional[List[float]] = None
    charge: float = 1.0
    include_rest_mass: bool = True

    @model_validator(mode="after")
    def _one_source(self):
        if (self.points is None) == (self.file is None):
            raise ValueError("path needs exactly one of 'points' or 'file'")
        return self


class GeometryBlock(_Block):
    map: Literal["identity", "polar", "spherical"]
    dim: int = Field(1, ge=1)
    points: List[List[float]] = []
    path: Optional[PathBlock] = None


class OracleBlock(_Block):
    potential: PotentialSpec = PotentialSpec()
    x_b: float = 1.0
    x_a: float = 0.0
    energy: float = 0.0
    energy_imag: float = 0.0
    levels: int = Field(3, ge=1)
    spacing: Optional[float] = Field(None, gt=0)
    eps: Optional[float] = Field(None, gt=0)
    margin: float = Field(5.0, gt=0)
    extent: Optional[Tuple[float, float]] = None
    L_max: Optional[float] = Field(None, gt=0)
    random_points: int = Field(0, ge=0)
    energy_range: Tuple[float, float] = (-0.9, 0.9)
    separation_range: Tuple[float, float] = (0.2, 2.0)


class RunConfig(_Block):
    units: Units = Units()
    format: Literal["csv", "json"] = "json"
    out: Optional[str] = None
    tol: Optional[float] = Field(None, gt=0)
    seed: int = 0
    free: Optional[FreeBlock] = None
    wall: Optional[WallBlock] = None
    box: Optional[BoxBlock] = None
    spectrum: Optional[SpectrumBlock] = None
    veff: Optional[VeffBlock] = None
    geometry: Optional[GeometryBlock] = None
    oracle: Optional[OracleBlock] = None


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "config schema error:\n" + "\n".join(lines)


def parse_config(data, overrides: Optional[dict] = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config schema error:\n  <root>: top level must be a mapping")
    data = dict(data)
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_error(err)) from None


def load_config(path: Union[str, Path], overrides: Optional[dict] = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML/JSON: {err}") from None
    return parse_config(data if data is not None else {}, overrides)


def config_echo(cfg: RunConfig) -> dict:
    """JSON-safe dump that re-validates to the same config."""
    return cfg.model_dump(mode="json", exclude_none=True)
