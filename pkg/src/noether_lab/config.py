"""Scenario files: INI-style ``key = value`` sections, one scenario per file.

Example::

    [scenario]
    model = nonrel
    seed = 7
    N = 200

    [lagrangian]
    kind = counterexample_b
    m = 1 s/m2
    B = [[0,0,0,0],[0,0,0.7,0],[0,-0.7,0,0],[0,0,0,0]]

    [endpoints]
    start = [0s, 0m, 0m, 0m]
    end = [2s, 1m, -1m, 0.5m]

    [expect]
    pass = translation_*
    fail = rotation_1

Sections ``[other]`` (second Lagrangian for ``equiv``), ``[sampling]``
(overrides for :class:`~noether_lab.lagrangians.SamplingBox`), ``[path]``
(waypoints for ``proper-time``) and ``[exp]`` (generator literal and
parameter) are optional. Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .groups import Generator, parse_generator
from .lagrangians import CounterexampleB, FreeNonRel, FreeRel, Lagrangian, SamplingBox, UserLagrangian
from .quantities import DIMENSIONLESS, DimensionMismatch, Quantity, parse_quantity
from .spacetime import Event, ModelKind, parse_vector
from .variational import GAUGES

__all__ = ["ConfigError", "Scenario", "load_scenario", "parse_scenario", "resolve_seed", "SEED_ENV"]

SEED_ENV = "NOETHER_LAB_SEED"

_KEYS = {
    "scenario": {"model", "seed", "n", "gauge", "output", "name", "n_random"},
    "lagrangian": {"kind", "m", "c", "b", "o", "phi", "expression"},
    "other": {"kind", "m", "c", "b", "o", "phi", "expression"},
    "endpoints": {"start", "end"},
    "sampling": {"center", "half_width", "points", "directions", "tol", "min_points", "max_speed"},
    "path": {"waypoints"},
    "exp": {"generator", "s"},
    "expect": {
        "pass", "fail", "all_pass", "straight", "equivalent",
        "momentum_deviation_min", "momentum_deviation_max",
        "action", "proper_time", "tol", "member",
    },
}


class ConfigError(ValueError):
    """Bad scenario content; carries the section/key that failed."""

    def __init__(self, where: str, message: str) -> None:
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class Scenario:
    model: ModelKind
    name: str = "scenario"
    seed: int | None = None
    N: int = 200
    gauge: str = "penalty"
    n_random: int = 20
    output: str | None = None
    lagrangian: Lagrangian | None = None
    other: Lagrangian | None = None
    start: Event | None = None
    end: Event | None = None
    waypoints: list[Event] = field(default_factory=list)
    box: SamplingBox = field(default_factory=SamplingBox)
    generator: Generator | None = None
    s: float = 1.0
    expect: dict[str, str] = field(default_factory=dict)


def resolve_seed(cli_seed: int | None, config_seed: int | None) -> int:
    """CLI flag, then config file, then the environment, then 0."""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(SEED_ENV, f"not an integer: {env!r}") from None
    return 0


def _number(where: str, text: str) -> float | Quantity:
    try:
        q = parse_quantity(text)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None
    return q if q.dim != DIMENSIONLESS else q.value


def _plain_float(where: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(where, f"expected a number, got {text!r}") from None


def _vector(where: str, text: str, model: ModelKind) -> np.ndarray:
    try:
        return parse_vector(text, model).values
    except (ValueError, DimensionMismatch) as exc:
        raise ConfigError(where, str(exc)) from None


def _event(where: str, text: str, model: ModelKind) -> Event:
    try:
        vec = parse_vector(text, model)
    except (ValueError, DimensionMismatch) as exc:
        raise ConfigError(where, str(exc)) from None
    if vec.dim != DIMENSIONLESS:
        raise ConfigError(where, "an event needs time/length components")
    return Event(vec)


def _lagrangian(section: configparser.SectionProxy, model: ModelKind) -> Lagrangian:
    where = f"[{section.name}]"
    kind = section.get("kind", "free").strip().lower()
    m = _number(f"{where} m", section["m"]) if "m" in section else 1.0
    try:
        if kind == "free":
            if model is ModelKind.NONREL:
                c = _vector(f"{where} c", section["c"], model) if "c" in section else None
                return FreeNonRel(m, c)
            if "c" in section:
                raise ConfigError(f"{where} c", "the relativistic free Lagrangian has no velocity parameter")
            return FreeRel(m)
        if kind == "counterexample_b":
            if "b" not in section:
                raise ConfigError(where, "counterexample_b needs B")
            try:
                B = np.array(json.loads(section["b"]), dtype=float)
            except (json.JSONDecodeError, ValueError) as exc:
                raise ConfigError(f"{where} B", f"not a 4x4 matrix: {exc}") from None
            if B.shape != (4, 4):
                raise ConfigError(f"{where} B", "not a 4x4 matrix")
            o = _vector(f"{where} o", section["o"], model) if "o" in section else None
            phi = section.get("phi", "kinetic" if model is ModelKind.NONREL else "proper").strip()
            return CounterexampleB(B, o=o, phi=phi, m=m, model=model)
        if kind == "expression":
            if "expression" not in section:
                raise ConfigError(where, "kind = expression needs an expression key")
            return UserLagrangian(section["expression"], model)
    except ConfigError:
        raise
    except (ValueError, DimensionMismatch) as exc:
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where} kind", f"unknown Lagrangian kind {kind!r}")


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text, source=name)
    except configparser.Error as exc:
        raise ConfigError(name, str(exc).splitlines()[0]) from None
    for sec in cp.sections():
        if sec not in _KEYS:
            raise ConfigError(f"[{sec}]", "unknown section")
        extra = set(cp[sec]) - _KEYS[sec]
        if extra:
            raise ConfigError(f"[{sec}]", f"unknown keys {sorted(extra)}")
    if "scenario" not in cp:
        raise ConfigError(name, "missing [scenario] section")
    sc = cp["scenario"]
    try:
        model = ModelKind.parse(sc.get("model", "nonrel"))
    except ValueError as exc:
        raise ConfigError("[scenario] model", str(exc)) from None
    out = Scenario(model=model, name=sc.get("name", name))
    try:
        if "seed" in sc:
            out.seed = int(sc["seed"])
            if out.seed < 0:
                raise ValueError("seed must be non-negative")
        out.N = int(sc.get("n", "200"))
        out.n_random = int(sc.get("n_random", "20"))
    except ValueError as exc:
        raise ConfigError("[scenario]", str(exc)) from None
    if out.N < 8:
        raise ConfigError("[scenario] N", "N must be at least 8")
    out.gauge = sc.get("gauge", "penalty").strip()
    if out.gauge not in GAUGES:
        raise ConfigError("[scenario] gauge", f"must be one of {GAUGES}")
    out.output = sc.get("output")

    if "lagrangian" in cp:
        out.lagrangian = _lagrangian(cp["lagrangian"], model)
    if "other" in cp:
        out.other = _lagrangian(cp["other"], model)
    if "endpoints" in cp:
        ep = cp["endpoints"]
        if "start" not in ep or "end" not in ep:
            raise ConfigError("[endpoints]", "needs both start and end")
        out.start = _event("[endpoints] start", ep["start"], model)
        out.end = _event("[endpoints] end", ep["end"], model)
    if "path" in cp:
        raw = cp["path"].get("waypoints", "")
        out.waypoints = [_event("[path] waypoints", line, model) for line in raw.splitlines() if line.strip()]
    if "sampling" in cp:
        sm = cp["sampling"]
        kw: dict[str, object] = {}
        for key in ("half_width", "tol", "max_speed"):
            if key in sm:
                kw[key] = _plain_float(f"[sampling] {key}", sm[key])
        for key in ("points", "directions", "min_points"):
            if key in sm:
                kw[key] = int(_plain_float(f"[sampling] {key}", sm[key]))
        if "center" in sm:
            kw["center"] = tuple(_vector("[sampling] center", sm["center"], model))
        out.box = replace(out.box, **kw)
    if "exp" in cp:
        ex = cp["exp"]
        if "generator" in ex:
            try:
                out.generator = parse_generator(ex["generator"], model)
            except (ValueError, DimensionMismatch) as exc:
                raise ConfigError("[exp] generator", str(exc)) from None
        if "s" in ex:
            out.s = _plain_float("[exp] s", ex["s"])
    if "expect" in cp:
        out.expect = {k: v.strip() for k, v in cp["expect"].items()}
    return out


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or str(exc)) from None
    return parse_scenario(text, name=path.stem)
