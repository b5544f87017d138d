"""Experiment configuration: INI files with typed sections and body literals.

Grammar (``configparser`` INI, ``#`` and ``;`` start comments)::

    [run]            seed, jobs
    [grids]          h1, h2 (decreasing spacing lists for 1D / 2D bodies),
                     tol, safety
    [bodies]         name = literal
    [<experiment>]   experiment keys (see ``EXPERIMENT_KEYS``)

Body literals::

    interval{a, b}
    ball{r}                      # 2D ball centred at the origin
    ball{r, [cx, cy]}
    ball1{r}                     # 1D ball, i.e. interval{-r, r}
    polygon{[[nx, ny], ...], [c, ...]}   # {x : <n_k, x> <= c_k}
    box{a} | box{a, b}           # [-a, a] x [-b, b]
    smooth{a0, a1, b1, a2, b2, ...}      # support function Fourier series
    rotmean{name, m}             # Minkowski mean of m rotated copies
    combo{name0, name1, t}       # (1 - t) body0 + t body1

Lists are comma separated; pairs are written ``name0:name1``.
"""

from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .bodies import Ball, ConvexBody, Interval, Polygon, SmoothBody, minkowski_combine, rotation_mean

__all__ = [
    "ConfigError",
    "EXPERIMENTS",
    "ExperimentConfig",
    "parse_body",
    "load_config",
    "default_config_path",
]

EXPERIMENTS = (
    "bm-sweep",
    "supconv",
    "faber-krahn",
    "urysohn",
    "logconc",
    "equality-probe",
    "matrix-lemma",
)

EXPERIMENT_KEYS = {
    "bm-sweep": {"pairs", "t", "h1", "h2"},
    "supconv": {"pairs", "t", "h1", "h2", "oracle_h", "oracle_pairs", "oracle_tol"},
    "faber-krahn": {"bodies", "h1", "h2", "resolution", "T"},
    "urysohn": {"bodies", "rotations", "track", "h2"},
    "logconc": {"bodies", "h1", "h2", "tau", "tol_factor", "boundary_layers", "hessian_tau", "hessian_h"},
    "equality-probe": {"pairs", "translate", "t", "delta", "h1", "h2"},
    "matrix-lemma": {"samples", "max_dim", "cond"},
}


class ConfigError(ValueError):
    """Malformed configuration or body literal."""


_LITERAL = re.compile(r"^\s*([a-z0-9]+)\s*\{(.*)\}\s*$", re.S)


def _json_args(text: str) -> list:
    try:
        return json.loads("[" + text + "]")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse arguments {text!r}: {exc}") from None


def parse_body(literal: str, named: dict[str, ConvexBody] | None = None) -> ConvexBody:
    """Body from a literal such as ``ball{1.0}`` or ``polygon{[[1,0],[0,1]], [1,1]}``."""
    m = _LITERAL.match(literal)
    if not m:
        raise ConfigError(f"not a body literal: {literal!r}")
    kind, args = m.group(1), m.group(2)
    try:
        if kind in ("rotmean", "combo"):
            parts = [p.strip() for p in args.split(",")]
            named = named or {}
            if parts[0] not in named:
                raise ConfigError(f"{kind} refers to unknown body {parts[0]!r}")
            if kind == "rotmean":
                if len(parts) != 2:
                    raise ConfigError("rotmean{name, m}")
                m_rot = int(parts[1])
                return rotation_mean(named[parts[0]], [2 * math.pi * k / m_rot for k in range(m_rot)])
            if len(parts) != 3 or parts[1] not in named:
                raise ConfigError("combo{name0, name1, t}")
            return minkowski_combine(float(parts[2]), named[parts[0]], named[parts[1]])
        vals = _json_args(args)
        if kind == "interval":
            return Interval(float(vals[0]), float(vals[1]))
        if kind == "ball1":
            return Interval(-float(vals[0]), float(vals[0]))
        if kind == "ball":
            center = vals[1] if len(vals) > 1 else [0.0, 0.0]
            return Ball(float(vals[0]), tuple(float(c) for c in center))
        if kind == "box":
            return Polygon.box(float(vals[0]), float(vals[1]) if len(vals) > 1 else None)
        if kind == "polygon":
            return Polygon(vals[0], vals[1])
        if kind == "smooth":
            return SmoothBody([float(v) for v in vals])
    except ConfigError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"invalid {kind} literal {literal!r}: {exc}") from None
    raise ConfigError(f"unknown body kind {kind!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace("\n", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.replace("\n", ",").split(",") if x.strip()]


def _pairs(text: str) -> list[tuple[str, str]]:
    out = []
    for item in _names(text):
        a, sep, b = item.partition(":")
        if not sep or not a.strip() or not b.strip():
            raise ConfigError(f"pair {item!r} is not of the form name0:name1")
        out.append((a.strip(), b.strip()))
    return out


def _spacings(text: str, key: str) -> list[float]:
    hs = _floats(text)
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError(f"{key} must be positive and strictly decreasing, got {hs}")
    return hs


@dataclass
class ExperimentConfig:
    experiment: str
    bodies: dict[str, ConvexBody]
    literals: dict[str, str]
    params: dict
    seed: int = 0
    jobs: int = 1
    h1: list[float] = field(default_factory=lambda: [0.02, 0.01, 0.005])
    h2: list[float] = field(default_factory=lambda: [0.08, 0.04, 0.02])
    tol: float = 1e-10
    safety: float = 2.0

    def body(self, name: str) -> ConvexBody:
        try:
            return self.bodies[name]
        except KeyError:
            raise ConfigError(f"unknown body {name!r}") from None

    def spacings(self, body: ConvexBody) -> list[float]:
        return self.params.get("h1", self.h1) if body.dim == 1 else self.params.get("h2", self.h2)

    def describe(self) -> dict:
        """Plain-data view of the configuration, embedded in reports."""
        used = set(self.params.get("bodies", []))
        for key in ("pairs", "translate", "oracle_pairs"):
            for a, b in self.params.get(key, []):
                used.update((a, b))
        used.update(self.params.get("track", []))
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "grids": {"h1": self.h1, "h2": self.h2, "tol": self.tol, "safety": self.safety},
            "bodies": {k: self.literals[k] for k in sorted(used) if k in self.literals},
            "params": {k: v for k, v in sorted(self.params.items())},
        }


_PARSERS = {
    "pairs": _pairs,
    "translate": _pairs,
    "oracle_pairs": _pairs,
    "bodies": _names,
    "track": _names,
    "t": _floats,
    "rotations": lambda s: [int(x) for x in _floats(s)],
    "samples": lambda s: int(s),
    "max_dim": lambda s: int(s),
    "boundary_layers": lambda s: int(s),
}


def _parse_param(key: str, value: str):
    if key in ("h1", "h2"):
        return _spacings(value, key)
    if key in _PARSERS:
        return _PARSERS[key](value)
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} = {value!r} is not a number") from None


def default_config_path() -> Path:
    return Path(__file__).with_name("desk.ini")


def _read(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return cp


def load_config(path, experiment: str, seed: int | None = None, jobs: int | None = None) -> ExperimentConfig:
    """Parse ``path`` and return the configuration of one experiment."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cp = _read(path)
    if not cp.has_section(experiment):
        raise ConfigError(f"config has no [{experiment}] section")

    literals: dict[str, str] = {}
    bodies: dict[str, ConvexBody] = {}
    if cp.has_section("bodies"):
        for name, lit in cp.items("bodies"):
            literals[name] = lit
            bodies[name] = parse_body(lit, bodies)

    params = {}
    allowed = EXPERIMENT_KEYS[experiment]
    for key, value in cp.items(experiment):
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{experiment}]")
        params[key] = _parse_param(key, value)
    if any(not 0.0 <= t <= 1.0 for t in params.get("t", [])):
        raise ConfigError("t-values must lie in [0, 1]")
    for key in ("pairs", "translate", "oracle_pairs"):
        for a, b in params.get(key, []):
            for nm in (a, b):
                if nm not in bodies:
                    raise ConfigError(f"[{experiment}] {key} refers to unknown body {nm!r}")
    for nm in params.get("bodies", []) + params.get("track", []):
        if nm not in bodies:
            raise ConfigError(f"[{experiment}] refers to unknown body {nm!r}")

    cfg = ExperimentConfig(experiment, bodies, literals, params)
    if cp.has_section("run"):
        cfg.seed = cp.getint("run", "seed", fallback=0)
        cfg.jobs = cp.getint("run", "jobs", fallback=1)
    if cp.has_section("grids"):
        g = cp["grids"]
        if "h1" in g:
            cfg.h1 = _spacings(g["h1"], "h1")
        if "h2" in g:
            cfg.h2 = _spacings(g["h2"], "h2")
        cfg.tol = float(g.get("tol", cfg.tol))
        cfg.safety = float(g.get("safety", cfg.safety))
    if seed is not None:
        cfg.seed = int(seed)
    if jobs is not None:
        cfg.jobs = int(jobs)
    if cfg.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    return cfg


def experiments_in(path) -> list[str]:
    """Experiment sections present in a config file, in canonical order."""
    cp = _read(path)
    return [e for e in EXPERIMENTS if cp.has_section(e)]
