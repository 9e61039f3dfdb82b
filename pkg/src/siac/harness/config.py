"""Declarative experiment configuration.

One JSON document describes a whole experiment: the advection problem, the
degree/resolution sweep, the filter variants to apply, time-step knobs, and
(optionally) reference error tables with comparison tolerances.  Bundled
presets reproduce the published convergence tables; CLI flags override
individual fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from importlib import resources
from typing import Optional

import numpy as np

from .. import dgsolver


class ConfigError(ValueError):
    """Configuration parse/validation problem, naming the offending field."""


INITIAL_CONDITIONS = {
    "sin_2pi_x": (1, lambda x: np.sin(2.0 * np.pi * np.asarray(x))),
    "sin_x_plus_y": (2, lambda x, y: np.sin(np.asarray(x) + np.asarray(y))),
}

# error values below this sit at the binary64 floor and are not compared
DEFAULT_FLOOR = 5e-15


@dataclass(frozen=True)
class ProblemSpec:
    dim: int
    initial: str
    speed: tuple
    final_time: float
    domain: tuple

    def build(self) -> dgsolver.AdvectionProblem:
        if self.initial not in INITIAL_CONDITIONS:
            raise ConfigError(
                f"problem.initial: unknown initial condition {self.initial!r}; "
                f"expected one of {sorted(INITIAL_CONDITIONS)}"
            )
        dim, fn = INITIAL_CONDITIONS[self.initial]
        if dim != self.dim:
            raise ConfigError(f"problem.initial: {self.initial!r} is {dim}-dimensional, problem.dim is {self.dim}")
        return dgsolver.AdvectionProblem(tuple(self.speed), fn, self.final_time, self.initial)

    def mesh(self, n: int) -> dgsolver.Mesh:
        return dgsolver.Mesh(tuple(tuple(b) for b in self.domain), (n,) * self.dim)


@dataclass(frozen=True)
class FilterVariant:
    name: str
    basis: str = "box"
    nodes: str = "standard"
    epsilon: Optional[str] = None  # fraction string like "1/4"; None = 1/(2k) for compact

    def epsilon_fraction(self) -> Optional[Fraction]:
        if self.epsilon is None:
            return None
        try:
            return Fraction(self.epsilon)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"filters[{self.name}].epsilon: not a rational number: {self.epsilon!r}") from e


@dataclass(frozen=True)
class RunConfig:
    name: str
    problem: ProblemSpec
    degrees: tuple[int, ...]
    elements: tuple[int, ...]
    filters: tuple[FilterVariant, ...]
    policy: str = "periodic_wrap"
    scaling_rule: str = "h"
    cfl: dict = field(default_factory=dict)  # degree -> cfl; default 0.05
    pts_per_element: Optional[int] = None
    seed: int = 20260808
    output_dir: str = "out"
    reference: dict = field(default_factory=dict)  # column -> {degree: {N: value}}
    tolerances: dict = field(default_factory=dict)
    floor: float = DEFAULT_FLOOR
    title: str = ""

    def cfl_for(self, degree: int) -> float:
        return float(self.cfl.get(str(degree), self.cfl.get(degree, 0.05)))

    def reference_value(self, column: str, degree: int, n: int) -> Optional[float]:
        col = self.reference.get(column)
        if not col:
            return None
        row = col.get(str(degree), col.get(degree))
        if not row:
            return None
        v = row.get(str(n), row.get(n))
        return None if v is None else float(v)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["problem"] = asdict(self.problem)
        d["filters"] = [asdict(f) for f in self.filters]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            p = d["problem"]
            problem = ProblemSpec(
                dim=int(p["dim"]),
                initial=str(p["initial"]),
                speed=tuple(float(s) for s in p["speed"]),
                final_time=float(p["final_time"]),
                domain=tuple(tuple(float(v) for v in b) for b in p["domain"]),
            )
        except KeyError as e:
            raise ConfigError(f"problem: missing field {e.args[0]!r}") from e
        try:
            filters = tuple(
                FilterVariant(
                    name=str(f["name"]),
                    basis=str(f.get("basis", "box")),
                    nodes=str(f.get("nodes", "standard")),
                    epsilon=f.get("epsilon"),
                )
                for f in d.get("filters", [])
            )
        except KeyError as e:
            raise ConfigError(f"filters: each variant needs field {e.args[0]!r}") from e
        degrees = tuple(int(k) for k in d.get("degrees", (1, 2, 3)))
        elements = tuple(int(n) for n in d.get("elements", (20, 40, 80)))
        if any(k < 1 or k > 4 for k in degrees):
            raise ConfigError(f"degrees: must lie in [1, 4], got {degrees}")
        if any(n2 <= n1 for n1, n2 in zip(elements, elements[1:])):
            raise ConfigError(f"elements: must be strictly increasing, got {elements}")
        policy = d.get("policy", "periodic_wrap")
        if policy not in ("periodic_wrap", "position_dependent"):
            raise ConfigError(f"policy: expected periodic_wrap or position_dependent, got {policy!r}")
        for f in filters:
            if f.basis not in ("box", "raised_cosine", "bump"):
                raise ConfigError(f"filters[{f.name}].basis: unknown basis {f.basis!r}")
            if f.nodes not in ("standard", "compact"):
                raise ConfigError(f"filters[{f.name}].nodes: unknown node kind {f.nodes!r}")
            eps = f.epsilon_fraction()
            if eps is not None and not 0 < eps <= 1:
                raise ConfigError(
                    f"filters[{f.name}].epsilon: must satisfy 0 < epsilon <= 1, got {f.epsilon}"
                )
        return cls(
            name=str(d.get("name", "run")),
            problem=problem,
            degrees=degrees,
            elements=elements,
            filters=filters,
            policy=policy,
            scaling_rule=str(d.get("scaling_rule", "h")),
            cfl={str(k): float(v) for k, v in d.get("cfl", {}).items()},
            pts_per_element=d.get("pts_per_element"),
            seed=int(d.get("seed", 20260808)),
            output_dir=str(d.get("output_dir", "out")),
            reference=d.get("reference", {}),
            tolerances=d.get("tolerances", {}),
            floor=float(d.get("floor", DEFAULT_FLOOR)),
            title=str(d.get("title", "")),
        )

    @classmethod
    def from_json(cls, s: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(s))
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e


def preset_names() -> list[str]:
    files = resources.files("siac.harness") / "presets"
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> RunConfig:
    path = resources.files("siac.harness") / "presets" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return RunConfig.from_json(path.read_text())


def load_config(name_or_path: str) -> RunConfig:
    """Resolve a preset name or a JSON file path to a RunConfig."""
    import os

    if os.path.exists(name_or_path):
        with open(name_or_path) as f:
            return RunConfig.from_json(f.read())
    return load_preset(name_or_path)
