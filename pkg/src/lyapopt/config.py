"""Analysis configuration: strict JSON loading and validation."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from .cocycle import OneStepCocycle, as_mat2, is_invertible
from .errors import InputError
from .projcone import Multicone
from .symbolics import TransitionMatrix

SCHEMA_VERSION = "1.0"
SUPPORTED_MAJOR = 1


@dataclass
class Parameters:
    n_max: int = 8  # word length for the upper exponent bound and domination fit
    L_max: int = 8  # necklace length for the lower bound, maximizers and pinching
    n_list: list = field(default_factory=lambda: [6, 8, 10, 12])
    epsilon: list = field(default_factory=lambda: [0.05, 0.02])
    window: int = 6
    windows: list = field(default_factory=lambda: [1, 2, 4, 6])
    hereditary: bool = True
    tol_angle: float = 1e-9
    noc_margin: float = 1e-6
    search_margin: float = 1e-3
    seed_radius: float = 0.05
    seed_length: int = 3
    tol_pinch: float = 1e-6
    tie_tol: float = 1e-9
    barabanov_tol: float = 1e-6
    m_vertices: int = 720
    max_iter: int = 10_000
    residual_grid: int = 720
    kappa_length: int = 4
    defect_length: int = 8
    splitting_window: int = 32
    monotonicity_steps: list = field(default_factory=lambda: [-0.5, -0.1, 0.1, 0.5])

    _INTS = ("n_max", "L_max", "window", "seed_length", "m_vertices", "max_iter",
             "residual_grid", "kappa_length", "defect_length", "splitting_window")
    _REALS = ("tol_angle", "noc_margin", "search_margin", "seed_radius", "tol_pinch",
              "tie_tol", "barabanov_tol")

    def validate(self) -> None:
        for name in self._INTS:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise InputError(f"parameter {name} must be a positive integer, got {v!r}")
        for name in self._REALS:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not (v > 0 and math.isfinite(v)):
                raise InputError(f"parameter {name} must be a positive number, got {v!r}")
        if self.m_vertices < 8 or self.m_vertices % 2:
            raise InputError("m_vertices must be an even number >= 8")
        if not isinstance(self.hereditary, bool):
            raise InputError("hereditary must be true or false")
        for name, kind in (("n_list", int), ("windows", int), ("epsilon", float), ("monotonicity_steps", float)):
            v = getattr(self, name)
            if not isinstance(v, list) or not v:
                raise InputError(f"parameter {name} must be a non-empty list")
            for x in v:
                if isinstance(x, bool) or not isinstance(x, (int, float)) or (kind is int and not isinstance(x, int)):
                    raise InputError(f"parameter {name} has a bad entry {x!r}")
        if min(self.n_list) < 2:
            raise InputError("n_list entries must be >= 2")
        if min(self.windows) < 1:
            raise InputError("windows entries must be >= 1")
        if not all(e > 0 and math.isfinite(e) for e in self.epsilon):
            raise InputError("epsilon entries must be positive")


@dataclass
class TwistQuery:
    F: float
    G: list


@dataclass
class Output:
    report: Optional[str] = None
    svg: Optional[str] = None


@dataclass
class AnalysisConfig:
    matrices: list
    name: str = "unnamed"
    schema_version: str = SCHEMA_VERSION
    transitions: Optional[list] = None
    multicone: Optional[list] = None
    twisting: list = field(default_factory=list)
    parameters: Parameters = field(default_factory=Parameters)
    output: Output = field(default_factory=Output)

    def cocycle(self) -> OneStepCocycle:
        q = TransitionMatrix(self.transitions) if self.transitions is not None else None
        return OneStepCocycle(tuple(as_mat2(m) for m in self.matrices), q)

    def supplied_multicone(self) -> Optional[Multicone]:
        return Multicone.from_list(self.multicone) if self.multicone is not None else None

    def to_dict(self) -> dict:
        return asdict(self)


def _strict(cls, data, where: str):
    if not isinstance(data, dict):
        raise InputError(f"{where} must be a JSON object")
    known = {f.name for f in fields(cls) if not f.name.startswith("_")}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InputError(f"unknown field(s) in {where}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise InputError(f"{where}: {exc}") from None


def check_schema_version(version, what: str = "config") -> None:
    if not isinstance(version, str):
        raise InputError(f"{what} schema_version must be a string like '1.0'")
    try:
        major = int(version.split(".")[0])
    except ValueError:
        raise InputError(f"malformed {what} schema_version {version!r}") from None
    if major != SUPPORTED_MAJOR:
        raise InputError(f"unsupported {what} schema major version {major} (this build reads {SUPPORTED_MAJOR}.x)")


def config_from_dict(data: dict) -> AnalysisConfig:
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    data = dict(data)
    check_schema_version(data.get("schema_version", SCHEMA_VERSION))
    if "matrices" not in data:
        raise InputError("config needs a 'matrices' list")
    data["parameters"] = _strict(Parameters, data.get("parameters", {}), "parameters")
    data["output"] = _strict(Output, data.get("output", {}), "output")
    twisting = data.get("twisting", [])
    if not isinstance(twisting, list):
        raise InputError("twisting must be a list")
    data["twisting"] = [_strict(TwistQuery, t, "twisting query") for t in twisting]
    cfg = _strict(AnalysisConfig, data, "config")
    validate(cfg)
    return cfg


def validate(cfg: AnalysisConfig) -> None:
    if not isinstance(cfg.matrices, list) or not cfg.matrices:
        raise InputError("matrices must be a non-empty list")
    for i, m in enumerate(cfg.matrices, 1):
        mat = as_mat2(m)
        if not is_invertible(mat):
            raise InputError(f"matrix {i} is not invertible")
    cfg.cocycle()  # checks the transition matrix against the generators
    if cfg.multicone is not None:
        cfg.supplied_multicone()
    for t in cfg.twisting:
        if not isinstance(t.G, list) or not t.G:
            raise InputError("each twisting query needs a non-empty G list")
        for x in [t.F, *t.G]:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise InputError("twisting directions must be finite numbers (radians)")
    cfg.parameters.validate()


def bundled_names() -> list:
    root = resources.files("lyapopt") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(source) -> AnalysisConfig:
    """Load from a file path, or from a bundled config by name."""
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        res = resources.files("lyapopt") / "configs" / f"{source}.json"
        if not res.is_file():
            raise InputError(f"no config file {source!r} and no bundled config of that name "
                             f"(bundled: {', '.join(bundled_names())})")
        text = res.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data)
