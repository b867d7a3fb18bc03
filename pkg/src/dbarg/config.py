"""Run configuration: tolerances, truncation caps, output options, seed."""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Optional

from .algebra import SERIES_CAP
from .errors import InvalidSpec
from .quadrature import MAX_NODES

ENV_VAR = "DBARG_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    series_tol: float = 1e-15
    quad_tol: float = 1e-12
    contour: float = 0.5
    max_nodes: int = MAX_NODES
    series_cap: int = SERIES_CAP
    output_format: str = "json"
    output: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        for name in ("series_tol", "quad_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise InvalidSpec(f"{name} must be positive, got {value!r}")
        for name in ("max_nodes", "series_cap"):
            value = getattr(self, name)
            if not (isinstance(value, int) and not isinstance(value, bool) and value > 0):
                raise InvalidSpec(f"{name} must be a positive integer, got {value!r}")
        if self.output_format not in ("json", "csv"):
            raise InvalidSpec(f"output_format must be json or csv, got {self.output_format!r}")
        if not isinstance(self.seed, int):
            raise InvalidSpec("seed must be an integer")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_config(path: Optional[str] = None) -> RunConfig:
    """Read a JSON config; $DBARG_CONFIG wins over ``path``. Missing path gives defaults.

    A plain ``tol`` key sets both tolerances.
    """
    path = os.environ.get(ENV_VAR) or path
    if not path:
        return RunConfig()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidSpec("config file must hold a JSON object")
    if "tol" in data:
        tol = data.pop("tol")
        data.setdefault("series_tol", tol)
        data.setdefault("quad_tol", tol)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise InvalidSpec(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**data)
