"""Experiment configuration: JSON schema, validation and model/layout builders."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import numpy as np

from .conic import SolverOptions
from .errors import InvalidInputError
from .models import (
    Graph,
    LocalHamiltonian,
    build_disordered_tfi,
    build_hubbard_spinless,
    build_sk,
    build_tfi,
    build_xxz,
    erdos_renyi,
)
from .relax import SCHEMES, ClusterLayout

MODEL_TYPES = ("tfi", "xxz", "hubbard", "sk", "disordered_tfi")

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "ExperimentConfig",
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": list(MODEL_TYPES)},
                "graph": {
                    "oneOf": [
                        {"type": "string", "pattern": r"^er:\d+:(0(\.\d+)?|1(\.0+)?)(:\d+)?$"},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["file"],
                            "properties": {"file": {"type": "string"}},
                        },
                    ]
                },
                "n": _POS_INT,
                "coefficients": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {k: _NUM for k in ("h", "J", "Jz", "t", "U", "h0", "J0", "mean", "sigma")},
                },
            },
        },
        "layout": {
            "oneOf": [
                {"type": "string", "pattern": r"^uniform:\d+$"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["file"],
                    "properties": {"file": {"type": "string"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["groups"],
                    "properties": {
                        "groups": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}}
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["optimize"],
                    "properties": {
                        "optimize": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["k"],
                            "properties": {"k": _POS_INT, "keyword": {"enum": ["overlapping", "non-overlapping"]}},
                        }
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["successive"],
                    "properties": {
                        "successive": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["max"],
                            "properties": {"max": _POS_INT, "k": {"type": "integer", "minimum": 0}, "n": _POS_INT},
                        }
                    },
                },
            ]
        },
        "schemes": {"type": "array", "minItems": 1, "items": {"enum": list(SCHEMES)}},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol_gap": {"type": "number", "exclusiveMinimum": 0},
                "tol_feas": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": _POS_INT,
                "method": {"enum": ["auto", "ipm", "admm"]},
                "time_limit": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "exact": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
        "instances": _POS_INT,
        "k": _POS_INT,
        "keyword": {"enum": ["overlapping", "non-overlapping"]},
        "draws": {"type": "integer", "minimum": 2},
        "restarts": _POS_INT,
        "marginals": {"enum": ["relaxed", "exact"]},
        "out": {"type": "string"},
    },
}


def validate_config(cfg: Mapping[str, Any]) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInputError(f"config error at {where}: {exc.message}") from None


def load_config(path: str | Path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from None
    validate_config(cfg)
    return cfg


def config_digest(cfg: Mapping[str, Any]) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class GraphSource:
    """Either ``er:n:p[:seed]`` or an edge-list JSON file."""

    n: int | None
    p: float | None
    seed: int | None
    file: str | None

    @classmethod
    def parse(cls, spec: Any) -> "GraphSource":
        if isinstance(spec, Mapping):
            return cls(None, None, None, str(spec["file"]))
        parts = str(spec).split(":")
        if parts[0] != "er" or len(parts) not in (3, 4):
            raise InvalidInputError(f"bad graph source {spec!r}")
        seed = int(parts[3]) if len(parts) == 4 else None
        return cls(int(parts[1]), float(parts[2]), seed, None)

    def graph(self, seed: int) -> Graph:
        """The graph; ER sources without a fixed seed use ``seed``."""
        if self.file is not None:
            return Graph.load(self.file)
        return erdos_renyi(self.n, self.p, self.seed if self.seed is not None else seed)


def build_model(model: Mapping[str, Any], seed: int = 0) -> LocalHamiltonian:
    """Hamiltonian from the ``model`` section (``seed`` feeds unseeded graphs and disorder)."""
    kind = model["type"]
    co = dict(model.get("coefficients", {}))
    if kind == "sk":
        n = model.get("n")
        if n is None:
            raise InvalidInputError("sk model needs 'n'")
        return build_sk(int(n), co.get("h0", 1.0), co.get("J0", 1.0), seed)
    if "graph" not in model:
        raise InvalidInputError(f"{kind} model needs a graph")
    g = GraphSource.parse(model["graph"]).graph(seed)
    if kind == "tfi":
        return build_tfi(g, np.full(g.n, co.get("h", 1.0)), np.full(len(g.edges), co.get("J", 1.0)))
    if kind == "xxz":
        return build_xxz(g, co.get("Jz", 1.0))
    if kind == "hubbard":
        return build_hubbard_spinless(g, co.get("t", 1.0), co.get("U", 1.0))
    if kind == "disordered_tfi":
        return build_disordered_tfi(g, co.get("h", 1.0), co.get("mean", 1.0), co.get("sigma", 1.0), seed)
    raise InvalidInputError(f"unknown model type {kind!r}")


def static_layout(H: LocalHamiltonian, spec: Any) -> ClusterLayout | None:
    """Layout for ``uniform:k``, ``{"file"}`` or ``{"groups"}``; ``None`` for derived layouts."""
    if spec is None:
        return ClusterLayout.singletons(H)
    if isinstance(spec, str):
        return ClusterLayout.uniform(H, int(spec.split(":")[1]))
    if "groups" in spec:
        return ClusterLayout.from_groups(H, spec["groups"])
    if "file" in spec:
        try:
            data = json.loads(Path(spec["file"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read layout {spec['file']}: {exc}") from None
        groups = data["groups"] if isinstance(data, Mapping) else data
        return ClusterLayout.from_groups(H, groups)
    return None


def solver_options(cfg: Mapping[str, Any]) -> SolverOptions:
    return SolverOptions(**cfg.get("solver", {}))


def with_overrides(cfg: Mapping[str, Any], **overrides: Any) -> dict:
    out = copy.deepcopy(dict(cfg))
    for key, val in overrides.items():
        if val is not None:
            out[key] = val
    validate_config(out)
    return out
