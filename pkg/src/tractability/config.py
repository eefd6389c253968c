"""Run configuration: parsing structured files into library objects."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .complexity import DomainRestriction
from .conditions import DEFAULT_D_RANGE, ConditionSpec
from .errors import ConfigError, InvalidSpec, SpectrumError
from .families import spectrum_family
from .tfun import HFun, TractFun, make_tfun

COMMANDS = ("complexity", "check", "search", "verify-equivalence", "validate")
FORMATS = ("json", "csv", "text")


@dataclass
class RunConfig:
    command: str
    raw: Dict[str, Any]
    format: str = "json"
    seed: Optional[int] = None
    overrides: Dict[str, Any] = field(default_factory=dict)

    def echo(self) -> dict:
        out = copy.deepcopy(self.raw)
        out.update(self.overrides)
        out["command"] = self.command
        out["format"] = self.format
        out["seed"] = self.seed
        return out

    # -- accessors -------------------------------------------------------

    def get(self, key, default=None):
        if key in self.overrides:
            return self.overrides[key]
        return self.raw.get(key, default)

    def d_range(self) -> tuple:
        d_max = self.get("d_max")
        dr = self.raw.get("d_range")
        if dr is None:
            dr = DEFAULT_D_RANGE
        dr = tuple(int(d) for d in dr)
        if d_max is not None:
            dr = tuple(d for d in dr if d <= int(d_max)) or (1,)
        return dr

    def spectrum(self):
        spec = self.raw.get("spectrum")
        if spec is None:
            raise ConfigError("config needs a 'spectrum' section")
        return parse_spectrum(spec)

    def tfun(self, key: str = "tfun") -> TractFun:
        spec = self.raw.get(key)
        if spec is None:
            raise ConfigError(f"config needs a '{key}' section")
        return parse_tfun(spec)

    def condition(self) -> ConditionSpec:
        cond = dict(self.raw.get("condition") or {})
        if "which" not in cond:
            raise ConfigError("condition needs 'which'")
        kwargs: Dict[str, Any] = {
            "which": cond["which"],
            "spectrum": self.spectrum(),
            "d_range": self.d_range(),
            "budget": int(self.get("budget", 10**6)),
            "tail_tol": float(self.get("tail_tol", 1e-6)),
            "jobs": int(self.get("jobs", 1)),
        }
        if not cond["which"].startswith("kw"):
            kwargs["tf"] = self.tfun()
        for k in ("L", "tau", "C", "tau1", "tau2", "tau3"):
            if k in cond:
                kwargs[k] = float(cond[k])
        if "c_list" in cond:
            kwargs["c_list"] = tuple(float(c) for c in cond["c_list"])
        if "h" in cond:
            kwargs["h"] = parse_h(cond["h"])
        if "restriction" in cond:
            kwargs["restriction"] = parse_restriction(cond["restriction"])
        try:
            return ConditionSpec(**kwargs)
        except InvalidSpec as exc:
            raise ConfigError(str(exc)) from exc


def parse_spectrum(spec):
    if not isinstance(spec, dict) or "id" not in spec:
        raise ConfigError("spectrum must be a mapping with an 'id'")
    try:
        return spectrum_family(spec["id"], spec.get("params") or {})
    except (InvalidSpec, SpectrumError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad spectrum: {exc}") from exc


def parse_tfun(spec) -> TractFun:
    if not isinstance(spec, dict) or "family" not in spec or "p" not in spec:
        raise ConfigError("tfun must be a mapping with 'family' and 'p'")
    opts = {k: v for k, v in spec.items() if k not in ("family", "p")}
    p = spec["p"]
    p = [p] if isinstance(p, (int, float)) else list(p)
    try:
        return make_tfun(spec["family"], p, **opts)
    except (InvalidSpec, TypeError) as exc:
        raise ConfigError(f"bad tfun: {exc}") from exc


def parse_h(spec) -> HFun:
    if isinstance(spec, str):
        spec = {"family": spec}
    try:
        return HFun(spec.get("family", "exp"), float(spec.get("r", 1.0)))
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from exc


def parse_restriction(spec) -> DomainRestriction:
    if isinstance(spec, (int, float)):
        spec = {"kind": "constant", "value": spec}
    try:
        table = spec.get("table")
        if table is not None:
            table = {int(k): float(v) for k, v in table.items()}
        return DomainRestriction(spec.get("kind", "constant"), float(spec.get("value", 0.0)),
                                 table, float(spec.get("default", 0.0)))
    except (InvalidSpec, AttributeError, ValueError) as exc:
        raise ConfigError(f"bad restriction: {exc}") from exc


def load_config_file(path) -> dict:
    text = Path(path).read_text()
    try:
        if str(path).endswith(".json"):
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def to_jsonable(obj):
    """Replace non-finite floats by strings so output is strict JSON."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return to_jsonable(obj.item())
    return obj


def flatten_rows(result) -> List[dict]:
    """Best-effort tabular view of a report for CSV/text output."""
    if isinstance(result, dict):
        for key in ("rows", "per_d", "grid", "verdict_trace", "per_c", "reports"):
            if key in result and isinstance(result[key], list):
                return [r if isinstance(r, dict) else {"value": r} for r in result[key]]
        return [{k: v for k, v in result.items() if not isinstance(v, (list, dict))}]
    if isinstance(result, list):
        return [r if isinstance(r, dict) else {"value": r} for r in result]
    return [{"value": result}]
