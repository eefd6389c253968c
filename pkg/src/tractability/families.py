"""Registry of built-in spectrum families and curated fixtures with known classifications."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .errors import InvalidSpec, SpectrumError
from .spectrum import (
    DScaledGeometricSpectrum,
    ExplicitSpectrum,
    GeometricSpectrum,
    KorobovSpectrum,
    LogSlowSpectrum,
    PSeriesSpectrum,
    SpectrumHandle,
    SuperExponentialSpectrum,
)

__all__ = [
    "SpectrumFamily",
    "FamilySpec",
    "Classification",
    "FAMILY_IDS",
    "make_family",
    "spectrum_family",
    "weight_sequence",
    "curated_families",
    "get_curated",
]


def weight_sequence(spec, n: int) -> list:
    """Expand a weight spec to ``n`` entries.

    ``spec`` is a list (used as is) or a generator mapping: ``{"generator":
    "geometric", "c": c, "r": r}`` gives ``c * r**j`` and ``{"generator":
    "power", "c": c, "s": s}`` gives ``c * j**s`` for ``j = 1..n``.
    """
    if isinstance(spec, dict):
        gen = spec.get("generator")
        c = float(spec.get("c", 1.0))
        if gen == "geometric":
            r = float(spec["r"])
            return [c * r ** j for j in range(1, n + 1)]
        if gen == "power":
            s = float(spec["s"])
            return [c * float(j) ** s for j in range(1, n + 1)]
        if gen == "constant":
            return [c] * n
        raise InvalidSpec(f"unknown weight generator {gen!r}")
    seq = [float(x) for x in spec]
    if len(seq) < n:
        raise SpectrumError(f"weight list has {len(seq)} entries, dimension {n} requested")
    return seq[:n]


def _explicit(params, d):
    tail = params.get("tail")
    if isinstance(tail, dict):
        tail = (tail.get("kind", "geometric"), tail["ratio"])
    elif isinstance(tail, list):
        tail = tuple(tail)
    return ExplicitSpectrum(params["values"], tail, d)


def _korobov(params, d):
    return KorobovSpectrum(
        params.get("omega", 0.5),
        weight_sequence(params["a"], d),
        weight_sequence(params["b"], d),
        d,
    )


_BUILDERS = {
    "geometric": lambda p, d: GeometricSpectrum(p.get("ratio", 0.5), d),
    "p-series": lambda p, d: PSeriesSpectrum(p.get("alpha", 2.0), d),
    "log-slow": lambda p, d: LogSlowSpectrum(d),
    "super-exponential": lambda p, d: SuperExponentialSpectrum(d),
    "korobov": _korobov,
    "d-scaled-geometric": lambda p, d: DScaledGeometricSpectrum(p.get("ratio", 0.5), d),
    "explicit": _explicit,
}

FAMILY_IDS = tuple(_BUILDERS)

# families whose values do not depend on d share one handle across dimensions
_D_FREE = {"geometric", "p-series", "log-slow", "super-exponential", "explicit"}


def _freeze(obj):
    if isinstance(obj, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze(v) for v in obj)
    return obj


class SpectrumFamily:
    """Callable ``d -> SpectrumHandle`` with per-dimension handle caching.

    Caching matters for Korobov families: the enumeration state lives on the
    handle, so repeated queries at the same ``d`` reuse it.
    """

    def __init__(self, id: str, params: Optional[dict] = None):
        if id not in _BUILDERS:
            raise InvalidSpec(f"unknown spectrum family {id!r}")
        self.id = id
        self.params = dict(params or {})
        self._cache: Dict[int, SpectrumHandle] = {}
        self._lock = threading.Lock()
        self(1)  # validate parameters eagerly

    def __call__(self, d: int) -> SpectrumHandle:
        d = int(d)
        if d < 1:
            raise InvalidSpec("dimension must be >= 1")
        key = 1 if self.id in _D_FREE else d
        with self._lock:
            h = self._cache.get(key)
            if h is None:
                h = _BUILDERS[self.id](self.params, key)
                self._cache[key] = h
        return h

    def __repr__(self):
        return f"SpectrumFamily({self.id!r}, {self.params!r})"

    def to_config(self):
        return {"id": self.id, "params": self.params}


_FAMILY_CACHE: Dict[tuple, SpectrumFamily] = {}
_FAMILY_LOCK = threading.Lock()


def spectrum_family(id: str, params: Optional[dict] = None) -> SpectrumFamily:
    """Shared :class:`SpectrumFamily` instance for ``(id, params)``."""
    key = (id, _freeze(params or {}))
    with _FAMILY_LOCK:
        fam = _FAMILY_CACHE.get(key)
        if fam is None:
            fam = SpectrumFamily(id, params)
            _FAMILY_CACHE[key] = fam
    return fam


def make_family(id: str, params: Optional[dict] = None) -> SpectrumHandle:
    """Handle for family ``id``; ``params["d"]`` selects the dimension (default 1)."""
    params = dict(params or {})
    d = int(params.pop("d", 1))
    return spectrum_family(id, params)(d)


# ---------------------------------------------------------------------------
# curated fixtures


@dataclass(frozen=True)
class Classification:
    """Expected outcome of one condition on one family.

    ``tfun`` is a config mapping ``{"family": ..., "p": [...]}``; ``expected``
    is True for tractable (the sum converges) and False otherwise.
    """

    condition: str
    tfun: dict
    expected: bool
    note: str
    L: float = 1
    eps_min: float = 1e-6
    d_range: Tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 16, 32)


@dataclass(frozen=True)
class FamilySpec:
    id: str
    family: str
    params: dict
    tags: Tuple[Classification, ...]
    equivalence: Optional[bool] = None  # expected truth of the exp-type conditions
    thresholds: Dict[str, Any] = field(default_factory=dict)
    cap: int = 10**7

    def spectrum(self) -> SpectrumFamily:
        return spectrum_family(self.family, self.params)


def _alg(p, q=0.0):
    return {"family": "algebraic-polynomial", "p": [p, q]}


def _exp(p, q=0.0):
    return {"family": "exponential-polynomial", "p": [p, q]}


KOROBOV_PARAMS = {
    "omega": 0.5,
    "a": {"generator": "geometric", "c": 1.0, "r": 2.0},
    "b": {"generator": "power", "c": 1.0, "s": 2.0},
}

_CURATED = (
    FamilySpec(
        "geometric-half", "geometric", {"ratio": 0.5},
        (Classification("strong", _alg(1.0), True, "sum of 2^-i is 1"),),
        equivalence=True,
        thresholds={"alg-strong": 0.0},
    ),
    FamilySpec(
        "p-series-2", "p-series", {"alpha": 2.0},
        (
            Classification("strong", _alg(1.0), True, "sum of i^-2 converges"),
            Classification("strong", _alg(0.4), False, "sum of i^-0.8 diverges"),
        ),
        equivalence=False,
        thresholds={"alg-strong": 0.5},
    ),
    FamilySpec(
        "harmonic", "p-series", {"alpha": 1.0},
        (Classification("strong", _exp(1.0), False, "summand 1/log(1+i) does not decay"),),
        equivalence=False,
    ),
    FamilySpec(
        "log-slow", "log-slow", {},
        (Classification("strong", _alg(2.0), False, "summand 1/log(i+2)^2 is not summable",
                        eps_min=0.06),),
        equivalence=False,
        cap=10**8,
    ),
    FamilySpec(
        "super-exponential", "super-exponential", {},
        (Classification("strong", _exp(1.0), True, "summand about 1/i^2"),),
        equivalence=True,
    ),
    FamilySpec(
        "exp-decay", "geometric", {"ratio": math.exp(-1.0)},
        (
            Classification("strong", _exp(2.0), True, "summand about 1/i^2"),
            Classification("strong", _exp(0.5), False, "summand about 1/sqrt(i)"),
        ),
        equivalence=True,
        thresholds={"exp-strong": 1.0},
    ),
    FamilySpec(
        "d-scaled-geometric", "d-scaled-geometric", {"ratio": 0.5},
        (Classification("tract", _alg(1.0, 2.0), True,
                        "per-d sum is about d/log 2 before the d^-2 factor"),),
        equivalence=None,
    ),
    FamilySpec(
        "korobov-2j-j2", "korobov", KOROBOV_PARAMS,
        (Classification("strong", _exp(6.0), True,
                        "log a_j / j = log 2 and sum 1/b_j < inf", d_range=(1, 2, 3, 4, 5, 6, 7, 8)),),
        equivalence=True,
    ),
    FamilySpec(
        "explicit-head", "explicit", {"values": [0.9, 0.5, 0.5], "tail": ["geometric", 0.5]},
        (Classification("strong", _alg(1.0), True, "finite head plus geometric tail"),),
        equivalence=True,
    ),
)


def curated_families() -> Tuple[FamilySpec, ...]:
    return _CURATED


def get_curated(id: str) -> FamilySpec:
    for fs in _CURATED:
        if fs.id == id:
            return fs
    raise InvalidSpec(f"no curated family {id!r}")
