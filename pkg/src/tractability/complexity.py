"""Information complexity ``comp(eps, d) = min{n >= 0 : lambda_{n+1,d} <= eps}``
and the restricted-domain upper summation limit ``UB(d)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .errors import BudgetExceeded, InvalidSpec
from .spectrum import SpectrumHandle

__all__ = [
    "INFINITE",
    "DEFAULT_CAP",
    "ComplexityResult",
    "DomainRestriction",
    "info_complexity",
    "ub_restricted",
    "complexity_curve",
]

#: The infinity marker for UB(d) when M(d) = 0.
INFINITE = math.inf
DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class ComplexityResult:
    """``n`` together with the pair ``(lambda_n, lambda_{n+1})`` proving minimality.

    ``lambda_n`` is None when ``n == 0``.
    """

    n: int
    witness: tuple


@dataclass(frozen=True)
class DomainRestriction:
    """The threshold map ``M(d)`` defining ``Omega = (M(d), inf) x N`` in eps.

    ``kind`` is one of ``zero``, ``constant`` (alias ``eps-min``) or ``table``.
    A table maps dimensions to thresholds and falls back to ``default``.
    """

    kind: str = "zero"
    value: float = 0.0
    table: Optional[Mapping[int, float]] = None
    default: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "eps-min", "table"):
            raise InvalidSpec(f"unknown restriction kind {self.kind!r}")
        vals = [self.value, self.default] + list((self.table or {}).values())
        if any(not (v >= 0) for v in vals):
            raise InvalidSpec("M(d) must be non-negative")

    def M(self, d: int) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind in ("constant", "eps-min"):
            return float(self.value)
        return float((self.table or {}).get(d, self.default))

    def to_config(self):
        if self.kind == "table":
            return {"kind": "table", "table": {str(k): v for k, v in sorted(self.table.items())},
                    "default": self.default}
        if self.kind == "zero":
            return {"kind": "zero"}
        return {"kind": self.kind, "value": self.value}


def info_complexity(spec: SpectrumHandle, eps: float, cap: int = DEFAULT_CAP) -> ComplexityResult:
    """Galloping then binary search for the first index with ``lambda <= eps``.

    The comparison is IEEE ``<=`` on the values returned by ``spec.value_at``.
    Raises BudgetExceeded if ``lambda_cap > eps``.
    """
    if not eps > 0:
        raise InvalidSpec("eps must be positive")
    val = spec.value_at
    if val(1) <= eps:
        return ComplexityResult(0, (None, val(1)))
    lo, hi = 1, 2  # invariant: val(lo) > eps
    while True:
        if hi > cap:
            hi = cap
            if val(hi) > eps:
                raise BudgetExceeded(
                    f"lambda_{cap} = {val(cap):.3e} still exceeds eps = {eps:.3e}"
                )
            break
        if val(hi) <= eps:
            break
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if val(mid) <= eps:
            hi = mid
        else:
            lo = mid
    n = hi - 1
    return ComplexityResult(n, (val(n), val(hi)))


def ub_restricted(spec: SpectrumHandle, restriction: DomainRestriction, d: Optional[int] = None,
                  cap: int = DEFAULT_CAP):
    """``UB(d)``: comp at tolerance ``M(d)``, or INFINITE when ``M(d) = 0``."""
    m = restriction.M(spec.d if d is None else d)
    if m == 0:
        return INFINITE
    return info_complexity(spec, m, cap).n


def complexity_curve(spec: SpectrumHandle, eps_list: Sequence[float], cap: int = DEFAULT_CAP):
    """Return ``[(eps, n), ...]`` in input order.

    Tolerances are processed from largest to smallest so that lazily
    enumerated spectra are extended once.
    """
    eps_list = [float(e) for e in eps_list]
    if any(not e > 0 for e in eps_list):
        raise InvalidSpec("eps values must be positive")
    results = {}
    for e in sorted(set(eps_list), reverse=True):
        results[e] = info_complexity(spec, e, cap).n
    return [(e, results[e]) for e in eps_list]
