"""Parameter searches over condition verdicts.

The predicate "the sum converges for some start constant L" is treated as
monotone in the parameters.  Inconclusive counts as failing, so estimates err
toward larger (more conservative) parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from .conditions import (
    CONVERGED,
    DEFAULT_D_RANGE,
    DIVERGED,
    L_SWEEP,
    ConditionSpec,
    evaluate,
)
from .errors import BracketInvalid, InvalidSpec
from .tfun import TractFun


@dataclass
class ParamSearchResult:
    p_star_estimate: List[float]
    bracket: Tuple[float, float]
    verdict_trace: List[Tuple[float, str]]
    component: int = 0
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "p_star_estimate": self.p_star_estimate,
            "bracket": list(self.bracket),
            "component": self.component,
            "verdict_trace": [{"p": p, "kind": k} for p, k in self.verdict_trace],
            "notes": list(self.notes),
        }


def _verdict(cs: ConditionSpec, L_values: Sequence[float]):
    """Best verdict over the start constants; the first Converged wins."""
    kinds = []
    for L in L_values:
        v = evaluate(replace(cs, L=L))
        kinds.append(v.kind)
        if v.kind == CONVERGED:
            return CONVERGED, L
        if v.kind == DIVERGED:
            # dropping finitely many leading terms cannot cure divergence
            return DIVERGED, L
    return kinds[-1], L_values[-1]


def _spec_at(family, tf_template: TractFun, condition_kind: str, p_vec, *, budget, d_range,
             tail_tol, jobs, extra):
    cs = ConditionSpec(condition_kind, family, tf=tf_template.with_params(p_vec), budget=budget,
                       d_range=tuple(d_range), tail_tol=tail_tol, jobs=jobs, fail_fast=True,
                       **(extra or {}))
    return cs


def bisect_scalar_p(
    family,
    tf_template: TractFun,
    condition_kind: str = "strong",
    p_range: Tuple[float, float] = (0.0, 4.0),
    tol: float = 0.02,
    budget: int = 10**6,
    *,
    component: int = 0,
    L_values: Sequence[float] = L_SWEEP,
    d_range: Sequence[int] = DEFAULT_D_RANGE,
    tail_tol: float = 1e-6,
    jobs: int = 1,
    extra: Optional[dict] = None,
) -> ParamSearchResult:
    """Bisect one component of ``p`` between a failing and a converging value.

    Other components keep their values from ``tf_template``.  ``p_lo`` may be
    0; when the lower endpoint is 0 and the only failure is there, the result
    collapses toward 0.
    """
    if condition_kind not in ("strong", "tract", "strong-restricted", "tract-restricted"):
        raise InvalidSpec(f"bisection does not support {condition_kind!r}")
    if not tol > 0:
        raise InvalidSpec("tol must be positive")
    lo, hi = float(p_range[0]), float(p_range[1])
    if not hi > lo:
        raise InvalidSpec("p_range must be increasing")
    base = list(tf_template.p)
    trace: List[Tuple[float, str]] = []
    notes: List[str] = []

    def passes(p: float) -> bool:
        vec = list(base)
        vec[component] = p
        cs = _spec_at(family, tf_template, condition_kind, vec, budget=budget, d_range=d_range,
                      tail_tol=tail_tol, jobs=jobs, extra=extra)
        kind, L = _verdict(cs, list(L_values))
        trace.append((p, kind))
        if kind not in (CONVERGED, DIVERGED):
            notes.append(f"p={p:.6g}: {kind} treated as failing")
        return kind == CONVERGED

    ok_lo, ok_hi = passes(lo), passes(hi)
    if ok_lo == ok_hi or ok_lo:
        raise BracketInvalid(
            f"endpoints must fail at p_lo and converge at p_hi (got {trace[0][1]} / {trace[1][1]})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    est = list(base)
    est[component] = 0.5 * (lo + hi)
    return ParamSearchResult(est, (lo, hi), trace, component, notes)


@dataclass
class ParetoResult:
    front: List[Tuple[float, float]]
    grid: List[dict]
    violations: List[dict]

    def to_dict(self):
        return {
            "front": [list(pt) for pt in self.front],
            "grid": self.grid,
            "violations": self.violations,
        }


def minimal_elements(points: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Componentwise-minimal points (no other point is <= in both and < in one)."""
    pts = sorted(set(points))
    out = []
    for a in pts:
        dominated = any(b[0] <= a[0] and b[1] <= a[1] and b != a for b in pts)
        if not dominated:
            out.append(a)
    return out


def pareto_pq(
    family,
    tf_template: TractFun,
    condition_kind: str = "tract",
    p_grid: Sequence[float] = (0.5, 1.0, 2.0),
    q_grid: Sequence[float] = (0.0, 1.0, 2.0),
    budget: int = 10**6,
    *,
    L_values: Sequence[float] = L_SWEEP,
    d_range: Sequence[int] = DEFAULT_D_RANGE,
    tail_tol: float = 1e-6,
    jobs: int = 1,
) -> ParetoResult:
    """Minimal converging ``(p, q)`` on a grid, plus upward-closure violations."""
    if list(p_grid) != sorted(p_grid) or list(q_grid) != sorted(q_grid):
        raise InvalidSpec("grids must be ascending")
    kinds = {}
    cells = []
    for p in p_grid:
        for q in q_grid:
            cs = _spec_at(family, tf_template, condition_kind, [p, q], budget=budget,
                          d_range=d_range, tail_tol=tail_tol, jobs=jobs, extra=None)
            kind, L = _verdict(cs, list(L_values))
            kinds[(p, q)] = kind
            cells.append({"p": p, "q": q, "kind": kind, "L": L})
    good = [pt for pt, k in kinds.items() if k == CONVERGED]
    violations = []
    for (p, q) in good:
        for (p2, q2), k in kinds.items():
            if p2 >= p and q2 >= q and k != CONVERGED:
                violations.append({"converged_at": [p, q], "not_converged_at": [p2, q2], "kind": k})
    return ParetoResult(minimal_elements(good), cells, violations)
