"""Summability conditions for (strong) tractability and their verdicts.

Each operation evaluates one fixed parameter tuple over a range of
dimensions.  Per-dimension sums come from :func:`tractability.series.evaluate_series`
and are merged into a :class:`SumVerdict`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .complexity import DEFAULT_CAP, DomainRestriction, info_complexity, ub_restricted
from .errors import InvalidSpec
from .series import SeriesRow, evaluate_series
from .spectrum import SpectrumHandle
from .tfun import ExponentialPolynomial, HFun, TractFun

CONVERGED = "Converged"
DIVERGED = "Diverged"
INCONCLUSIVE = "Inconclusive"

DEFAULT_D_RANGE = (1, 2, 3, 4, 5, 6, 7, 8, 16, 32)

WHICH = (
    "strong",
    "tract",
    "strong-restricted",
    "tract-restricted",
    "sub-h",
    "kw-exp-spt",
    "kw-exp-pt",
)


@dataclass
class ConditionSpec:
    """One condition with a fixed parameter tuple.

    ``spectrum`` is either a handle (used for every d) or a callable mapping
    ``d`` to a handle.  KW forms use ``tau``/``C`` (spt) and
    ``tau1, tau2, tau3, C`` (pt); the others use ``tf`` and ``L``.
    """

    which: str
    spectrum: Any
    tf: Optional[TractFun] = None
    L: float = 1
    h: Optional[HFun] = None
    c_list: Tuple[float, ...] = ()
    restriction: Optional[DomainRestriction] = None
    tau: Optional[float] = None
    C: float = 1.0
    tau1: float = 0.0
    tau2: Optional[float] = None
    tau3: float = 0.0
    d_range: Tuple[int, ...] = DEFAULT_D_RANGE
    budget: int = 10**6
    tail_tol: float = 1e-6
    delta: float = 0.05
    growth_threshold: float = 0.01
    plateau_tol: float = 1e-3
    cap: int = DEFAULT_CAP
    jobs: int = 1
    fail_fast: bool = False

    def __post_init__(self):
        if self.which not in WHICH:
            raise InvalidSpec(f"unknown condition {self.which!r}")
        self.d_range = tuple(int(d) for d in self.d_range)
        if not self.d_range or min(self.d_range) < 1:
            raise InvalidSpec("d_range must be non-empty with d >= 1")
        if self.budget < 1:
            raise InvalidSpec("budget must be positive")
        if self.which in ("strong", "tract", "strong-restricted", "tract-restricted", "sub-h"):
            if self.tf is None:
                raise InvalidSpec(f"{self.which} needs a tractability function")
        if self.which.endswith("restricted") and self.restriction is None:
            raise InvalidSpec(f"{self.which} needs a domain restriction")
        if self.which == "sub-h" and self.h is None:
            raise InvalidSpec("sub-h needs an h function")
        if self.which == "kw-exp-spt" and not (self.tau is not None and self.tau > 0):
            raise InvalidSpec("kw-exp-spt needs tau > 0")
        if self.which == "kw-exp-pt":
            if not (self.tau2 is not None and self.tau2 > 0):
                raise InvalidSpec("kw-exp-pt needs tau2 > 0")
            if self.tau1 < 0 or self.tau3 < 0:
                raise InvalidSpec("kw-exp-pt needs tau1, tau3 >= 0")
        if self.which.startswith("kw") and not self.C > 0:
            raise InvalidSpec("C must be positive")

    def handle(self, d: int) -> SpectrumHandle:
        if isinstance(self.spectrum, SpectrumHandle):
            return self.spectrum
        return self.spectrum(d)

    def params_dict(self) -> dict:
        out = {"which": self.which}
        if self.which.startswith("kw"):
            if self.which == "kw-exp-spt":
                out.update(tau=self.tau, C=self.C)
            else:
                out.update(tau1=self.tau1, tau2=self.tau2, tau3=self.tau3, C=self.C)
        else:
            out.update(tf=self.tf.to_config(), L=self.L)
        if self.h is not None:
            out["h"] = self.h.to_config()
        if self.restriction is not None:
            out["restriction"] = self.restriction.to_config()
        return out


@dataclass
class SumVerdict:
    kind: str
    sup_over_d: float
    per_d: List[dict]
    diagnostics: List[str] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.kind == CONVERGED

    def to_dict(self):
        return {
            "kind": self.kind,
            "sup_over_d": self.sup_over_d,
            "per_d": self.per_d,
            "diagnostics": list(self.diagnostics),
            "params": self.params,
        }


def _ceil(x: float) -> int:
    """Ceiling that ignores binary64 noise just above an integer."""
    n = math.ceil(x)
    if n - 1 >= x * (1.0 - 1e-12):
        n -= 1
    return max(1, int(n))


def _term_builders(cs: ConditionSpec, handle: SpectrumHandle, d: int, c: Optional[float] = None):
    """Return ``(log_term, log_term_envelope, start, d_arg, check_order)``."""
    which = cs.which
    if which.startswith("kw"):
        if which == "kw-exp-spt":
            tau, start, lead = cs.tau, _ceil(cs.C), 0.0
        else:
            tau = cs.tau2
            start = _ceil(cs.C * float(d) ** cs.tau3)
            lead = -cs.tau1 * math.log(d)

        def log_term(nl, idx):
            return lead - nl * idx ** (-tau)

        return log_term, None, start, d, True

    tf = cs.tf
    strong = which in ("strong", "strong-restricted")
    d_arg = 1 if strong else d
    if which == "sub-h":
        start = 1
    elif strong:
        if not (cs.L >= 1 and float(cs.L).is_integer()):
            raise InvalidSpec("strong forms need an integer L >= 1")
        start = int(cs.L)
    else:
        if not cs.L > 0:
            raise InvalidSpec("L must be positive")
        start = _ceil(cs.L * tf.eval_T0(d))

    if which == "sub-h":
        h = cs.h
        log_c = math.log(c)

        def log_term(nl, idx=None):
            with np.errstate(over="ignore"):
                return -h.log_h(np.exp(log_c + tf.log_T(nl, d_arg)))
    else:
        def log_term(nl, idx=None):
            return -tf.log_T(nl, d_arg)

    envelope = None
    if handle.has_envelope:
        def envelope(u):
            return log_term(handle.envelope_neg_log(u))

    return log_term, envelope, start, d_arg, False


def _row_for(cs: ConditionSpec, handle: SpectrumHandle, d: int, c: Optional[float] = None) -> SeriesRow:
    log_term, envelope, start, _, check_order = _term_builders(cs, handle, d, c)
    stop = None
    if cs.which.endswith("restricted"):
        ub = ub_restricted(handle, cs.restriction, d, cs.cap)
        if math.isfinite(ub):
            stop = int(ub)
    row = evaluate_series(
        handle, log_term, start, stop,
        log_term_envelope=envelope, check_order=check_order,
        budget=cs.budget, tail_tol=cs.tail_tol, delta=cs.delta,
        growth_threshold=cs.growth_threshold,
    )
    row.d = d
    return row


def _d_free(cs: ConditionSpec, d: int) -> bool:
    if cs.which.endswith("restricted") and cs.restriction.M(d) != cs.restriction.M(1):
        return False
    return cs.which in ("kw-exp-spt", "strong", "strong-restricted")


def _evaluate_rows(cs: ConditionSpec, c: Optional[float] = None) -> List[SeriesRow]:
    # d-independent spectra under d-free summands give identical rows
    handles = {d: cs.handle(d) for d in cs.d_range}
    groups: Dict[tuple, List[int]] = {}
    for d, hd in handles.items():
        key = (id(hd), None if _d_free(cs, d) else d)
        groups.setdefault(key, []).append(d)
    reps = [ds[0] for ds in groups.values()]
    if cs.jobs > 1 and len(reps) > 1:
        with ThreadPoolExecutor(max_workers=cs.jobs) as ex:
            computed = list(ex.map(lambda d: _row_for(cs, handles[d], d, c), reps))
    elif cs.fail_fast:
        # sweeps only need the verdict: stop after the first diverging dimension
        computed = []
        for d in reps:
            computed.append(_row_for(cs, handles[d], d, c))
            if computed[-1].status == "diverging":
                break
    else:
        computed = [_row_for(cs, handles[d], d, c) for d in reps]
    by_d = {}
    for ds, row in zip(groups.values(), computed):
        for d in ds:
            by_d[d] = replace(row, d=d)
    return [by_d[d] for d in cs.d_range if d in by_d]


def _assemble(cs: ConditionSpec, rows: List[SeriesRow]) -> SumVerdict:
    diags = []
    kinds = {r.status for r in rows}
    finite_vals = [r.value for r in rows]
    sup = max(finite_vals) if finite_vals else 0.0
    for r in rows:
        diags.append(
            f"d={r.d}: {r.status}, N={r.terms_used}, tail={r.tail_kind}"
            + (f", slope={r.slope_estimate:.4g}" if r.slope_estimate is not None else "")
        )
    if any(r.status == "diverging" for r in rows):
        kind = DIVERGED
    elif kinds <= {"converged", "exact"}:
        kind = CONVERGED
        if len(rows) >= 3 and _rising(rows, cs.plateau_tol):
            kind = INCONCLUSIVE
            diags.append("trend: per-d sums still increasing at the largest tested d")
    else:
        kind = INCONCLUSIVE
    if kind == CONVERGED and not math.isfinite(sup):
        kind = INCONCLUSIVE
    return SumVerdict(kind, sup, [r.to_dict() for r in rows], diags, cs.params_dict())


def _rising(rows: Sequence[SeriesRow], tol: float) -> bool:
    order = sorted(rows, key=lambda r: r.d)
    tail = [r.value for r in order[-3:]]
    steps = [(b - a) / max(abs(a), 1e-300) for a, b in zip(tail, tail[1:])]
    return all(s > tol for s in steps)


def _run(cs: ConditionSpec, which: Sequence[str]) -> SumVerdict:
    if cs.which not in which:
        raise InvalidSpec(f"expected condition in {tuple(which)}, got {cs.which!r}")
    return _assemble(cs, _evaluate_rows(cs))


def sum_strong(cs: ConditionSpec) -> SumVerdict:
    """``sup_d sum_{i >= L} 1 / T(1/lambda_{i,d}, 1, p)``."""
    return _run(cs, ("strong",))


def sum_tract(cs: ConditionSpec) -> SumVerdict:
    """``sup_d sum_{i >= ceil(L T(0,d,p))} 1 / T(1/lambda_{i,d}, d, p)``."""
    return _run(cs, ("tract",))


def _restricted(cs: ConditionSpec, base: str) -> SumVerdict:
    if cs.which == base:
        raise InvalidSpec(f"use the {base!r} operation for unrestricted sums")
    if cs.restriction.kind == "zero":
        # UB(d) is infinite everywhere: the unrestricted sum, verbatim.
        v = _assemble(cs, _evaluate_rows(replace(cs, which=base)))
        v.params = cs.params_dict()
        return v
    return _run(cs, (base + "-restricted",))


def sum_strong_restricted(cs: ConditionSpec) -> SumVerdict:
    """Strong sum truncated at ``UB(d)``; empty when ``UB(d) < L``."""
    return _restricted(cs, "strong")


def sum_tract_restricted(cs: ConditionSpec) -> SumVerdict:
    """Tractability sum truncated at ``UB(d)``."""
    return _restricted(cs, "tract")


@dataclass
class SubHVerdict:
    per_c: Dict[float, SumVerdict]
    passed: bool
    diagnostics: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "passed": self.passed,
            "per_c": [{"c": c, **v.to_dict()} for c, v in sorted(self.per_c.items())],
            "diagnostics": list(self.diagnostics),
        }


def sum_subh(cs: ConditionSpec, c_list: Optional[Sequence[float]] = None) -> SubHVerdict:
    """``sup_d sum_i 1 / h(c T(1/lambda_{i,d}, d, p))`` for each ``c``.

    The condition must hold for every ``c > 0``; ``passed`` requires a
    Converged verdict at every tested ``c``.
    """
    if cs.which != "sub-h":
        raise InvalidSpec("sum_subh needs which='sub-h'")
    cs_c = tuple(cs.c_list) if c_list is None else tuple(c_list)
    if not cs_c:
        raise InvalidSpec("sub-h needs a non-empty c list")
    if any(not c > 0 for c in cs_c):
        raise InvalidSpec("every c must be positive")
    per_c = {}
    for c in sorted(set(float(c) for c in cs_c)):
        v = _assemble(cs, _evaluate_rows(cs, c))
        v.params = dict(v.params, c=c)
        per_c[c] = v
    passed = all(v.converged for v in per_c.values())
    failing = [c for c, v in per_c.items() if not v.converged]
    diags = [f"not converged at c={c:g} ({per_c[c].kind})" for c in failing]
    return SubHVerdict(per_c, passed, diags)


def sum_kw_spt(cs: ConditionSpec) -> SumVerdict:
    """``sup_d sum_{i >= C} lambda_{i,d}^(i^-tau)`` over ordered values."""
    return _run(cs, ("kw-exp-spt",))


def sum_kw_pt(cs: ConditionSpec) -> SumVerdict:
    """``sup_d d^-tau1 sum_{i >= ceil(C d^tau3)} lambda_{i,d}^(i^-tau2)``."""
    return _run(cs, ("kw-exp-pt",))


def evaluate(cs: ConditionSpec):
    """Dispatch on ``cs.which``."""
    return {
        "strong": sum_strong,
        "tract": sum_tract,
        "strong-restricted": sum_strong_restricted,
        "tract-restricted": sum_tract_restricted,
        "sub-h": sum_subh,
        "kw-exp-spt": sum_kw_spt,
        "kw-exp-pt": sum_kw_pt,
    }[cs.which](cs)


# ---------------------------------------------------------------------------
# equivalence with the ordered-value conditions

L_SWEEP = (1, 2, 4, 8, 16, 32, 64)

DEFAULT_SWEEPS = {
    "p": (8.0, 4.0, 2.0, 1.0, 0.5),
    "q": (1.0, 0.0),
    "L": L_SWEEP,
    "tau": (0.05, 0.1, 0.25, 0.5, 1.0),
    "C": (1.0, 8.0, 64.0),
    "tau1": (1.0, 0.0),
    "tau2": (0.05, 0.25, 1.0),
    "tau3": (0.0, 1.0),
    "C_pt": (1.0, 8.0),
}


@dataclass
class SideResult:
    positive: Optional[bool]
    entries: List[dict]
    flagged: List[dict]

    def to_dict(self):
        return {"positive": self.positive, "entries": self.entries, "flagged": self.flagged}


@dataclass
class AgreementRow:
    pair: str
    exp_side: SideResult
    kw_side: SideResult
    status: str
    constructive: Optional[dict] = None

    def to_dict(self):
        return {
            "pair": self.pair,
            "status": self.status,
            "exp_side": self.exp_side.to_dict(),
            "kw_side": self.kw_side.to_dict(),
            "constructive": self.constructive,
        }


@dataclass
class AgreementReport:
    family: str
    rows: List[AgreementRow]

    @property
    def status(self) -> str:
        st = {r.status for r in self.rows}
        if st == {"AGREE"}:
            return "AGREE"
        if "DISAGREE" in st:
            return "DISAGREE"
        return "UNRESOLVED"

    def to_dict(self):
        return {"family": self.family, "status": self.status, "rows": [r.to_dict() for r in self.rows]}


def _side(candidates: Sequence[Callable[[], Tuple[dict, SumVerdict]]]) -> SideResult:
    """Run candidates loosest-first; stop at the first Converged."""
    entries, flagged = [], []
    any_div = False
    for make in candidates:
        params, v = make()
        entry = {"params": params, "kind": v.kind, "sup_over_d": v.sup_over_d}
        entries.append(entry)
        if v.kind == CONVERGED:
            return SideResult(True, entries, flagged)
        if v.kind == DIVERGED:
            any_div = True
        else:
            flagged.append(entry)
    return SideResult(False if any_div else None, entries, flagged)


def _status(a: SideResult, b: SideResult) -> str:
    if a.positive is None or b.positive is None:
        return "UNRESOLVED"
    return "AGREE" if a.positive == b.positive else "DISAGREE"


def _l_sweep(base: ConditionSpec, L_values):
    """Try L values in order; a Diverged verdict ends the sweep.

    Shifting the start index drops finitely many terms per d, so it cannot
    turn a divergent per-d series into a convergent one.
    """
    last = None
    for L in L_values:
        v = evaluate(replace(base, L=L))
        last = v
        if v.kind in (CONVERGED, DIVERGED):
            return v
    return last


def check_equivalence_prop1(
    family,
    tf_exp: Optional[TractFun] = None,
    kw_params: Optional[dict] = None,
    d_range: Sequence[int] = DEFAULT_D_RANGE,
    budget: int = 10**6,
    *,
    tail_tol: float = 1e-6,
    name: Optional[str] = None,
    jobs: int = 1,
) -> AgreementReport:
    """Compare the exponential-T sums with the ordered-value conditions.

    Two pairs are reported: strong (exp-T strong sum vs ``kw-exp-spt``) and
    tract (exp-T tract sum vs ``kw-exp-pt``).  A side is positive when any swept
    parameter converges and negative when none converges and at least one
    diverges.  Inconclusive entries are flagged and never counted.
    """
    if tf_exp is not None and not isinstance(tf_exp, ExponentialPolynomial):
        raise InvalidSpec("the equivalence check needs an exponential-polynomial T")
    sw = dict(DEFAULT_SWEEPS)
    sw.update(kw_params or {})
    if tf_exp is not None:
        sw["p"] = (tf_exp.p[0],)
        sw["q"] = (tf_exp.p[1],)
    common = dict(d_range=tuple(d_range), budget=budget, tail_tol=tail_tol, jobs=jobs, fail_fast=True)
    rows = []

    # strong pair
    def exp_strong(p):
        def run():
            cs = ConditionSpec("strong", family, tf=ExponentialPolynomial([p, 0.0]), **common)
            return {"p": p}, _l_sweep(cs, sw["L"])
        return run

    def kw_spt(tau, C):
        def run():
            cs = ConditionSpec("kw-exp-spt", family, tau=tau, C=C, **common)
            return {"tau": tau, "C": C}, sum_kw_spt(cs)
        return run

    a = _side([exp_strong(p) for p in sw["p"]])
    b = _side([kw_spt(t, C) for t in sw["tau"] for C in sw["C"]])
    rows.append(AgreementRow("strong", a, b, _status(a, b), _constructive(family, b, "strong", common)))

    # tract pair
    def exp_tract(p, q):
        def run():
            cs = ConditionSpec("tract", family, tf=ExponentialPolynomial([p, q]), **common)
            return {"p": p, "q": q}, _l_sweep(cs, sw["L"])
        return run

    def kw_pt(t1, t2, t3, C):
        def run():
            cs = ConditionSpec("kw-exp-pt", family, tau1=t1, tau2=t2, tau3=t3, C=C, **common)
            return {"tau1": t1, "tau2": t2, "tau3": t3, "C": C}, sum_kw_pt(cs)
        return run

    a = _side([exp_tract(p, q) for p in sw["p"] for q in sw["q"]])
    b = _side([kw_pt(t1, t2, t3, C) for t2 in sw["tau2"] for t1 in sw["tau1"]
               for t3 in sw["tau3"] for C in sw["C_pt"]])
    rows.append(AgreementRow("tract", a, b, _status(a, b), _constructive(family, b, "tract", common)))
    return AgreementReport(name or getattr(family, "id", repr(family)), rows)


def _constructive(family, kw: SideResult, pair: str, common: dict) -> Optional[dict]:
    """If the ordered-value side converged at some tau, test the exp side at p just above 1/tau."""
    if not kw.positive:
        return None
    params = kw.entries[-1]["params"]
    if pair == "strong":
        p = 1.0 / params["tau"] * 1.05
        tf = ExponentialPolynomial([p, 0.0])
        cs = ConditionSpec("strong", family, tf=tf, **common)
    else:
        p = 1.0 / params["tau2"] * 1.05
        q = max(params["tau1"], params["tau3"])
        tf = ExponentialPolynomial([p, q])
        cs = ConditionSpec("tract", family, tf=tf, **common)
    v = _l_sweep(cs, L_SWEEP)
    return {"from": params, "tf": tf.to_config(), "kind": v.kind, "holds": v.converged}


# ---------------------------------------------------------------------------
# direct bound check


@dataclass
class BoundReport:
    c_hat: float
    exploding: bool
    slopes: Dict[str, float]
    rows: List[dict]
    mode: str

    @property
    def tractable_evidence(self) -> bool:
        return not self.exploding

    def to_dict(self):
        return {
            "c_hat": self.c_hat,
            "exploding": self.exploding,
            "tractable_evidence": self.tractable_evidence,
            "slopes": self.slopes,
            "mode": self.mode,
            "rows": self.rows,
        }


def default_eps_grid(eps_min: float = 1e-6, per_decade: int = 4) -> List[float]:
    n = int(round(-math.log10(eps_min) * per_decade)) + 1
    return [float(e) for e in np.logspace(0, math.log10(eps_min), n)]


def _secant(xs: Sequence[float], rs: Sequence[float]) -> float:
    """Log-log secant slope of a running maximum over the upper half of a grid."""
    run, best = [], 0.0
    for r in rs:
        best = max(best, r)
        run.append(best)
    n = len(run)
    if n < 2:
        return 0.0
    i0 = n // 2
    while i0 < n - 1 and run[i0] <= 0:
        i0 += 1
    if run[i0] <= 0 or xs[-1] == xs[i0]:
        return 0.0
    return math.log(run[-1] / run[i0]) / math.log(xs[-1] / xs[i0])


def direct_bound_check(
    family,
    tf: TractFun,
    mode: str = "strong",
    eps_grid: Optional[Sequence[float]] = None,
    d_range: Sequence[int] = (1, 2, 3, 4, 6, 8),
    cap: int = DEFAULT_CAP,
    explode_slope: float = 0.05,
) -> BoundReport:
    """``C_hat = max comp(eps, d) / T(1/eps, d or 1, p)`` over a grid.

    The ratio is called exploding when the running maximum still grows with a
    log-log secant slope above ``explode_slope`` over the upper half of the
    grid, in either the ``1/eps`` or the ``d`` direction.
    """
    if mode not in ("strong", "tract"):
        raise InvalidSpec("mode must be 'strong' or 'tract'")
    eps_grid = sorted(set(default_eps_grid() if eps_grid is None else eps_grid), reverse=True)
    d_range = sorted(set(int(d) for d in d_range))
    if not eps_grid or not d_range:
        raise InvalidSpec("grids must be non-empty")
    rows = []
    ratio = np.zeros((len(eps_grid), len(d_range)))
    for jd, d in enumerate(d_range):
        handle = family if isinstance(family, SpectrumHandle) else family(d)
        targ = 1 if mode == "strong" else d
        for ie, eps in enumerate(eps_grid):
            n = info_complexity(handle, eps, cap).n
            T = float(tf.eval_T(1.0 / eps, targ))
            r = n / T
            ratio[ie, jd] = r
            rows.append({"eps": eps, "d": d, "comp": n, "T": T, "ratio": r})
    x = [1.0 / e for e in eps_grid]
    s_eps = _secant(x, list(ratio.max(axis=1)))
    s_d = _secant([float(d) for d in d_range], list(ratio.max(axis=0))) if len(d_range) > 1 else 0.0
    exploding = s_eps > explode_slope or s_d > explode_slope
    return BoundReport(float(ratio.max()), exploding, {"eps": s_eps, "d": s_d}, rows, mode)
