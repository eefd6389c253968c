"""Finite-budget evaluation of one positive series ``sum_{i >= start} t_i``.

Summands are handled as log terms.  The remainder after ``N`` terms is treated
one of two ways:

``envelope``
    When the summand is non-increasing and the spectrum has an upper envelope
    ``Lambda(x) >= lambda_x``, the envelope summand ``g`` is integrated in
    ``u = log x``.  ``int_{N+1}^inf g <= tail <= int_N^inf g`` when the
    envelope is exact at the integers; otherwise only the upper bound holds.
``power-law`` / ``geometric``
    Otherwise the final decade of log terms is fitted against ``log i`` and
    against ``i`` and the larger of the two extrapolated remainders is used.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .spectrum import SpectrumHandle

CHUNK = 1 << 18


@dataclass
class SeriesRow:
    d: int
    start: int
    stop: Optional[int]
    partial_sum: float
    terms_used: int
    tail_estimate: float
    tail_bound: float
    uncertainty: float
    tail_kind: str
    slope_estimate: Optional[float]
    growth: Optional[float]
    value: float
    status: str  # converged | exact | diverging | unresolved

    def to_dict(self):
        return asdict(self)


def _sum_exp(lt):
    with np.errstate(under="ignore"):
        return float(np.sum(np.exp(lt)))


def envelope_tail(log_g: Callable[[np.ndarray], np.ndarray], N: int, exact: bool):
    """Bracket ``sum_{i > N} g(i)`` by integrals of the envelope summand.

    ``log_g`` maps ``log x`` to ``log g(x)``.  Returns
    ``(estimate, uncertainty, upper)`` or None when the integral does not
    visibly converge.
    """
    a = math.log(N)
    b = math.log(N + 1)

    def phi(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            return np.asarray(log_g(u), dtype=float) + u

    ref = float(phi(b))
    if ref == -math.inf:
        return 0.0, 0.0, 0.0
    probe = phi(b + np.array([50.0, 200.0, 700.0]))
    if not (probe[2] < probe[1] - 1.0 and probe[1] < probe[0]):
        return None

    def f(u):
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            val = math.exp(min(float(phi(u)) - ref, 700.0))
        return 0.0 if math.isnan(val) else val

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            lower, _ = integrate.quad(f, b, np.inf, epsabs=0.0, epsrel=1e-10, limit=400)
            piece, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=100)
        except integrate.IntegrationWarning:
            return None
    scale = math.exp(ref)
    lower *= scale
    piece *= scale
    upper = lower + piece
    if not math.isfinite(upper):
        return None
    if exact:
        return lower + 0.5 * piece, 0.5 * piece, upper
    return 0.5 * upper, 0.5 * upper, upper


def _decade_fit(idx, lt):
    """Least-squares slopes of log terms against ``log i`` and against ``i``."""
    n = idx.size
    take = np.unique(np.geomspace(1, n, num=min(n, 256)).astype(np.int64) - 1)
    x, y = idx[take], lt[take]
    ok = np.isfinite(y)
    if ok.sum() < 3:
        return None, None
    x, y = x[ok], y[ok]
    if np.ptp(y) == 0.0:
        return 0.0, 0.0
    s = float(np.polyfit(np.log(x), y, 1)[0])
    beta = float(np.polyfit(x, y, 1)[0])
    return s, beta


def extrapolated_tail(idx, lt):
    """Remainder estimate from the final decade of terms.

    Returns ``(estimate, kind, slope)``; estimate is inf unless the power-law
    slope is below -1.
    """
    n = idx.size
    window = slice(max(0, n - max(n * 9 // 10, 3)), n)
    wi, wl = idx[window], lt[window]
    if not np.any(np.isfinite(wl)):
        return 0.0, "zero", None
    s, beta = _decade_fit(wi, wl)
    if s is None:
        return math.inf, "power-law", None
    N = float(wi[-1])
    yN = float(wl[-1])
    if not s < -1.0 - 1e-6:
        return math.inf, "power-law", s
    with np.errstate(over="ignore", under="ignore"):
        power = math.exp(yN) * N / (-s - 1.0)
        geom = math.exp(yN) * math.exp(beta) / -math.expm1(beta) if beta < 0 else math.inf
    if geom > power:
        return geom, "geometric", s
    return power, "power-law", s


def evaluate_series(
    handle: SpectrumHandle,
    log_term: Callable[[np.ndarray, np.ndarray], np.ndarray],
    start: int,
    stop: Optional[int] = None,
    *,
    log_term_envelope: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    check_order: bool = False,
    budget: int = 10**6,
    tail_tol: float = 1e-6,
    delta: float = 0.05,
    growth_threshold: float = 0.01,
    first: int = 1024,
) -> SeriesRow:
    """Sum ``exp(log_term(neg_log_i, i))`` for ``i = start, start+1, ...``.

    ``stop`` (inclusive) makes the sum finite and exact.  Otherwise terms are
    added in doubling batches up to ``budget`` and the loop stops as soon as
    the remainder is pinned down to ``tail_tol``.
    """
    d = handle.d
    start = max(1, int(start))
    if stop is not None:
        total = []
        i = start
        while i <= stop:
            j = min(stop + 1, i + CHUNK)
            nl = handle.neg_log_range(i, j)
            total.append(_sum_exp(log_term(nl, np.arange(i, j, dtype=float))))
            i = j
        s = math.fsum(total)
        used = max(0, stop - start + 1)
        return SeriesRow(d, start, stop, s, used, 0.0, 0.0, 0.0, "exact", None, None, s, "exact")

    chunks_idx, chunks_lt, sums = [], [], []
    n = 0
    target = min(first, budget)
    last_nl = -math.inf
    row_tail = (math.inf, math.inf, math.inf, "none")
    slope = None
    converged = False
    while True:
        a, b = start + n, start + target
        nl = handle.neg_log_range(a, b)
        if check_order:
            if nl.size and (nl[0] < last_nl or np.any(np.diff(nl) < 0)):
                raise AssertionError("spectrum values consumed out of non-increasing order")
            last_nl = float(nl[-1]) if nl.size else last_nl
        idx = np.arange(a, b, dtype=float)
        lt = np.asarray(log_term(nl, idx), dtype=float)
        chunks_idx.append(idx)
        chunks_lt.append(lt)
        sums.append(_sum_exp(lt))
        n = target
        N = start + n - 1
        all_idx = np.concatenate(chunks_idx) if len(chunks_idx) > 1 else idx
        all_lt = np.concatenate(chunks_lt) if len(chunks_lt) > 1 else lt
        chunks_idx, chunks_lt = [all_idx], [all_lt]

        est = None
        if log_term_envelope is not None:
            env = envelope_tail(log_term_envelope, N, handle.envelope_exact)
            if env is not None:
                est, unc, upper = env
                row_tail = (est, upper, unc, "envelope")
                converged = unc < tail_tol
        if est is None:
            est, kind, _ = extrapolated_tail(all_idx, all_lt)
            row_tail = (est, est, est, kind)
            converged = est < tail_tol
        if converged or n >= budget:
            break
        target = min(2 * target, budget)

    partial = math.fsum(sums)
    fit = _decade_fit(all_idx[n // 10:], all_lt[n // 10:]) if n >= 30 else (None, None)
    slope = fit[0]
    half = _sum_exp(all_lt[: n // 2])
    growth = (partial - half) / half if half > 0 else 0.0
    est, upper, unc, kind = row_tail
    if converged:
        status = "converged"
    elif slope is not None and slope >= -1.0 + delta and growth > growth_threshold:
        status = "diverging"
    else:
        status = "unresolved"
    value = partial + est if math.isfinite(est) else math.inf
    return SeriesRow(d, start, None, partial, n, est, upper, unc, kind, slope, growth, value, status)
