"""Tractability functions T(eps^-1, d, p) and weak-tractability transforms h.

All families are evaluated in the log domain: ``log_T(log_x, d)`` takes
``log_x = log(eps^-1)`` and returns ``log T``.  ``log_x = -inf`` is the limit
``eps -> infinity``, so ``eval_T(0, d)`` is ``T(0, d, p)``.  Working with logs
lets the summability code feed ``-log(lambda_i)`` directly, including values of
``lambda_i`` that would underflow in binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidSpec

__all__ = [
    "TractFun",
    "HFun",
    "ValidationReport",
    "make_tfun",
    "eval_T",
    "eval_T0",
    "validate_tfun",
    "default_tfun_grid",
    "eval_h",
    "h_inverse",
    "validate_h",
    "default_h_grid",
    "TFUN_FAMILIES",
]


def _scale(p, arr):
    """``p * arr`` with the convention ``0 * inf = 0``."""
    if p == 0:
        return np.zeros_like(arr, dtype=float)
    return p * arr


def _pos(log_x):
    """``log max(1, x)`` from ``log x``."""
    return np.maximum(log_x, 0.0)


def _log_log1p(log_x):
    """``log max(1, log(1 + x))`` from ``log x``."""
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(np.logaddexp(0.0, log_x)), 0.0)


def _as_log_x(eps_inv):
    eps_inv = np.asarray(eps_inv, dtype=float)
    if np.any(eps_inv < 0):
        raise InvalidSpec("eps_inv must be non-negative")
    with np.errstate(divide="ignore"):
        return np.log(eps_inv)


# Registries for the separable and non-separable families.  Each entry maps
# log x (or d) to log(phi) / log(psi) at parameter p, or to phi-hat / psi-hat.
PHI = {
    "power": lambda log_x, p: _scale(p, _pos(log_x)),
    "log-power": lambda log_x, p: _scale(p, _log_log1p(log_x)),
    "exp": lambda log_x, p: _scale(p, np.exp(log_x)),
}
PSI = {
    "power": lambda d, q: q * math.log(d),
    "log-power": lambda d, q: q * math.log1p(math.log(d)),
    "exp": lambda d, q: q * (d - 1.0),
}
PHI_HAT = {
    "log": lambda log_x: 1.0 + _pos(log_x),
    "loglog": lambda log_x: 1.0 + _log_log1p(log_x),
    "power": lambda log_x: np.exp(_pos(log_x)),
}
PSI_HAT = {
    "log": lambda d: 1.0 + math.log(d),
    "power": lambda d: float(d),
    "one": lambda d: 1.0,
}


class TractFun:
    """A tractability function family with a fixed parameter vector.

    Subclasses implement ``_log_T`` and ``_log_T0``; ``n_params`` is the
    length ``s`` of the parameter vector.
    """

    family: str = ""
    n_params: int = 1

    def __init__(self, p: Sequence[float], **options):
        p = tuple(float(x) for x in np.atleast_1d(np.asarray(p, dtype=float)))
        if len(p) != self.n_params:
            raise InvalidSpec(
                f"{self.family} expects {self.n_params} parameter(s), got {len(p)}"
            )
        if any(not (x >= 0 and math.isfinite(x)) for x in p):
            raise InvalidSpec("tractability parameters must be finite and non-negative")
        self.p = p
        self.options = dict(options)

    def __repr__(self):
        opts = "".join(f", {k}={v!r}" for k, v in sorted(self.options.items()))
        return f"{type(self).__name__}(p={self.p}{opts})"

    def __eq__(self, other):
        return (type(self) is type(other) and self.p == other.p
                and self.options == other.options)

    def __hash__(self):
        return hash((type(self), self.p, tuple(sorted(self.options.items()))))

    def with_params(self, p) -> "TractFun":
        return type(self)(p, **self.options)

    def log_T(self, log_x, d: int):
        log_x = np.asarray(log_x, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._log_T(log_x, d)

    def log_T0(self, d: int) -> float:
        return float(self._log_T0(d))

    def eval_T(self, eps_inv, d: int):
        out = np.exp(self.log_T(_as_log_x(eps_inv), d))
        return float(out) if out.ndim == 0 else out

    def eval_T0(self, d: int) -> float:
        return math.exp(self.log_T0(d))

    def to_config(self) -> dict:
        cfg = {"family": self.family, "p": list(self.p)}
        cfg.update(self.options)
        return cfg

    def _log_T(self, log_x, d):  # pragma: no cover - abstract
        raise NotImplementedError

    def _log_T0(self, d):  # pragma: no cover - abstract
        raise NotImplementedError


class AlgebraicPolynomial(TractFun):
    """``max{1, eps^-p} d^q``."""

    family = "algebraic-polynomial"
    n_params = 2

    def _log_T(self, log_x, d):
        p, q = self.p
        return _scale(p, _pos(log_x)) + q * math.log(d)

    def _log_T0(self, d):
        return self.p[1] * math.log(d)


class ExponentialPolynomial(TractFun):
    """``max{1, log(1 + eps^-1)}^p d^q``."""

    family = "exponential-polynomial"
    n_params = 2

    def _log_T(self, log_x, d):
        p, q = self.p
        return _scale(p, _log_log1p(log_x)) + q * math.log(d)

    def _log_T0(self, d):
        return self.p[1] * math.log(d)


class AlgebraicQuasiPolynomial(TractFun):
    """``exp{p (1 + log max{1, eps^-1}) (1 + log d)}``."""

    family = "algebraic-quasi-polynomial"

    def _log_T(self, log_x, d):
        return _scale(self.p[0], (1.0 + _pos(log_x)) * (1.0 + math.log(d)))

    def _log_T0(self, d):
        return self.p[0] * (1.0 + math.log(d))


class ExponentialQuasiPolynomial(TractFun):
    """``exp{p (1 + log max{1, log(1 + eps^-1)}) (1 + log d)}``."""

    family = "exponential-quasi-polynomial"

    def _log_T(self, log_x, d):
        return _scale(self.p[0], (1.0 + _log_log1p(log_x)) * (1.0 + math.log(d)))

    def _log_T0(self, d):
        return self.p[0] * (1.0 + math.log(d))


class Separable(TractFun):
    """``phi(eps^-1, p) psi(d, q)`` with phi, psi picked from a small registry."""

    family = "separable"
    n_params = 2

    def __init__(self, p, phi: str = "power", psi: str = "power"):
        if phi not in PHI or psi not in PSI:
            raise InvalidSpec(f"unknown separable components phi={phi!r}, psi={psi!r}")
        super().__init__(p, phi=phi, psi=psi)

    def _log_T(self, log_x, d):
        p, q = self.p
        return PHI[self.options["phi"]](log_x, p) + PSI[self.options["psi"]](d, q)

    def _log_T0(self, d):
        p, q = self.p
        return float(PHI[self.options["phi"]](np.array(-np.inf), p)) + PSI[self.options["psi"]](d, q)


class NonSeparable(TractFun):
    """``exp(p phi_hat(eps^-1) psi_hat(d))``."""

    family = "non-separable"

    def __init__(self, p, phi_hat: str = "log", psi_hat: str = "log"):
        if phi_hat not in PHI_HAT or psi_hat not in PSI_HAT:
            raise InvalidSpec(
                f"unknown non-separable components phi_hat={phi_hat!r}, psi_hat={psi_hat!r}"
            )
        super().__init__(p, phi_hat=phi_hat, psi_hat=psi_hat)

    def _log_T(self, log_x, d):
        inner = PHI_HAT[self.options["phi_hat"]](log_x) * PSI_HAT[self.options["psi_hat"]](d)
        return _scale(self.p[0], inner)

    def _log_T0(self, d):
        return self.p[0] * float(PHI_HAT[self.options["phi_hat"]](np.array(-np.inf))) \
            * PSI_HAT[self.options["psi_hat"]](d)


class WeakSum(TractFun):
    """``max(1, eps^-1)^s + d^t``, the (s, t)-weak tractability function."""

    family = "weak-sum"
    n_params = 2

    def _log_T(self, log_x, d):
        s, t = self.p
        return np.logaddexp(_scale(s, _pos(log_x)), t * math.log(d))

    def _log_T0(self, d):
        return math.log1p(d ** self.p[1])


TFUN_FAMILIES: dict[str, type[TractFun]] = {
    cls.family: cls
    for cls in (AlgebraicPolynomial, ExponentialPolynomial, AlgebraicQuasiPolynomial,
                ExponentialQuasiPolynomial, Separable, NonSeparable, WeakSum)
}


def make_tfun(family: str, p, **options) -> TractFun:
    try:
        cls = TFUN_FAMILIES[family]
    except KeyError:
        raise InvalidSpec(f"unknown tractability family {family!r}") from None
    return cls(p, **options)


def eval_T(tf: TractFun, eps_inv, d: int):
    return tf.eval_T(eps_inv, d)


def eval_T0(tf: TractFun, d: int) -> float:
    return tf.eval_T0(d)


# ----------------------------------------------------------------------
# Axiom validation
# ----------------------------------------------------------------------

@dataclass
class ValidationReport:
    passed: bool
    violations: list = field(default_factory=list)
    k_estimate: Optional[float] = None
    checks: dict = field(default_factory=dict)
    note: str = "grid-based evidence, not a proof"

    def to_dict(self):
        return {
            "passed": self.passed,
            "violations": self.violations,
            "k_estimate": self.k_estimate,
            "checks": self.checks,
            "note": self.note,
        }


def default_tfun_grid(n_eps=20, dims=(1, 2, 3, 4, 5, 6, 8, 12, 16, 32), taus=(1.0, 1.5, 2.0, 3.0, 5.0)):
    """A product grid of ``n_eps * len(dims) * len(taus)`` points (1000 by default)."""
    eps_inv = np.concatenate([[0.0], np.logspace(-3, 12, n_eps - 1)])
    return [(float(x), int(d), float(t)) for x in eps_inv for d in dims for t in taus]


def validate_tfun(tf: TractFun, grid=None, *, rtol=1e-12, k_growth=2.0) -> ValidationReport:
    """Check monotonicity, divergence and the power condition on a grid.

    ``grid`` is a sequence of ``(eps_inv, d, tau)`` triples.  The ratio
    ``T(x, d, p)**tau / T(x, d, tau p)`` is tracked as an estimate of
    ``K_{p, tau}``; it counts as bounded when its maximum over the outer half
    of the grid (largest ``eps_inv``) exceeds the inner-half maximum by no more
    than ``k_growth``.
    """
    if grid is None:
        grid = default_tfun_grid()
    grid = list(grid)
    if not grid:
        raise InvalidSpec("validation grid is empty")
    xs = sorted({g[0] for g in grid})
    ds = sorted({g[1] for g in grid})
    taus = sorted({g[2] for g in grid})
    if taus[0] < 1:
        raise InvalidSpec("tau values must be >= 1")
    log_x = _as_log_x(np.array(xs))
    violations = []
    slack = lambda a: rtol * max(1.0, abs(a))

    # (a) monotone in eps^-1 and in d
    table = np.array([tf.log_T(log_x, d) for d in ds])  # shape (len(ds), len(xs))
    for r, d in enumerate(ds):
        for c in range(1, len(xs)):
            if table[r, c] < table[r, c - 1] - slack(table[r, c - 1]):
                violations.append({"axiom": "monotone-eps", "d": d,
                                   "eps_inv": [xs[c - 1], xs[c]]})
    for c, x in enumerate(xs):
        for r in range(1, len(ds)):
            if table[r, c] < table[r - 1, c] - slack(table[r - 1, c]):
                violations.append({"axiom": "monotone-d", "eps_inv": x, "d": [ds[r - 1], ds[r]]})
    # ... and in each parameter component
    for k in range(len(tf.p)):
        for bump in (0.5, 2.0):
            p2 = list(tf.p)
            p2[k] = p2[k] + bump
            higher = np.array([tf.with_params(p2).log_T(log_x, d) for d in ds])
            bad = np.argwhere(higher < table - rtol * np.maximum(1.0, np.abs(table)))
            for r, c in bad[:5]:
                violations.append({"axiom": "monotone-p", "component": k,
                                   "eps_inv": xs[c], "d": ds[r]})
    # T(0, d, p) is the infimum over eps
    t0 = np.array([tf.log_T0(d) for d in ds])
    if np.any(table < t0[:, None] - rtol * np.maximum(1.0, np.abs(t0[:, None]))):
        violations.append({"axiom": "T0-infimum"})
    if not np.all(np.isfinite(t0)):
        violations.append({"axiom": "T0-positive"})

    # (b) divergence as eps -> 0, probed far beyond the grid in the log domain
    probe = np.array([1.0, 1e1, 1e2, 1e3, 1e5, 1e8, 1e12, 1e50, 1e150, 1e300])
    diverges = True
    for d in ds:
        lt = tf.log_T(np.log(probe), d)
        growing = np.all(np.diff(lt) >= -slack(1.0)) and lt[-1] - tf.log_T0(d) >= 1.0
        if not growing:
            diverges = False
            violations.append({"axiom": "divergence", "d": d})
            break

    # (c) power condition, K_{p,tau} estimate
    half = len(xs) // 2
    log_ratio_inner = -np.inf
    log_ratio_all = -np.inf
    for tau in taus:
        scaled = tf.with_params([tau * x for x in tf.p])
        lr = np.array([tau * tf.log_T(log_x, d) - scaled.log_T(log_x, d) for d in ds])
        log_ratio_all = max(log_ratio_all, float(np.max(lr)))
        log_ratio_inner = max(log_ratio_inner, float(np.max(lr[:, : half + 1])))
    k_est = math.exp(log_ratio_all)
    bounded = math.isfinite(log_ratio_all) and (log_ratio_all - log_ratio_inner) <= math.log(k_growth)
    if not bounded:
        violations.append({"axiom": "power-condition", "k_estimate": k_est})

    checks = {
        "monotone": not any(v["axiom"].startswith("monotone") for v in violations),
        "divergence": diverges,
        "power_condition_bounded": bounded,
        "grid_points": len(grid),
    }
    return ValidationReport(not violations, violations, k_est, checks)


# ----------------------------------------------------------------------
# h functions
# ----------------------------------------------------------------------

class HFun:
    """A transform h: [0, inf) -> [1, inf) used by sub-h tractability.

    ``exp`` and ``exp-power`` (``exp(x**r)``, ``r >= 1``) satisfy the axioms.
    ``power`` (``(1 + x)**r``) is kept as a known counterexample for the
    validator; it is strictly increasing with ``h(0) = 1`` but ``log h`` is not
    superadditive.
    """

    KINDS = ("exp", "exp-power", "power")

    def __init__(self, kind: str = "exp", r: float = 1.0):
        if kind not in self.KINDS:
            raise InvalidSpec(f"unknown h family {kind!r}")
        if kind == "exp-power" and r < 1:
            raise InvalidSpec("exp-power needs r >= 1")
        if kind == "power" and r <= 0:
            raise InvalidSpec("power needs r > 0")
        self.kind = kind
        self.r = float(r)

    def __repr__(self):
        return f"HFun({self.kind!r}, r={self.r})"

    def log_h(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exp":
            return x
        if self.kind == "exp-power":
            with np.errstate(over="ignore"):
                return x ** self.r
        return self.r * np.log1p(x)

    def __call__(self, x):
        with np.errstate(over="ignore"):
            out = np.exp(self.log_h(x))
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 1):
            raise InvalidSpec("h_inverse is defined for y >= 1")
        if self.kind == "exp":
            out = np.log(y)
        elif self.kind == "exp-power":
            out = np.log(y) ** (1.0 / self.r)
        else:
            out = y ** (1.0 / self.r) - 1.0
        return float(out) if out.ndim == 0 else out

    def to_config(self):
        cfg = {"family": self.kind}
        if self.kind != "exp":
            cfg["r"] = self.r
        return cfg


def eval_h(h: HFun, x):
    if np.any(np.asarray(x) < 0):
        raise InvalidSpec("h is defined on [0, inf)")
    return h(x)


def h_inverse(h: HFun, y):
    return h.inverse(y)


def default_h_grid():
    pts = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0]
    return [(x, y) for x in pts for y in pts]


def validate_h(h: HFun, grid=None, zw_grid=None, *, rtol=1e-12) -> ValidationReport:
    """Check h(0) = 1, strict monotonicity, superadditivity of log h, and
    subadditivity of the inverse on ``(z, w)`` pairs."""
    grid = default_h_grid() if grid is None else list(grid)
    if zw_grid is None:
        zw_grid = [(z, w) for z in (1.0, 1.5, 2.0, math.e, 10.0, 1e3)
                   for w in (1.0, 2.0, 5.0, 100.0)]
    violations = []
    if abs(h(0.0) - 1.0) > rtol:
        violations.append({"axiom": "h(0)=1", "h0": h(0.0)})
    xs = sorted({v for pair in grid for v in pair})
    lh = h.log_h(np.array(xs))
    for k in range(1, len(xs)):
        if not lh[k] > lh[k - 1]:
            violations.append({"axiom": "strictly-increasing", "x": [xs[k - 1], xs[k]]})
    for x, y in grid:
        lhs = float(h.log_h(x + y))
        rhs = float(h.log_h(x) + h.log_h(y))
        if lhs < rhs - rtol * max(1.0, abs(rhs)):
            violations.append({"axiom": "superadditive", "x": x, "y": y,
                               "h(x+y)": h(x + y), "h(x)h(y)": h(x) * h(y)})
    for z, w in zw_grid:
        lhs = h.inverse(z * w)
        rhs = h.inverse(z) + h.inverse(w)
        if lhs > rhs + rtol * max(1.0, abs(rhs)):
            violations.append({"axiom": "inverse-subadditive", "z": z, "w": w})
    checks = {"grid_points": len(grid), "zw_points": len(zw_grid)}
    return ValidationReport(not violations, violations, None, checks)
