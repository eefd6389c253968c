"""Singular-value sequences with lazy, ordered access.

Every spectrum is a non-increasing positive sequence ``lambda_1 >= lambda_2 >= ...``
tending to zero.  Values are served two ways:

* ``value_at(i)`` returns the binary64 value exactly as the closed form (or
  ``omega ** (E / 2)`` for Korobov) evaluates it; complexity searches compare
  these values with ``<=`` and nothing else.
* ``neg_log_range(start, stop)`` returns ``-log(lambda_i)`` as a numpy array.
  The summability code works exclusively in this domain, so values far below
  the double-precision underflow threshold still contribute correctly.

Indices are 1-based throughout, matching the mathematical convention.
"""

from __future__ import annotations

import heapq
import itertools
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import IndexBeyondTail, SpectrumError

__all__ = [
    "EnumeratedValue",
    "SpectrumHandle",
    "GeometricSpectrum",
    "PSeriesSpectrum",
    "LogSlowSpectrum",
    "SuperExponentialSpectrum",
    "DScaledGeometricSpectrum",
    "ExplicitSpectrum",
    "KorobovParams",
    "KorobovSpectrum",
    "value_at",
    "enumerate_spectrum",
    "upper_envelope",
]


@dataclass(frozen=True)
class EnumeratedValue:
    """One distinct value of the sorted sequence and the ranks it occupies."""

    value: float
    multiplicity: int
    rank_range: tuple[int, int]
    neg_log: float

    def __post_init__(self):
        lo, hi = self.rank_range
        if hi - lo + 1 != self.multiplicity:
            raise ValueError("rank range does not match multiplicity")


class SpectrumHandle(ABC):
    """A singular-value sequence for one dimension ``d``."""

    family_id: str = "abstract"
    #: True when ``envelope_neg_log`` coincides with the sequence at integers,
    #: which lets the tail integral bracket the remainder from both sides.
    envelope_exact: bool = False

    def __init__(self, params: dict, d: int = 1):
        if int(d) != d or d < 1:
            raise SpectrumError(f"dimension must be a positive integer, got {d!r}")
        self.params = dict(params)
        self.d = int(d)

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d}, params={self.params!r})"

    @abstractmethod
    def value_at(self, i: int) -> float:
        """Return ``lambda_{i,d}``."""

    @abstractmethod
    def neg_log_range(self, start: int, stop: int) -> np.ndarray:
        """Return ``-log(lambda_i)`` for ``start <= i < stop``."""

    def neg_log_at(self, i: int) -> float:
        return float(self.neg_log_range(i, i + 1)[0])

    def envelope_neg_log(self, log_x: np.ndarray) -> Optional[np.ndarray]:
        """``-log`` of an upper envelope evaluated at real ``x = exp(log_x)``.

        Returns None when the family has no closed-form envelope.
        """
        return None

    @property
    def has_envelope(self) -> bool:
        return self.envelope_neg_log(np.zeros(1)) is not None

    def upper_envelope(self, i: float) -> Optional[float]:
        out = self.envelope_neg_log(np.array([math.log(i)]))
        if out is None:
            return None
        return math.exp(-float(out[0]))

    def enumerate(self) -> Iterator[EnumeratedValue]:
        """Yield the sequence in non-increasing order, one value per rank."""
        for i in itertools.count(1):
            yield EnumeratedValue(self.value_at(i), 1, (i, i), self.neg_log_at(i))

    def _check_index(self, i):
        if int(i) != i or i < 1:
            raise IndexError(f"spectrum indices start at 1, got {i!r}")


def _index_array(start, stop):
    if start < 1 or stop < start:
        raise IndexError(f"invalid index range [{start}, {stop})")
    return np.arange(start, stop, dtype=np.float64)


class GeometricSpectrum(SpectrumHandle):
    """``lambda_i = r**i`` with ``0 < r < 1``."""

    family_id = "geometric"
    envelope_exact = True

    def __init__(self, ratio: float = 0.5, d: int = 1):
        if not 0.0 < ratio < 1.0:
            raise SpectrumError("geometric ratio must lie in (0, 1)")
        super().__init__({"ratio": ratio}, d)
        self.ratio = float(ratio)
        self._rate = -math.log(self.ratio)

    def value_at(self, i):
        self._check_index(i)
        return self.ratio ** i

    def neg_log_range(self, start, stop):
        return _index_array(start, stop) * self._rate

    def envelope_neg_log(self, log_x):
        with np.errstate(over="ignore"):
            return np.exp(log_x) * self._rate


class PSeriesSpectrum(SpectrumHandle):
    """``lambda_i = i**(-alpha)``."""

    family_id = "p-series"
    envelope_exact = True

    def __init__(self, alpha: float = 2.0, d: int = 1):
        if not alpha > 0:
            raise SpectrumError("p-series exponent must be positive")
        super().__init__({"alpha": alpha}, d)
        self.alpha = float(alpha)

    def value_at(self, i):
        self._check_index(i)
        return float(i) ** -self.alpha

    def neg_log_range(self, start, stop):
        return self.alpha * np.log(_index_array(start, stop))

    def envelope_neg_log(self, log_x):
        return self.alpha * np.asarray(log_x, dtype=float)


class LogSlowSpectrum(SpectrumHandle):
    """``lambda_i = 1 / log(i + 2)``; decays slower than any power."""

    family_id = "log-slow"
    envelope_exact = True

    def __init__(self, d: int = 1):
        super().__init__({}, d)

    def value_at(self, i):
        self._check_index(i)
        return 1.0 / math.log(i + 2)

    def neg_log_range(self, start, stop):
        return np.log(np.log(_index_array(start, stop) + 2.0))

    def envelope_neg_log(self, log_x):
        return np.log(np.logaddexp(np.asarray(log_x, dtype=float), math.log(2.0)))


class SuperExponentialSpectrum(SpectrumHandle):
    """``lambda_i = exp(-i**2)``."""

    family_id = "super-exponential"
    envelope_exact = True

    def __init__(self, d: int = 1):
        super().__init__({}, d)

    def value_at(self, i):
        self._check_index(i)
        return math.exp(-float(i) * i)

    def neg_log_range(self, start, stop):
        i = _index_array(start, stop)
        return i * i

    def envelope_neg_log(self, log_x):
        with np.errstate(over="ignore"):
            return np.exp(2.0 * np.asarray(log_x, dtype=float))


class DScaledGeometricSpectrum(SpectrumHandle):
    """``lambda_{i,d} = r**(i/d)``: decay slows down linearly with ``d``."""

    family_id = "d-scaled-geometric"
    envelope_exact = True

    def __init__(self, ratio: float = 0.5, d: int = 1):
        if not 0.0 < ratio < 1.0:
            raise SpectrumError("ratio must lie in (0, 1)")
        super().__init__({"ratio": ratio}, d)
        self.ratio = float(ratio)
        self._rate = -math.log(self.ratio) / self.d

    def value_at(self, i):
        self._check_index(i)
        return self.ratio ** (i / self.d)

    def neg_log_range(self, start, stop):
        return _index_array(start, stop) * self._rate

    def envelope_neg_log(self, log_x):
        with np.errstate(over="ignore"):
            return np.exp(log_x) * self._rate


class ExplicitSpectrum(SpectrumHandle):
    """A finite list of leading values followed by an optional geometric tail.

    ``tail`` is either ``None`` (finite list, no access beyond its end),
    ``("geometric", ratio)`` which continues ``values[-1] * ratio**k``, or the
    string ``"zero-forbidden"``, which is rejected because every spectrum here
    must have infinitely many positive values.
    """

    family_id = "explicit"
    envelope_exact = True

    def __init__(self, values: Sequence[float], tail=None, d: int = 1):
        vals = [float(v) for v in values]
        if not vals:
            raise SpectrumError("explicit spectrum needs at least one value")
        if any(not (v > 0 and math.isfinite(v)) for v in vals):
            raise SpectrumError("explicit spectrum values must be positive and finite")
        if any(b > a for a, b in zip(vals, vals[1:])):
            raise SpectrumError("explicit spectrum values must be non-increasing")
        ratio = None
        if tail == "zero-forbidden":
            raise SpectrumError(
                "tail 'zero-forbidden' leaves finitely many positive values; "
                "declare a geometric tail instead"
            )
        if tail is not None:
            kind, ratio = tail
            if kind != "geometric" or not 0.0 < float(ratio) < 1.0:
                raise SpectrumError(f"unsupported tail model {tail!r}")
            ratio = float(ratio)
        super().__init__({"values": vals, "tail": tail}, d)
        self.values = vals
        self.tail_ratio = ratio
        self._neg_log = np.array([-math.log(v) for v in vals])
        self._n = len(vals)

    def value_at(self, i):
        self._check_index(i)
        if i <= self._n:
            return self.values[i - 1]
        if self.tail_ratio is None:
            raise IndexBeyondTail(f"index {i} beyond explicit list of length {self._n}")
        return self.values[-1] * self.tail_ratio ** (i - self._n)

    def neg_log_range(self, start, stop):
        idx = np.arange(start, stop)
        if idx.size and idx[-1] > self._n and self.tail_ratio is None:
            raise IndexBeyondTail(f"index {idx[-1]} beyond explicit list of length {self._n}")
        out = np.empty(idx.size)
        head = idx <= self._n
        out[head] = self._neg_log[idx[head] - 1]
        if self.tail_ratio is not None:
            rate = -math.log(self.tail_ratio)
            out[~head] = self._neg_log[-1] + (idx[~head] - self._n) * rate
        return out

    def envelope_neg_log(self, log_x):
        if self.tail_ratio is None:
            return None
        log_x = np.asarray(log_x, dtype=float)
        with np.errstate(over="ignore"):
            x = np.exp(log_x)
        rate = -math.log(self.tail_ratio)
        out = np.empty_like(x)
        tail = x >= self._n
        with np.errstate(over="ignore", invalid="ignore"):
            out[tail] = self._neg_log[-1] + (x[tail] - self._n) * rate
        # step function lambda_{floor(x)} on the head keeps the envelope above the sequence
        k = np.clip(np.floor(x[~tail]).astype(np.int64), 1, self._n)
        out[~tail] = self._neg_log[k - 1]
        return out

    def enumerate(self):
        for i in itertools.count(1):
            if self.tail_ratio is None and i > self._n:
                return
            yield EnumeratedValue(self.value_at(i), 1, (i, i), self.neg_log_at(i))


@dataclass(frozen=True)
class KorobovParams:
    omega: float
    a: tuple
    b: tuple
    d: int

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise SpectrumError("omega must lie in (0, 1)")
        if len(self.a) < self.d or len(self.b) < self.d:
            raise SpectrumError("weight sequences shorter than the dimension")
        for name, w in (("a", self.a), ("b", self.b)):
            w = w[: self.d]
            if any(not x > 0 for x in w):
                raise SpectrumError(f"weights {name} must be positive")
            if any(y < x for x, y in zip(w, w[1:])):
                raise SpectrumError(f"weights {name} must be non-decreasing")


class KorobovSpectrum(SpectrumHandle):
    """Values ``omega ** (sum_j a_j |h_j|**b_j / 2)`` over ``h`` in ``Z^d``.

    The multiset is flattened lazily by a best-first search over exponent
    patterns ``h`` in ``N_0^d``; each pattern stands for its ``2**|support(h)|``
    sign choices.  Every pattern has exactly one generator:

    * ``h + e_m`` from ``h`` (``m`` the last nonzero coordinate),
    * ``h + e_{m+1}`` from ``h`` (open the next coordinate),
    * ``h - e_m + e_{m+1}`` from ``h`` when ``h_m == 1`` (next sibling).

    Since ``a`` is non-decreasing, siblings come in key order, so at most three
    pushes happen per pop and no visited set is needed.  Exponents are summed
    with ``math.fsum`` over the nonzero coordinates, which makes tie detection
    independent of summation order.
    """

    family_id = "korobov"

    def __init__(self, omega: float, a: Sequence[float], b: Sequence[float], d: int = 1):
        kp = KorobovParams(float(omega), tuple(float(x) for x in a[:d]),
                           tuple(float(x) for x in b[:d]), int(d))
        super().__init__({"omega": kp.omega, "a": list(kp.a), "b": list(kp.b)}, d)
        self.kp = kp
        self._log_inv_omega = -math.log(kp.omega)
        zero = (0,) * self.d
        self._heap = [(0.0, zero)]
        self._blocks_key: list[float] = []
        self._blocks_mult: list[int] = []
        self._blocks_hi: list[int] = []
        self._flat = np.empty(1024)
        self._n_flat = 0
        self._lock = threading.RLock()

    # -- best-first core ------------------------------------------------
    def _cost(self, j, h):
        return self.kp.a[j] * float(h) ** self.kp.b[j]

    def _key(self, pattern):
        return math.fsum(self._cost(j, h) for j, h in enumerate(pattern) if h)

    def _expand(self, pattern):
        d = self.d
        m = d - 1
        while m >= 0 and pattern[m] == 0:
            m -= 1
        push = []
        if m >= 0:
            child = list(pattern)
            child[m] += 1
            push.append(tuple(child))
        if m + 1 < d:
            child = list(pattern)
            child[m + 1] = 1
            push.append(tuple(child))
            if m >= 0 and pattern[m] == 1:
                sib = list(pattern)
                sib[m] = 0
                sib[m + 1] = 1
                push.append(tuple(sib))
        for child in push:
            heapq.heappush(self._heap, (self._key(child), child))

    def _next_block(self):
        key, pattern = heapq.heappop(self._heap)
        self._expand(pattern)
        mult = 1 << sum(1 for h in pattern if h)
        while self._heap and self._heap[0][0] == key:
            _, pattern = heapq.heappop(self._heap)
            self._expand(pattern)
            mult += 1 << sum(1 for h in pattern if h)
        lo = self._n_flat + 1
        self._append_flat(key, mult)
        self._blocks_key.append(key)
        self._blocks_mult.append(mult)
        self._blocks_hi.append(self._n_flat)
        return key, mult, lo

    def _append_flat(self, key, mult):
        need = self._n_flat + mult
        if need > self._flat.size:
            grown = np.empty(max(need, 2 * self._flat.size))
            grown[: self._n_flat] = self._flat[: self._n_flat]
            self._flat = grown
        self._flat[self._n_flat : need] = key
        self._n_flat = need

    def _ensure(self, n):
        if self._n_flat >= n:
            return
        with self._lock:
            while self._n_flat < n:
                self._next_block()

    # -- public surface -------------------------------------------------
    def exponent_at(self, i):
        """Return ``sum_j a_j |h_j|**b_j`` for the i-th sorted value."""
        self._check_index(i)
        self._ensure(i)
        return float(self._flat[i - 1])

    def value_at(self, i):
        return self.kp.omega ** (0.5 * self.exponent_at(i))

    def neg_log_range(self, start, stop):
        if start < 1 or stop < start:
            raise IndexError(f"invalid index range [{start}, {stop})")
        self._ensure(stop - 1)
        return 0.5 * self._log_inv_omega * self._flat[start - 1 : stop - 1]

    def enumerate(self):
        k = 0
        while True:
            with self._lock:
                while k >= len(self._blocks_key):
                    self._next_block()
                key = self._blocks_key[k]
                mult = self._blocks_mult[k]
                hi = self._blocks_hi[k]
            yield EnumeratedValue(
                self.kp.omega ** (0.5 * key), mult, (hi - mult + 1, hi),
                0.5 * key * self._log_inv_omega,
            )
            k += 1

    def envelope_neg_log(self, log_x):
        # Only d = 1 has a closed form: the i-th value is omega^(a/2 * ceil((i-1)/2)^b).
        if self.d != 1:
            return None
        a, b = self.kp.a[0], self.kp.b[0]
        with np.errstate(over="ignore"):
            x = np.exp(np.asarray(log_x, dtype=float))
            half = np.maximum(x - 1.0, 0.0) / 2.0
            return 0.5 * self._log_inv_omega * a * half ** b


def value_at(spec: SpectrumHandle, i: int) -> float:
    return spec.value_at(i)


def enumerate_spectrum(spec: SpectrumHandle) -> Iterator[EnumeratedValue]:
    return spec.enumerate()


def upper_envelope(spec: SpectrumHandle, i: float) -> Optional[float]:
    return spec.upper_envelope(i)
