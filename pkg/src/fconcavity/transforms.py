"""Admissible transforms F: I -> R ∪ {-inf}.

A :class:`Transform` bundles the forward map on the interior of its interval,
closed-form endpoint values, an inverse, an optional derivative and an
optional mpmath evaluator used when witnesses are re-checked in high
precision.  The catalog covers the power family ``Φ_p``, its starred variant
``Φ_p*``, the power log-family ``L_α`` and the scaled half-log ``L_{1/2}^k``;
:func:`combine` builds new transforms from old ones.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import mpmath
import numpy as np

from .extended import NEG_INF, ExtArray, ExtendedReal, ext

__all__ = [
    "DomainError",
    "Interval",
    "Transform",
    "make_power",
    "make_power_star",
    "make_log_power",
    "make_scaled_half_log",
    "custom",
    "combine",
    "affine",
    "reflect",
    "rescale",
    "restrict",
    "conj_exp",
    "conj_log",
    "f_mean",
    "power_mean",
    "AuditReport",
    "admissibility_audit",
    "parse_transform",
]


class DomainError(ValueError):
    """A value fell outside the interval a transform or field lives on."""


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ValueError(f"interval needs lo < hi, got lo={lo}, hi={hi}")
        if hi == math.inf and self.hi_closed:
            raise ValueError("an interval cannot be closed at +inf")
        if lo == -math.inf and self.lo_closed:
            raise ValueError("an interval cannot be closed at -inf")

    @classmethod
    def open(cls, lo, hi):
        return cls(lo, hi, False, False)

    @classmethod
    def closed(cls, lo, hi):
        return cls(lo, hi, True, True)

    def __str__(self):
        return "{}{}, {}{}".format(
            "[" if self.lo_closed else "(",
            _fmt(self.lo),
            _fmt(self.hi),
            "]" if self.hi_closed else ")",
        )

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above & below

    def interior_contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)

    def is_subset_of(self, other: "Interval") -> bool:
        if self.lo < other.lo or self.hi > other.hi:
            return False
        if self.lo == other.lo and self.lo_closed and not other.lo_closed:
            return False
        if self.hi == other.hi and self.hi_closed and not other.hi_closed:
            return False
        return True

    def working_window(self) -> tuple[float, float]:
        """A compact, well-conditioned sub-range of the interior.

        Used for sampling: finite intervals lose 5% at each end, half-lines
        keep a window of width about 20 next to the finite end.
        """
        lo, hi = self.lo, self.hi
        if math.isfinite(lo) and math.isfinite(hi):
            w = hi - lo
            return lo + 0.05 * w, hi - 0.05 * w
        if math.isfinite(lo):
            return lo + 0.05, lo + 20.0
        if math.isfinite(hi):
            return hi - 20.0, hi - 0.05
        return -10.0, 10.0

    def to_json(self) -> dict:
        return {
            "lo": _fmt(self.lo) if math.isinf(self.lo) else self.lo,
            "hi": _fmt(self.hi) if math.isinf(self.hi) else self.hi,
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }


ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Transform:
    """An admissible function on ``interval``.

    ``forward`` is only ever called on interior points and must return finite
    values there.  ``lo_value``/``hi_value`` give closed-form values at closed
    endpoints (``None`` means "use ``forward``").
    """

    name: str
    params: tuple
    interval: Interval
    forward: ArrayFn
    inverse_fn: Optional[ArrayFn] = None
    derivative_fn: Optional[ArrayFn] = None
    lo_value: Optional[ExtendedReal] = None
    hi_value: Optional[ExtendedReal] = None
    mp_forward: Optional[Callable] = None
    spec: str = ""

    # -- evaluation -----------------------------------------------------
    @property
    def admits_minus_infinity_at_lo(self) -> bool:
        return self.interval.lo_closed and self.lo_value is not None and self.lo_value.is_neg_inf

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def _endpoint(self, which: str) -> Optional[ExtendedReal]:
        iv = self.interval
        if which == "lo":
            if not iv.lo_closed:
                return None
            if self.lo_value is not None:
                return self.lo_value
            return ExtendedReal(float(self.forward(np.array([iv.lo]))[0]))
        if not iv.hi_closed:
            return None
        if self.hi_value is not None:
            return self.hi_value
        return ExtendedReal(float(self.forward(np.array([iv.hi]))[0]))

    def evaluate(self, tau) -> ExtArray:
        """Vectorised F(tau); raises :class:`DomainError` outside the interval."""
        tau = np.asarray(tau, dtype=float)
        ok = self.interval.contains(tau)
        if not np.all(ok):
            bad = tau[~ok].ravel()[0]
            raise DomainError(f"{self.spec}: argument {bad!r} outside {self.interval}")
        fin = np.zeros(tau.shape)
        neg = np.zeros(tau.shape, dtype=bool)
        special = np.zeros(tau.shape, dtype=bool)
        for which, end in (("lo", self.interval.lo), ("hi", self.interval.hi)):
            val = self._endpoint(which)
            if val is None:
                continue
            sel = tau == end
            if not sel.any():
                continue
            special |= sel
            if val.is_neg_inf:
                neg |= sel
            else:
                fin[sel] = val.value
        rest = ~special
        if rest.any():
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                vals = np.asarray(self.forward(tau[rest]), dtype=float)
            if not np.all(np.isfinite(vals)):
                bad = tau[rest][~np.isfinite(vals)][0]
                raise FloatingPointError(f"{self.spec}: non-finite value at interior point {bad!r}")
            fin[rest] = vals
        return ExtArray(fin, neg)

    def __call__(self, tau) -> ExtendedReal:
        return self.evaluate(np.array([float(tau)]))[0]

    def inverse(self, y):
        """F^{-1}; accepts floats, arrays, or :class:`ExtendedReal` (-inf maps to lo)."""
        if isinstance(y, ExtendedReal):
            if y.is_neg_inf:
                if not self.admits_minus_infinity_at_lo:
                    raise DomainError(f"{self.spec}: -inf is not a value of this transform")
                return self.interval.lo
            y = y.value
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.inverse_fn is not None:
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                out = np.asarray(self.inverse_fn(y), dtype=float)
        else:
            out = np.array([_bisect_inverse(self, v) for v in y])
        # the closed forms may overshoot an endpoint by an ulp
        out = np.clip(out, self.interval.lo, self.interval.hi)
        if np.any(np.isnan(out)):
            bad = y[np.isnan(out)][0]
            raise DomainError(f"{self.spec}: {bad!r} is not in the range of this transform")
        return float(out[0]) if scalar else out

    def derivative(self, tau):
        if self.derivative_fn is None:
            return None
        tau = np.asarray(tau, dtype=float)
        return self.derivative_fn(tau)

    def mp_value(self, tau):
        """High-precision F(tau) as an mpmath number (``-inf`` as ``mpmath.ninf``)."""
        tau_mp = mpmath.mpf(tau)
        iv = self.interval
        if iv.lo_closed and tau_mp == iv.lo:
            v = self._endpoint("lo")
            return mpmath.ninf if v.is_neg_inf else mpmath.mpf(v.value)
        if iv.hi_closed and tau_mp == iv.hi:
            v = self._endpoint("hi")
            return mpmath.ninf if v.is_neg_inf else mpmath.mpf(v.value)
        if self.mp_forward is None:
            raise NotImplementedError(f"{self.spec} has no high-precision evaluator")
        return self.mp_forward(tau_mp)

    def value_range(self) -> tuple[ExtendedReal, ExtendedReal]:
        """(inf F, sup F) over the interval, via endpoints and limits."""
        iv = self.interval
        lo = self._endpoint("lo")
        if lo is None:
            lo = _limit(self, iv.lo, from_above=True)
        hi = self._endpoint("hi")
        if hi is None:
            hi = _limit(self, iv.hi, from_above=False)
        return lo, hi

    def __str__(self):
        return self.spec

    def __repr__(self):
        return f"Transform({self.spec!r} on {self.interval})"


def _limit(F: Transform, end: float, from_above: bool) -> ExtendedReal:
    """Numerical one-sided limit at an open endpoint (for reporting only)."""
    if math.isinf(end):
        pts = np.array([10.0 ** k for k in (2, 4, 8, 16, 32, 64)])
        pts = -pts if end < 0 else pts
    else:
        base = end if from_above else end
        sign = 1.0 if from_above else -1.0
        scale = max(abs(end), 1.0)
        pts = base + sign * scale * np.array([10.0 ** -k for k in (2, 4, 6, 8, 10, 12)])
    with np.errstate(all="ignore"):
        vals = np.asarray(F.forward(pts), dtype=float)
    vals = vals[np.isfinite(vals)]
    if len(vals) < 2:
        return NEG_INF if from_above else ExtendedReal(inf=1)
    last, prev = vals[-1], vals[-2]
    # a slowly-settling sequence is treated as convergent
    if abs(last - prev) <= 1e-6 * max(1.0, abs(last)):
        return ExtendedReal(float(last))
    return NEG_INF if from_above else ExtendedReal(inf=1)


def _bisect_inverse(F: Transform, y: float, atol: float = 1e-13) -> float:
    iv = F.interval
    a, b = iv.working_window()
    fa, fb = float(F(a)), float(F(b))
    # widen the bracket towards the endpoints
    for _ in range(200):
        if fa <= y:
            break
        a = iv.lo + (a - iv.lo) / 2 if math.isfinite(iv.lo) else a - 2 * (abs(a) + 1)
        fa = float(F(a))
    for _ in range(200):
        if fb >= y:
            break
        b = iv.hi - (iv.hi - b) / 2 if math.isfinite(iv.hi) else b + 2 * (abs(b) + 1)
        fb = float(F(b))
    if not fa <= y <= fb:
        return math.nan
    for _ in range(400):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = float(F(m))
        if abs(fm - y) <= atol:
            return m
        if fm < y:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# catalog

def _phi(p: float, tau):
    if p == 0:
        return np.log(tau)
    return np.expm1(p * np.log(tau)) / p


def _phi_inv(p: float, y):
    y = np.asarray(y, dtype=float)
    if p == 0:
        return np.exp(y)
    base = 1.0 + p * y
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(np.log1p(p * y) / p)
    return np.where(base < 0, np.nan, out)


def _mp_phi(p: float, tau):
    if p == 0:
        return mpmath.log(tau)
    return (mpmath.power(tau, p) - 1) / p


def make_power(p: float) -> Transform:
    """Φ_p on [0, inf): (τ^p − 1)/p, or log τ when p = 0."""
    p = float(p)
    lo = ExtendedReal(-1.0 / p) if p > 0 else NEG_INF
    return Transform(
        name="power",
        params=(("p", p),),
        interval=Interval(0.0, math.inf, True, False),
        forward=lambda t: _phi(p, t),
        inverse_fn=lambda y: _phi_inv(p, y),
        derivative_fn=lambda t: np.power(t, p - 1.0),
        lo_value=lo,
        mp_forward=lambda t: _mp_phi(p, t),
        spec=f"power:p={_fmt(p)}",
    )


def make_power_star(p: float) -> Transform:
    """Φ_p* : Φ_p with the value at 0 pushed down to -inf."""
    base = make_power(p)
    return replace(base, name="powerstar", lo_value=NEG_INF, spec=f"powerstar:p={_fmt(float(p))}")


def make_log_power(alpha: float) -> Transform:
    """L_α(τ) = −Φ_α(−log τ) on [0,1] (α > 0) or [0,1) (α ≤ 0)."""
    a = float(alpha)

    def fwd(t):
        return -_phi(a, -np.log(t))

    def inv(y):
        s = _phi_inv(a, -np.asarray(y, dtype=float))
        return np.exp(-s)

    def deriv(t):
        s = -np.log(t)
        return np.power(s, a - 1.0) / t

    def mp_fwd(t):
        return -_mp_phi(a, -mpmath.log(t))

    if a > 0:
        iv = Interval(0.0, 1.0, True, True)
        hi = ExtendedReal(1.0 / a)
    else:
        iv = Interval(0.0, 1.0, True, False)
        hi = None
    lo = NEG_INF if a >= 0 else ExtendedReal(1.0 / a)
    return Transform(
        name="logpower",
        params=(("alpha", a),),
        interval=iv,
        forward=fwd,
        inverse_fn=inv,
        derivative_fn=deriv,
        lo_value=lo,
        hi_value=hi,
        mp_forward=mp_fwd,
        spec=f"logpower:alpha={_fmt(a)}",
    )


def make_scaled_half_log(k: float, normalized: bool = False) -> Transform:
    """L_{1/2}^k(τ) = L_{1/2}(τ/k) on [0, k]; optionally normalised at τ = 1.

    The normalised form ``sqrt(log k) * (L_{1/2}^k(τ) − L_{1/2}^k(1))`` vanishes
    at 1 with unit slope there and tends to log τ as k grows.
    """
    k = float(k)
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    if normalized and not k > 1:
        raise ValueError(f"normalisation needs k > 1 (log k > 0), got k={k}")
    lk = math.log(k)
    spec = f"halflogk:k={_fmt(k)},normalized={'true' if normalized else 'false'}"
    iv = Interval(0.0, k, True, True)

    if not normalized:
        def fwd(t):
            return -2.0 * (np.sqrt(lk - np.log(t)) - 1.0)

        def inv(y):
            r = 1.0 - np.asarray(y, dtype=float) / 2.0
            return np.where(r < 0, np.nan, k * np.exp(-(r * r)))

        def deriv(t):
            return 1.0 / (t * np.sqrt(lk - np.log(t)))

        def mp_fwd(t):
            return -2 * (mpmath.sqrt(mpmath.log(k) - mpmath.log(t)) - 1)

        hi = ExtendedReal(2.0)
    else:
        rk = math.sqrt(lk)

        # sqrt(lk - lt) - sqrt(lk) rewritten to avoid cancellation
        def fwd(t):
            lt = np.log(t)
            return 2.0 * rk * lt / (np.sqrt(lk - lt) + rk)

        def inv(y):
            y = np.asarray(y, dtype=float)
            r = rk - y / (2.0 * rk)  # = sqrt(lk - lt)
            return np.where(r < 0, np.nan, np.exp(lk - r * r))

        def deriv(t):
            return rk / (t * np.sqrt(lk - np.log(t)))

        def mp_fwd(t):
            mlk = mpmath.log(k)
            return -2 * mpmath.sqrt(mlk) * (mpmath.sqrt(mlk - mpmath.log(t)) - mpmath.sqrt(mlk))

        hi = ExtendedReal(2.0 * lk)
    return Transform(
        name="halflogk",
        params=(("k", k), ("normalized", bool(normalized))),
        interval=iv,
        forward=fwd,
        inverse_fn=inv,
        derivative_fn=deriv,
        lo_value=NEG_INF,
        hi_value=hi,
        mp_forward=mp_fwd,
        spec=spec,
    )


def custom(fn: ArrayFn, interval: Interval, name: str = "custom", lo_value=None, hi_value=None,
           derivative_fn: Optional[ArrayFn] = None) -> Transform:
    """Wrap an arbitrary increasing map; inverted by bisection.

    No admissibility check is performed here, see :func:`admissibility_audit`.
    """
    return Transform(
        name=name,
        params=(),
        interval=interval,
        forward=fn,
        inverse_fn=None,
        derivative_fn=derivative_fn,
        lo_value=None if lo_value is None else ext(lo_value),
        hi_value=None if hi_value is None else ext(hi_value),
        spec=name,
    )


# ---------------------------------------------------------------------------
# combinators

def affine(F: Transform, A: float, B: float) -> Transform:
    """τ ↦ A F(τ) + B, A > 0."""
    A, B = float(A), float(B)
    if not A > 0:
        raise ValueError(f"affine combinator needs A > 0, got A={A}")

    def shift(v):
        if v is None or v.is_neg_inf:
            return v
        return ExtendedReal(A * v.value + B)

    inv = None
    if F.inverse_fn is not None:
        inv = lambda y: F.inverse_fn((np.asarray(y, dtype=float) - B) / A)
    der = None
    if F.derivative_fn is not None:
        der = lambda t: A * F.derivative_fn(t)
    mp = None
    if F.mp_forward is not None:
        mp = lambda t: A * F.mp_forward(t) + B
    return Transform(
        name="affine",
        params=(("A", A), ("B", B)),
        interval=F.interval,
        forward=lambda t: A * F.forward(t) + B,
        inverse_fn=inv,
        derivative_fn=der,
        lo_value=shift(F._endpoint("lo")),
        hi_value=shift(F._endpoint("hi")),
        mp_forward=mp,
        spec=f"affine:A={_fmt(A)},B={_fmt(B)}({F.spec})",
    )


def reflect(F: Transform) -> Transform:
    """τ ↦ −F(−τ) on −I.

    An endpoint where F is -inf would become +inf; that endpoint is dropped.
    """
    iv = F.interval
    lo_end, hi_end = F._endpoint("lo"), F._endpoint("hi")
    new_hi_closed = iv.lo_closed and not (lo_end is not None and lo_end.is_neg_inf)
    new_iv = Interval(-iv.hi, -iv.lo, iv.hi_closed, new_hi_closed)
    inv = None
    if F.inverse_fn is not None:
        inv = lambda y: -F.inverse_fn(-np.asarray(y, dtype=float))
    der = None
    if F.derivative_fn is not None:
        der = lambda t: F.derivative_fn(-np.asarray(t, dtype=float))
    mp = None
    if F.mp_forward is not None:
        mp = lambda t: -F.mp_forward(-t)
    return Transform(
        name="reflect",
        params=(),
        interval=new_iv,
        forward=lambda t: -F.forward(-np.asarray(t, dtype=float)),
        inverse_fn=inv,
        derivative_fn=der,
        lo_value=None if hi_end is None else -hi_end,
        hi_value=(-lo_end) if (new_hi_closed and lo_end is not None) else None,
        mp_forward=mp,
        spec=f"reflect({F.spec})",
    )


def rescale(F: Transform, lam: float) -> Transform:
    """τ ↦ F(λτ) on λ^{-1} I."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"rescale needs λ > 0, got {lam}")
    iv = F.interval
    new_iv = Interval(iv.lo / lam, iv.hi / lam, iv.lo_closed, iv.hi_closed)
    inv = None
    if F.inverse_fn is not None:
        inv = lambda y: F.inverse_fn(y) / lam
    der = None
    if F.derivative_fn is not None:
        der = lambda t: lam * F.derivative_fn(lam * np.asarray(t, dtype=float))
    mp = None
    if F.mp_forward is not None:
        mp = lambda t: F.mp_forward(lam * t)
    return Transform(
        name="rescale",
        params=(("lam", lam),),
        interval=new_iv,
        forward=lambda t: F.forward(lam * np.asarray(t, dtype=float)),
        inverse_fn=inv,
        derivative_fn=der,
        lo_value=F._endpoint("lo"),
        hi_value=F._endpoint("hi"),
        mp_forward=mp,
        spec=f"rescale:lam={_fmt(lam)}({F.spec})",
    )


def restrict(F: Transform, J: Interval) -> Transform:
    """F restricted to a subinterval J ⊆ I."""
    if not J.is_subset_of(F.interval):
        raise DomainError(f"restrict: {J} is not a subinterval of {F.interval} ({F.spec})")
    lo_value = F._endpoint("lo") if (J.lo_closed and J.lo == F.interval.lo) else None
    hi_value = F._endpoint("hi") if (J.hi_closed and J.hi == F.interval.hi) else None
    spec = (
        f"restrict:lo={_fmt(J.lo)},hi={_fmt(J.hi)},lo_closed={str(J.lo_closed).lower()},"
        f"hi_closed={str(J.hi_closed).lower()}({F.spec})"
    )
    return replace(F, name="restrict", params=(("J", str(J)),), interval=J,
                   lo_value=lo_value, hi_value=hi_value, spec=spec)


def conj_exp(F: Transform) -> Transform:
    """t ↦ F(e^t) on log I (requires I ⊆ [0, inf))."""
    iv = F.interval
    if iv.lo < 0:
        raise DomainError(f"conj_exp needs an interval inside [0, inf), got {iv} ({F.spec})")
    lo = math.log(iv.lo) if iv.lo > 0 else -math.inf
    hi = math.log(iv.hi) if math.isfinite(iv.hi) else math.inf
    new_iv = Interval(lo, hi, iv.lo_closed and iv.lo > 0, iv.hi_closed)
    inv = None
    if F.inverse_fn is not None:
        inv = lambda y: np.log(F.inverse_fn(y))
    der = None
    if F.derivative_fn is not None:
        der = lambda t: F.derivative_fn(np.exp(t)) * np.exp(t)
    mp = None
    if F.mp_forward is not None:
        mp = lambda t: F.mp_forward(mpmath.exp(t))
    return Transform(
        name="conj_exp",
        params=(),
        interval=new_iv,
        forward=lambda t: F.forward(np.exp(t)),
        inverse_fn=inv,
        derivative_fn=der,
        lo_value=F._endpoint("lo") if new_iv.lo_closed else None,
        hi_value=F._endpoint("hi"),
        mp_forward=mp,
        spec=f"conj_exp({F.spec})",
    )


def conj_log(F: Transform) -> Transform:
    """t ↦ F(log t) on e^I ⊆ (0, inf)."""
    iv = F.interval
    lo = math.exp(iv.lo) if math.isfinite(iv.lo) else 0.0
    hi = math.exp(iv.hi) if math.isfinite(iv.hi) else math.inf
    new_iv = Interval(lo, hi, iv.lo_closed and math.isfinite(iv.lo), iv.hi_closed)
    inv = None
    if F.inverse_fn is not None:
        inv = lambda y: np.exp(F.inverse_fn(y))
    der = None
    if F.derivative_fn is not None:
        der = lambda t: F.derivative_fn(np.log(t)) / t
    mp = None
    if F.mp_forward is not None:
        mp = lambda t: F.mp_forward(mpmath.log(t))
    return Transform(
        name="conj_log",
        params=(),
        interval=new_iv,
        forward=lambda t: F.forward(np.log(t)),
        inverse_fn=inv,
        derivative_fn=der,
        lo_value=F._endpoint("lo") if new_iv.lo_closed else None,
        hi_value=F._endpoint("hi"),
        mp_forward=mp,
        spec=f"conj_log({F.spec})",
    )


def combine(base: Transform, kind: str, **params) -> Transform:
    """Dispatch to one of the combinators by name."""
    if kind == "affine":
        return affine(base, params["A"], params["B"])
    if kind == "reflect":
        return reflect(base)
    if kind == "rescale":
        return rescale(base, params.get("lam", params.get("lambda")))
    if kind == "restrict":
        return restrict(base, params["J"])
    if kind == "conj_exp":
        return conj_exp(base)
    if kind == "conj_log":
        return conj_log(base)
    raise ValueError(f"unknown combinator {kind!r}")


# ---------------------------------------------------------------------------
# means

def f_mean(F: Transform, a: float, b: float, mu: float) -> float:
    """Quasi-arithmetic mean F^{-1}((1−μ)F(a) + μF(b))."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    Fa, Fb = F(a), F(b)
    if mu == 0.0:
        return float(a)
    if mu == 1.0:
        return float(b)
    if Fa.is_neg_inf or Fb.is_neg_inf:
        return F.interval.lo
    y = (1.0 - mu) * Fa.value + mu * Fb.value
    m = F.inverse(y)
    return float(min(max(m, min(a, b)), max(a, b)))


def power_mean(p: float, a: float, b: float, mu: float) -> float:
    """Weighted power mean M_p(a, b; μ), computed in the log domain."""
    if not (a > 0 and b > 0):
        raise ValueError("power_mean needs a, b > 0")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    la, lb = math.log(a), math.log(b)
    if p == 0:
        return math.exp((1 - mu) * la + mu * lb)
    with np.errstate(divide="ignore"):
        s = np.logaddexp(np.log(1 - mu) + p * la, np.log(mu) + p * lb)
    return float(np.exp(s / p))


# ---------------------------------------------------------------------------
# audit

@dataclass
class AuditReport:
    spec: str
    n_samples: int
    passed: bool
    monotonicity_failures: list = field(default_factory=list)
    roundtrip_failures: list = field(default_factory=list)
    continuity_failures: list = field(default_factory=list)
    max_roundtrip_error: float = 0.0

    def to_json(self) -> dict:
        return {
            "transform": self.spec,
            "n_samples": self.n_samples,
            "passed": self.passed,
            "monotonicity_failures": [list(map(float, w)) for w in self.monotonicity_failures],
            "roundtrip_failures": [list(map(float, w)) for w in self.roundtrip_failures],
            "continuity_failures": [float(w) for w in self.continuity_failures],
            "max_roundtrip_error": self.max_roundtrip_error,
        }


def admissibility_audit(F: Transform, n_samples: int = 10_000, rtol: float = 1e-12,
                        max_failures: int = 10) -> AuditReport:
    """Sample the working window of Int I and check monotonicity, continuity and inversion."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    a, b = F.interval.working_window()
    tau = np.linspace(a, b, n_samples)
    vals = F.evaluate(tau)
    y = vals.finite
    rep = AuditReport(spec=F.spec, n_samples=n_samples, passed=True)

    bad = np.nonzero(~(np.diff(y) > 0) | vals.neg_inf[1:] | vals.neg_inf[:-1])[0]
    rep.monotonicity_failures = [(tau[i], tau[i + 1]) for i in bad[:max_failures]]

    if not bad.size:
        back = F.inverse(y)
        err = np.abs(back - tau) / np.maximum(np.abs(tau), np.finfo(float).tiny)
        rep.max_roundtrip_error = float(err.max())
        rb = np.nonzero(err > rtol)[0]
        rep.roundtrip_failures = [(tau[i], err[i]) for i in rb[:max_failures]]

    # continuity: increments must shrink along h -> 0
    probe = tau[:: max(1, n_samples // 50)]
    span = b - a
    for t in probe:
        jumps = []
        for h in (1e-3, 1e-5, 1e-7):
            s = min(t + h * span, F.interval.hi if F.interval.hi_closed else b)
            jumps.append(abs(float(F(s)) - float(F(t))))
        if not (jumps[-1] <= jumps[0] and jumps[-1] < 1e-3 * max(1.0, abs(float(F(t))))):
            rep.continuity_failures.append(t)
            if len(rep.continuity_failures) >= max_failures:
                break

    rep.passed = not (rep.monotonicity_failures or rep.roundtrip_failures or rep.continuity_failures)
    return rep


# ---------------------------------------------------------------------------
# spec strings: name:key=val,...(base)

_SPEC_RE = re.compile(r"^\s*([A-Za-z_][\w]*)\s*(?::([^()]*))?\s*(?:\((.*)\))?\s*$")


def _parse_value(s: str):
    s = s.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("inf", "+inf"):
        return math.inf
    if low == "-inf":
        return -math.inf
    if low == "e":
        return math.e
    m = re.fullmatch(r"e\^(.+)", low)
    if m:
        return math.exp(float(m.group(1)))
    return float(s)


def parse_transform(spec: str) -> Transform:
    """Build a transform from a spec string such as ``affine:A=2,B=1(power:p=0)``."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise ValueError(f"malformed transform spec {spec!r}")
    name, args, inner = m.group(1), m.group(2), m.group(3)
    kw = {}
    if args and args.strip():
        for item in args.split(","):
            if "=" not in item:
                raise ValueError(f"malformed parameter {item!r} in {spec!r}")
            key, val = item.split("=", 1)
            try:
                kw[key.strip()] = _parse_value(val)
            except ValueError:
                raise ValueError(f"bad value for {key.strip()!r} in {spec!r}") from None

    def need(*keys):
        missing = [k for k in keys if k not in kw]
        if missing:
            raise ValueError(f"{name} needs parameter(s) {', '.join(missing)} in {spec!r}")
        extra = set(kw) - set(keys) - {"normalized", "lo_closed", "hi_closed"}
        if extra:
            raise ValueError(f"unknown parameter(s) {sorted(extra)} for {name} in {spec!r}")

    leaves = {"power", "powerstar", "logpower", "halflogk"}
    if name in leaves:
        if inner:
            raise ValueError(f"{name} takes no base transform ({spec!r})")
        if name == "power":
            need("p")
            return make_power(kw["p"])
        if name == "powerstar":
            need("p")
            return make_power_star(kw["p"])
        if name == "logpower":
            need("alpha")
            return make_log_power(kw["alpha"])
        need("k")
        return make_scaled_half_log(kw["k"], bool(kw.get("normalized", False)))

    if not inner:
        raise ValueError(f"combinator {name!r} needs a parenthesised base in {spec!r}")
    base = parse_transform(inner)
    if name == "affine":
        need("A", "B")
        return affine(base, kw["A"], kw["B"])
    if name == "reflect":
        need()
        return reflect(base)
    if name == "rescale":
        if "lambda" in kw:
            kw["lam"] = kw.pop("lambda")
        need("lam")
        return rescale(base, kw["lam"])
    if name == "restrict":
        need("lo", "hi")
        J = Interval(kw["lo"], kw["hi"], bool(kw.get("lo_closed", True)), bool(kw.get("hi_closed", False)))
        return restrict(base, J)
    if name == "conj_exp":
        need()
        return conj_exp(base)
    if name == "conj_log":
        need()
        return conj_log(base)
    raise ValueError(f"unknown transform {name!r} in {spec!r}")
