"""Extended reals: R together with -inf (and +inf for slacks).

Values of an admissible transform live in R ∪ {-inf}.  Rather than leaning on
IEEE infinities scattered through arithmetic, the infinite cases are carried
explicitly: :class:`ExtendedReal` for scalars and :class:`ExtArray` (finite
payload + boolean ``-inf`` mask) for vectorised evaluation.
"""
from __future__ import annotations

import functools
import math

import numpy as np

__all__ = ["ExtendedReal", "ExtArray", "NEG_INF", "POS_INF", "ext"]


@functools.total_ordering
class ExtendedReal:
    """A real number or one of the markers -inf / +inf.

    Conventions: ``(-inf) + r = -inf``, ``a * (-inf) = -inf`` for ``a > 0``.
    Adding -inf and +inf is undefined and raises.
    """

    __slots__ = ("_value", "_inf")

    def __init__(self, value: float = 0.0, inf: int = 0):
        if inf not in (-1, 0, 1):
            raise ValueError("inf must be -1, 0 or 1")
        if inf == 0:
            value = float(value)
            if math.isnan(value):
                raise ValueError("NaN is not an extended real")
            if math.isinf(value):
                inf = 1 if value > 0 else -1
                value = 0.0
        else:
            value = 0.0
        self._value = value
        self._inf = inf

    @property
    def is_neg_inf(self) -> bool:
        return self._inf == -1

    @property
    def is_pos_inf(self) -> bool:
        return self._inf == 1

    @property
    def is_finite(self) -> bool:
        return self._inf == 0

    @property
    def value(self) -> float:
        if self._inf:
            raise ValueError(f"{self!r} has no finite value")
        return self._value

    def __float__(self) -> float:
        if self._inf:
            return self._inf * math.inf
        return self._value

    def _key(self):
        return (self._inf, self._value)

    @staticmethod
    def _coerce(other) -> "ExtendedReal":
        if isinstance(other, ExtendedReal):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return ExtendedReal(float(other))
        return NotImplemented

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._inf and other._inf and self._inf != other._inf:
            raise ArithmeticError("(-inf) + (+inf) is undefined")
        if self._inf or other._inf:
            return ExtendedReal(inf=self._inf or other._inf)
        return ExtendedReal(self._value + other._value)

    __radd__ = __add__

    def __neg__(self):
        if self._inf:
            return ExtendedReal(inf=-self._inf)
        return ExtendedReal(-self._value)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ExtendedReal):
            if not other.is_finite:
                if self.is_finite:
                    return other * self._value
                return ExtendedReal(inf=self._inf * other._inf)
            other = other._value
        if not isinstance(other, (int, float, np.floating, np.integer)):
            return NotImplemented
        other = float(other)
        if self._inf:
            if other > 0:
                return ExtendedReal(inf=self._inf)
            if other < 0:
                return ExtendedReal(inf=-self._inf)
            raise ArithmeticError("0 * inf is undefined")
        return ExtendedReal(self._value * other)

    __rmul__ = __mul__

    def __repr__(self):
        if self._inf == -1:
            return "ExtendedReal(-inf)"
        if self._inf == 1:
            return "ExtendedReal(+inf)"
        return f"ExtendedReal({self._value!r})"

    def __str__(self):
        return {-1: "-inf", 1: "inf"}.get(self._inf, repr(self._value))

    def to_json(self):
        """Numbers stay numbers; infinities become the strings ``"-inf"``/``"inf"``."""
        if self._inf:
            return str(self)
        return self._value


NEG_INF = ExtendedReal(inf=-1)
POS_INF = ExtendedReal(inf=1)


def ext(x) -> ExtendedReal:
    if isinstance(x, ExtendedReal):
        return x
    return ExtendedReal(float(x))


class ExtArray:
    """Array of values in R ∪ {-inf}: finite payload plus a -inf mask.

    Where ``neg_inf`` is set the payload is meaningless (kept at 0).
    """

    __slots__ = ("finite", "neg_inf")

    def __init__(self, finite, neg_inf=None):
        finite = np.asarray(finite, dtype=float)
        if neg_inf is None:
            neg_inf = np.zeros(finite.shape, dtype=bool)
        else:
            neg_inf = np.broadcast_to(np.asarray(neg_inf, dtype=bool), finite.shape).copy()
        finite = np.where(neg_inf, 0.0, finite)
        if not np.all(np.isfinite(finite)):
            raise ValueError("ExtArray payload must be finite; use the neg_inf mask")
        self.finite = finite
        self.neg_inf = neg_inf

    @property
    def shape(self):
        return self.finite.shape

    def __len__(self):
        return len(self.finite)

    def __getitem__(self, idx):
        fin = self.finite[idx]
        if np.ndim(fin) == 0:
            return NEG_INF if self.neg_inf[idx] else ExtendedReal(float(fin))
        return ExtArray(fin, self.neg_inf[idx])

    def affine(self, scale: float, shift: float) -> "ExtArray":
        """``scale * self + shift`` for ``scale > 0``; -inf is preserved."""
        if not scale > 0:
            raise ValueError("affine map on extended reals needs a positive scale")
        return ExtArray(scale * self.finite + shift, self.neg_inf)

    def any_neg_inf(self) -> bool:
        return bool(self.neg_inf.any())

    def to_float(self) -> np.ndarray:
        """Lossy view with IEEE -inf, for plotting and display only."""
        return np.where(self.neg_inf, -np.inf, self.finite)

    def __repr__(self):
        return f"ExtArray({self.to_float()!r})"
