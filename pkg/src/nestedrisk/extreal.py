"""Extended real numbers with Moreau's lower and upper additions.

An :class:`ExtReal` is a float restricted to ``R ∪ {-inf, +inf}``. The
ambiguous sum ``(+inf) + (-inf)`` is never evaluated implicitly: callers
pick :func:`lower_add` (resolves to ``-inf``) or :func:`upper_add`
(resolves to ``+inf``).
"""

from __future__ import annotations

import math
from typing import Iterable, Union

__all__ = [
    "ExtReal",
    "INF",
    "NEG_INF",
    "extreal",
    "lower_add",
    "upper_add",
    "neg",
    "sup",
    "inf",
    "to_json",
    "from_json",
    "PROBE_SET",
]


class ExtReal(float):
    """A float that cannot be NaN.

    ``+`` is allowed only when the result is unambiguous; use
    :func:`lower_add` or :func:`upper_add` when opposite infinities can meet.
    """

    __slots__ = ()

    def __new__(cls, value=0.0):
        if isinstance(value, str):
            value = _parse(value)
        v = float(value)
        if math.isnan(v):
            raise ValueError("NaN is not an extended real")
        return super().__new__(cls, v)

    def __neg__(self) -> "ExtReal":
        return ExtReal(-float(self))

    def __pos__(self) -> "ExtReal":
        return self

    def __add__(self, other):
        o = float(other)
        if math.isinf(self) and math.isinf(o) and (self > 0) != (o > 0):
            raise ArithmeticError(
                "(+inf) + (-inf) is ambiguous; use lower_add or upper_add"
            )
        return ExtReal(float(self) + o)

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-float(other))

    def __rsub__(self, other):
        return ExtReal(other).__add__(-float(self))

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self)

    def __repr__(self) -> str:
        if self == math.inf:
            return "ExtReal('+inf')"
        if self == -math.inf:
            return "ExtReal('-inf')"
        return f"ExtReal({float(self)!r})"

    def __str__(self) -> str:
        return to_json(self) if math.isinf(self) else repr(float(self))


ExtLike = Union[ExtReal, float, int, str]

INF = ExtReal(math.inf)
NEG_INF = ExtReal(-math.inf)

# Small set that exercises every Moreau convention.
PROBE_SET = (NEG_INF, ExtReal(-1), ExtReal(0), ExtReal(1), INF)


def _parse(s: str) -> float:
    t = s.strip().lower()
    if t in ("+inf", "inf", "+infinity", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(t)


def extreal(value: ExtLike) -> ExtReal:
    """Coerce a number or one of the strings ``"+inf"``/``"-inf"``."""
    if isinstance(value, ExtReal):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not extended reals")
    return ExtReal(value)


def _opposite_infinities(u: float, v: float) -> bool:
    return math.isinf(u) and math.isinf(v) and (u > 0) != (v > 0)


def lower_add(u: ExtLike, v: ExtLike) -> ExtReal:
    """Moreau lower addition: ``(+inf) ∔ (-inf) = -inf``."""
    u, v = extreal(u), extreal(v)
    if _opposite_infinities(u, v):
        return NEG_INF
    return ExtReal(float(u) + float(v))


def upper_add(u: ExtLike, v: ExtLike) -> ExtReal:
    """Moreau upper addition: ``(+inf) ⊹ (-inf) = +inf``."""
    u, v = extreal(u), extreal(v)
    if _opposite_infinities(u, v):
        return INF
    return ExtReal(float(u) + float(v))


def neg(u: ExtLike) -> ExtReal:
    return -extreal(u)


def sup(values: Iterable[ExtLike]) -> ExtReal:
    """Maximum of a finite collection; the empty supremum is ``-inf``."""
    best = NEG_INF
    for v in values:
        v = extreal(v)
        if v > best:
            best = v
    return best


def inf(values: Iterable[ExtLike]) -> ExtReal:
    """Minimum of a finite collection; the empty infimum is ``+inf``."""
    best = INF
    for v in values:
        v = extreal(v)
        if v < best:
            best = v
    return best


def to_json(u: ExtLike):
    """Finite values as numbers, infinities as ``"+inf"``/``"-inf"``."""
    u = extreal(u)
    if u == math.inf:
        return "+inf"
    if u == -math.inf:
        return "-inf"
    return float(u)


def from_json(obj) -> ExtReal:
    if isinstance(obj, (int, float, str)) and not isinstance(obj, bool):
        return extreal(obj)
    raise TypeError(f"cannot read an extended real from {obj!r}")
