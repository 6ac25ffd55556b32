"""Extended real values: finite floats plus a single +inf element.

The toolkit works with proper lsc functions, so values live in
(-inf, +inf]. Minus infinity and NaN are rejected at construction.
Internally most array code carries plain float64 with np.inf; this type
is the boundary representation returned by scalar-valued operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

# quotient values at or above this cap are treated as +inf by estimators
INFINITY_CAP = 1e9


@total_ordering
@dataclass(frozen=True, slots=True)
class ExtendedReal:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise ValueError("ExtendedReal rejects NaN")
        if v == -math.inf:
            raise ValueError("ExtendedReal rejects -inf; functions must be proper")
        object.__setattr__(self, "value", v)

    @staticmethod
    def infinity() -> "ExtendedReal":
        return ExtendedReal(math.inf)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def is_infinite(self) -> bool:
        return self.value == math.inf

    def __float__(self) -> float:
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, ExtendedReal):
            return self.value == other.value
        if isinstance(other, (int, float)):
            return self.value == float(other)
        return NotImplemented

    def __lt__(self, other) -> bool:
        if isinstance(other, ExtendedReal):
            return self.value < other.value
        if isinstance(other, (int, float)):
            return self.value < float(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __add__(self, other) -> "ExtendedReal":
        # inf + finite = inf; inf + inf = inf.  -inf can never appear.
        if isinstance(other, ExtendedReal):
            return ExtendedReal(self.value + other.value)
        if isinstance(other, (int, float)):
            return ExtendedReal(self.value + float(other))
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, other) -> "ExtendedReal":
        # Scaling by a positive float only; 0 * inf is rejected by NaN check.
        if isinstance(other, (int, float)):
            if float(other) <= 0.0 and self.is_infinite:
                raise ValueError("cannot scale +inf by a nonpositive factor")
            return ExtendedReal(self.value * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return "ExtendedReal(+inf)" if self.is_infinite else f"ExtendedReal({self.value!r})"


def as_extended(x: float) -> ExtendedReal:
    """Coerce a raw float (possibly np.inf) to ExtendedReal."""
    return ExtendedReal(float(x))
