"""Convex arc-cost families with closed-form first derivatives.

Four families are supported by the file format:

===============  ============  ========================
family           params        cost
===============  ============  ========================
``linear``       ``(c1,)``     ``c1 * x``
``quadratic``    ``(c2, c1)``  ``c2 * x**2 + c1 * x``
``power``        ``(k, p)``    ``k * x**p``
``exponential``  ``(k, a)``    ``k * (exp(a * x) - 1)``
===============  ============  ========================

Constructing a :class:`CostFn` does not check convexity;
:func:`validate_convex` does, and network construction calls it.

Every family is zero at ``x = 0``. Both ``value`` and ``deriv`` accept
scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadCostParams, NegativeFlow

FAMILIES = ("linear", "quadratic", "power", "exponential")
_ARITY = {"linear": 1, "quadratic": 2, "power": 2, "exponential": 2}


def _check_nonneg(x):
    if np.any(np.asarray(x) < 0):
        raise NegativeFlow(f"cost evaluated at negative flow {x!r}")


@dataclass(frozen=True)
class CostFn:
    family: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def is_linear(self) -> bool:
        return self.family == "linear"

    def value(self, x):
        _check_nonneg(x)
        f, (u, *rest) = self.family, self.params
        if f == "linear":
            return u * x
        v = rest[0]
        if f == "quadratic":
            return (u * x + v) * x
        if f == "power":
            return u * np.power(x, v) if isinstance(x, np.ndarray) else u * x**v
        if isinstance(x, np.ndarray):
            return u * np.expm1(v * x)
        return u * math.expm1(v * x)

    def deriv(self, x):
        _check_nonneg(x)
        f, (u, *rest) = self.family, self.params
        if f == "linear":
            return u + 0 * x
        v = rest[0]
        if f == "quadratic":
            return 2.0 * u * x + v
        if f == "power":
            # 0**(p-1) is 0 for p > 1 and 1 for p == 1, the continuous limits
            return u * v * (np.power(x, v - 1.0) if isinstance(x, np.ndarray) else x ** (v - 1.0))
        if isinstance(x, np.ndarray):
            return u * v * np.exp(v * x)
        return u * v * math.exp(v * x)

    def __str__(self):
        return f"{self.family}({', '.join(f'{p:g}' for p in self.params)})"


def linear(c1) -> CostFn:
    return CostFn("linear", (c1,))


def quadratic(c2, c1=0.0) -> CostFn:
    return CostFn("quadratic", (c2, c1))


def power(k, p) -> CostFn:
    return CostFn("power", (k, p))


def exponential(k, a) -> CostFn:
    return CostFn("exponential", (k, a))


class CallableCost:
    """An opaque convex cost given as a ``(cost, derivative)`` pair.

    Convexity is the caller's responsibility. ``cost(0)`` should be 0 so
    objectives stay comparable with the closed-form families. Not
    representable in the instance file format.
    """

    family = "callable"
    is_linear = False

    def __init__(self, cost: Callable[[float], float], derivative: Callable[[float], float]):
        self._cost = cost
        self._deriv = derivative

    def value(self, x):
        _check_nonneg(x)
        if isinstance(x, np.ndarray):
            return np.vectorize(self._cost, otypes=[float])(x)
        return self._cost(x)

    def deriv(self, x):
        _check_nonneg(x)
        if isinstance(x, np.ndarray):
            return np.vectorize(self._deriv, otypes=[float])(x)
        return self._deriv(x)

    def __repr__(self):
        return f"CallableCost({self._cost!r}, {self._deriv!r})"


def eval_cost(f, x):
    return f.value(x)


def eval_deriv(f, x):
    return f.deriv(x)


def validate_convex(f: CostFn) -> None:
    """Raise :class:`BadCostParams` unless ``f`` is convex on ``x >= 0``."""
    if f.family not in _ARITY:
        raise BadCostParams(f"unknown cost family {f.family!r}")
    if len(f.params) != _ARITY[f.family]:
        raise BadCostParams(
            f"{f.family} takes {_ARITY[f.family]} parameter(s), got {len(f.params)}"
        )
    if not all(math.isfinite(p) for p in f.params):
        raise BadCostParams(f"non-finite parameter in {f.family}{f.params}")
    u = f.params[0]
    if f.family == "quadratic" and u < 0:
        raise BadCostParams("c2 < 0")
    if f.family == "power":
        if u < 0:
            raise BadCostParams("k < 0")
        if f.params[1] < 1:
            raise BadCostParams("p < 1")
    if f.family == "exponential":
        if u < 0:
            raise BadCostParams("k < 0")
        if f.params[1] < 0:
            raise BadCostParams("a < 0")
