"""Accuracy patterns: bounded, concave, strictly increasing curves.

The only shipped pattern is the power law ``-a * x**(-b) + c`` where ``x`` is
the number of training words consumed and the result is an accuracy on the
0-100 percent scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike

from curvecast.errors import DomainError


class AccuracyPattern(Protocol):
    """Interface every accuracy pattern exposes to the fitter and the metrics."""

    def evaluate(self, x: ArrayLike) -> np.ndarray | float: ...

    def asymptote(self) -> float: ...

    def jacobian(self, x: ArrayLike) -> np.ndarray: ...


def _check_positive(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError("training size must be strictly positive")
    return arr


@dataclass(frozen=True)
class PowerLawParams:
    """Parameters of ``-a * x**(-b) + c``.

    ``a`` and ``b`` must be positive for the curve to be increasing and
    concave. ``c`` is the asymptote and is deliberately left unbounded: a fit
    whose asymptote exceeds 100 is meaningful information downstream.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"power law needs a > 0 and b > 0, got a={self.a}, b={self.b}")
        if not np.isfinite(self.c):
            raise DomainError(f"asymptote must be finite, got c={self.c}")

    def evaluate(self, x: ArrayLike) -> np.ndarray | float:
        arr = _check_positive(x)
        out = -self.a * arr ** (-self.b) + self.c
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def asymptote(self) -> float:
        return self.c

    def jacobian(self, x: ArrayLike) -> np.ndarray:
        """Partial derivatives with respect to (a, b, c).

        Returns shape ``(3,)`` for a scalar ``x`` and ``(n, 3)`` for a vector.
        """
        arr = _check_positive(x)
        powered = arr ** (-self.b)
        cols = (-powered, self.a * powered * np.log(arr), np.ones_like(arr))
        return np.stack(cols, axis=-1)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def evaluate(params: PowerLawParams, x: ArrayLike) -> np.ndarray | float:
    return params.evaluate(x)


def asymptote(params: PowerLawParams) -> float:
    return params.asymptote()


def jacobian_row(params: PowerLawParams, x: float) -> tuple[float, float, float]:
    da, db, dc = params.jacobian(x)
    return (float(da), float(db), float(dc))
