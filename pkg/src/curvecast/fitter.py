"""Trust-region least squares for power-law learning trends.

The solver is a Levenberg-Marquardt iteration in trust-region form: each step
minimises the linearised residual inside an ellipsoid scaled by the running
column norms of the Jacobian, and the radius grows or shrinks with the ratio
of actual to predicted reduction. The lower bounds on ``a`` and ``b`` are
enforced by projecting trial points onto the feasible box; ``b`` is also
capped at ``MAX_EXPONENT``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from curvecast.errors import DomainError, InsufficientDataError
from curvecast.model import PowerLawParams
from curvecast.observations import Observation, as_arrays, check_stream

MIN_LEVEL = 3
# Beyond this the curve is a step at the first point; also keeps a finite.
MAX_EXPONENT = 20.0


@dataclass(frozen=True)
class FitConfig:
    """Stopping rules and bounds for the trust-region solver.

    ``residual_tolerance`` bounds the relative decrease of the residual sum of
    squares that still counts as progress; ``step_tolerance`` bounds the trust
    radius relative to the scaled parameter norm. ``initial_trust_radius`` is
    likewise relative to the scaled norm of the starting point.
    """

    max_iterations: int = 200
    residual_tolerance: float = 1e-10
    step_tolerance: float = 1e-12
    initial_trust_radius: float = 1.0
    parameter_floor: float = 1e-9

    def __post_init__(self) -> None:
        for name in (
            "max_iterations",
            "residual_tolerance",
            "step_tolerance",
            "initial_trust_radius",
            "parameter_floor",
        ):
            if not getattr(self, name) > 0:
                raise DomainError(f"FitConfig.{name} must be strictly positive")


DEFAULT_FIT = FitConfig()


@dataclass(frozen=True)
class FitResult:
    params: PowerLawParams
    rss: float
    converged: bool
    iterations: int
    rss_history: tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class PowerLawTrend:
    """Power law fitted to the first ``level`` observations of a stream."""

    params: PowerLawParams
    level: int
    rss: float
    converged: bool

    def __post_init__(self) -> None:
        if self.level < MIN_LEVEL:
            raise DomainError(f"a trend needs level >= {MIN_LEVEL}, got {self.level}")

    @property
    def asymptote(self) -> float:
        return self.params.c

    def __call__(self, x: ArrayLike) -> np.ndarray | float:
        return self.params.evaluate(x)


def _validate_xy(x: ArrayLike, y: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be one-dimensional arrays of equal length")
    if x.size < MIN_LEVEL:
        raise InsufficientDataError(f"need at least {MIN_LEVEL} points, got {x.size}")
    if not np.all(x > 0):
        raise DomainError("training sizes must be strictly positive")
    if np.unique(x).size != x.size:
        raise DomainError("training sizes must be distinct")
    if not np.all(np.isfinite(y)):
        raise DomainError("accuracies must be finite")
    return x, y


def initial_guess_xy(x: ArrayLike, y: ArrayLike, floor: float = DEFAULT_FIT.parameter_floor) -> PowerLawParams:
    """Starting point: asymptote one point above the best accuracy, b = 0.5,
    and ``a`` chosen so the curve passes through the first observation."""
    x, y = _validate_xy(x, y)
    first = int(np.argmin(x))
    c0 = float(np.max(y)) + 1.0
    b0 = max(0.5, floor)
    a0 = max((c0 - y[first]) * x[first] ** b0, floor)
    return PowerLawParams(a0, b0, c0)


def initial_guess(observations: Sequence[Observation], config: FitConfig = DEFAULT_FIT) -> PowerLawParams:
    x, y = as_arrays(observations)
    return initial_guess_xy(x, y, config.parameter_floor)


def _model(q: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and Jacobian of ``-A * exp(-b * u) + c`` in centred coordinates."""
    amp, b, c = q
    powered = np.exp(-b * u)
    values = -amp * powered + c
    jac = np.column_stack((-powered, amp * powered * u, np.ones_like(u)))
    return values, jac


def _project(q: np.ndarray, centre: float, floor: float) -> np.ndarray:
    q = q.copy()
    q[1] = min(max(q[1], floor), MAX_EXPONENT)
    q[0] = max(q[0], floor * math.exp(-q[1] * centre))
    return q


def _subproblem(jac_s: np.ndarray, r: np.ndarray, radius: float) -> tuple[np.ndarray, bool]:
    """Minimise ``|r + J p|`` subject to ``|p| <= radius`` in scaled space.

    Returns the step and whether the constraint is active.
    """
    u, s, vt = np.linalg.svd(jac_s, full_matrices=False)
    z = u.T @ r
    keep = s > np.finfo(float).eps * max(jac_s.shape) * (s[0] if s.size else 0.0)
    s, z, vt = s[keep], z[keep], vt[keep]

    def step(lam: float) -> np.ndarray:
        return -vt.T @ (s * z / (s**2 + lam))

    gauss_newton = step(0.0)
    if np.linalg.norm(gauss_newton) <= radius:
        return gauss_newton, False

    # Newton iteration on 1/|p(lam)| - 1/radius, safeguarded by a bracket.
    lo, hi = 0.0, float(np.linalg.norm(s * z)) / radius
    lam = 0.0
    for _ in range(60):
        w = s * z / (s**2 + lam)
        norm = float(np.linalg.norm(w))
        if abs(norm - radius) <= 0.05 * radius:
            break
        if norm < radius:
            hi = lam
        else:
            lo = lam
        dnorm = -float(np.sum(w**2 / (s**2 + lam))) / norm
        lam = lam - (norm - radius) / radius * norm / dnorm
        if not lo < lam < hi:
            lam = max(1e-3 * hi, math.sqrt(lo * hi))
    return step(lam), True


def fit_power_law(
    x: ArrayLike,
    y: ArrayLike,
    config: FitConfig = DEFAULT_FIT,
    start: PowerLawParams | None = None,
) -> FitResult:
    """Least-squares fit of ``-a * x**(-b) + c`` to the points ``(x, y)``.

    Non-convergence within ``config.max_iterations`` is reported through
    ``FitResult.converged``, never raised.
    """
    x, y = _validate_xy(x, y)
    # Work with the amplitude at the geometric mean of x, A = a * xbar**(-b):
    # this decorrelates the amplitude and exponent columns of the Jacobian.
    logx = np.log(x)
    centre = float(np.mean(logx))
    u = logx - centre
    floor = config.parameter_floor
    if start is None:
        start = initial_guess_xy(x, y, floor)
    q = np.array([start.a * math.exp(-start.b * centre), start.b, start.c])
    q = _project(q, centre, floor)

    values, jac = _model(q, u)
    r = values - y
    rss = float(r @ r)
    history = [rss]
    scale = np.maximum(np.linalg.norm(jac, axis=0), np.finfo(float).tiny)
    radius = config.initial_trust_radius * max(float(np.linalg.norm(scale * q)), 1.0)
    converged = rss == 0.0
    iterations = 0

    while not converged and iterations < config.max_iterations:
        iterations += 1
        scale = np.maximum(scale, np.linalg.norm(jac, axis=0))
        scaled_step, _ = _subproblem(jac / scale, r, radius)
        trial = _project(q + scaled_step / scale, centre, floor)
        delta = trial - q
        scaled_len = float(np.linalg.norm(scale * delta))

        linear = r + jac @ delta
        predicted = rss - float(linear @ linear)
        t_values, t_jac = _model(trial, u)
        t_r = t_values - y
        t_rss = float(t_r @ t_r)
        actual = rss - t_rss if np.isfinite(t_rss) else -np.inf
        ratio = actual / predicted if predicted > 0 else -1.0

        if ratio < 0.25:
            radius = 0.25 * min(radius, scaled_len) if scaled_len > 0 else 0.25 * radius
        elif ratio > 0.75:
            radius = max(radius, 2.0 * scaled_len)

        if ratio > 1e-4 and actual > 0:
            small_change = (
                actual <= config.residual_tolerance * rss
                and predicted <= config.residual_tolerance * rss
            )
            q, r, jac, rss = trial, t_r, t_jac, t_rss
            history.append(rss)
            if small_change or rss == 0.0:
                converged = True
                break

        if radius <= config.step_tolerance * float(np.linalg.norm(scale * q)):
            converged = True

    amp, b, c = (float(v) for v in q)
    params = PowerLawParams(max(amp * math.exp(b * centre), floor), b, c)
    return FitResult(params, rss, converged, iterations, tuple(history))


def fit_trend(
    observations: Sequence[Observation],
    level: int,
    config: FitConfig = DEFAULT_FIT,
    start: PowerLawParams | None = None,
) -> PowerLawTrend:
    """Fit the learning trend of ``level`` from the first ``level`` observations."""
    if level < MIN_LEVEL:
        raise InsufficientDataError(f"a trend needs at least {MIN_LEVEL} points, got level {level}")
    if len(observations) < level:
        raise InsufficientDataError(f"level {level} requested but only {len(observations)} observations")
    prefix = list(observations[:level])
    check_stream(prefix)
    x, y = as_arrays(prefix)
    result = fit_power_law(x, y, config, start)
    return PowerLawTrend(result.params, level, result.rss, result.converged)
