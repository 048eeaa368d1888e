"""Working, prediction and convergence levels of a learning trace.

The working level is the first level after which the asymptotic backbone
stops swinging: for ``lookahead + 1`` consecutive levels the slope between
neighbouring asymptotes, measured per word, stays under
``nu ** (1 / slowdown) / (1 - nu)``. The prediction level is the first level
from there on whose asymptote does not exceed 100. The convergence level is
the first level from the prediction level on whose convergence layer drops
to ``tau``; its trend becomes the frozen predictor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from curvecast.errors import DomainError
from curvecast.fitter import DEFAULT_FIT, MIN_LEVEL, FitConfig, PowerLawTrend, fit_trend
from curvecast.observations import Observation
from curvecast.trace import LearningTrace

MAX_ACCURACY = 100.0


@dataclass(frozen=True)
class LevelConfig:
    nu: float = 4e-5
    sigma_slowdown: int = 1
    lambda_lookahead: int = 5
    tau: float = 0.001
    window: tuple[int, int] = (5_000, 700_000)
    window_grid: int = 512
    layer_scale: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.nu < 1.0:
            raise DomainError(f"nu must lie in (0, 1), got {self.nu}")
        if self.sigma_slowdown < 1:
            raise DomainError("slowdown must be a positive integer")
        if self.lambda_lookahead < 0:
            raise DomainError("look-ahead must be non-negative")
        if not self.tau >= 0:
            raise DomainError("tau must be non-negative")
        lo, hi = self.window
        if not 0 < lo < hi:
            raise DomainError(f"sampling window must satisfy 0 < lo < hi, got {self.window}")
        if self.window_grid < 2:
            raise DomainError("window_grid needs at least two points")
        if not self.layer_scale > 0:
            raise DomainError("layer_scale must be positive")

    def with_tau(self, tau: float) -> "LevelConfig":
        return replace(self, tau=tau)


# Default thresholds for the run comparison.
DEFAULT_LEVELS = LevelConfig()
# Tighter verticality threshold, for a later and steadier working level.
STRICT_VERTICALITY = LevelConfig(nu=2e-5)


@dataclass(frozen=True)
class Run:
    trace: LearningTrace
    config: LevelConfig
    wlevel: int | None
    plevel: int | None
    clevel: int | None
    layers: tuple[tuple[int, float], ...] = field(default=(), repr=False)

    @property
    def predictor(self) -> PowerLawTrend | None:
        """Trend frozen at the convergence level, if one was reached."""
        return None if self.clevel is None else self.trace.trend(self.clevel)

    def word_position(self, level: int | None) -> int | None:
        return None if level is None else self.trace.x(level)


def slope_bound(nu: float, sigma_slowdown: int) -> float:
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu must lie in (0, 1), got {nu}")
    if sigma_slowdown < 1:
        raise DomainError("slowdown must be a positive integer")
    return nu ** (1.0 / sigma_slowdown) / (1.0 - nu)


def backbone_slopes(trace: LearningTrace) -> np.ndarray:
    """``|alpha[i+1] - alpha[i]| / (x[i+1] - x[i])`` for i = 3 .. max_level - 1."""
    alphas = trace.backbone
    xs = np.array([trace.x(level) for level in trace.levels], dtype=float)
    return np.abs(np.diff(alphas)) / np.diff(xs)


def detect_wlevel(trace: LearningTrace, config: LevelConfig = DEFAULT_LEVELS) -> int | None:
    if len(trace) == 0:
        raise DomainError("trace is empty")
    ok = backbone_slopes(trace) <= slope_bound(config.nu, config.sigma_slowdown)
    span = config.lambda_lookahead + 1
    # ok[j] concerns level MIN_LEVEL + j.
    for start in range(0, ok.size - span + 1):
        if ok[start : start + span].all():
            return MIN_LEVEL + start
    return None


def detect_plevel(trace: LearningTrace, wlevel: int | None) -> int | None:
    if wlevel is None:
        return None
    for level in range(wlevel, trace.max_level + 1):
        if trace.asymptote(level) <= MAX_ACCURACY:
            return level
    return None


def _window_grid(config: LevelConfig) -> np.ndarray:
    lo, hi = config.window
    return np.linspace(lo, hi, config.window_grid)


def layer_between(current: PowerLawTrend, previous: PowerLawTrend, config: LevelConfig) -> float:
    grid = _window_grid(config)
    gap = np.abs(current(grid) - previous(grid))
    return float(np.max(gap)) * config.layer_scale


def convergence_layer(trace: LearningTrace, level: int, config: LevelConfig = DEFAULT_LEVELS) -> float:
    """Largest gap between the trends of ``level`` and ``level - 1`` over the
    sampling window, times ``config.layer_scale``."""
    if level - 1 < MIN_LEVEL or level > trace.max_level:
        raise DomainError(f"convergence layer needs trends at {level - 1} and {level}")
    return layer_between(trace.trend(level), trace.trend(level - 1), config)


def detect_clevel(
    trace: LearningTrace, plevel: int | None, config: LevelConfig = DEFAULT_LEVELS
) -> tuple[int | None, tuple[tuple[int, float], ...]]:
    """Convergence level plus the layers inspected on the way to it."""
    if plevel is None:
        return None, ()
    layers = []
    for level in range(max(plevel, MIN_LEVEL + 1), trace.max_level + 1):
        value = convergence_layer(trace, level, config)
        layers.append((level, value))
        if value <= config.tau:
            return level, tuple(layers)
    return None, tuple(layers)


def detect_levels(trace: LearningTrace, config: LevelConfig = DEFAULT_LEVELS) -> Run:
    wlevel = detect_wlevel(trace, config)
    plevel = detect_plevel(trace, wlevel)
    clevel, layers = detect_clevel(trace, plevel, config)
    return Run(trace, config, wlevel, plevel, clevel, layers)


class StoppingMonitor:
    """Incremental halting check for a learner that is still training.

    Feed observations as training cycles complete; ``update`` returns True once
    the convergence level has been reached, after which ``predictor`` holds the
    frozen trend. The levels found agree with running ``detect_levels`` on the
    full trace, because the working level is confirmed only once its
    look-ahead window has been observed.
    """

    def __init__(self, levels: LevelConfig = DEFAULT_LEVELS, fit: FitConfig = DEFAULT_FIT):
        self.levels = levels
        self.fit = fit
        self.observations: list[Observation] = []
        self.trends: list[PowerLawTrend] = []
        self.wlevel: int | None = None
        self.plevel: int | None = None
        self.clevel: int | None = None
        self.layers: list[tuple[int, float]] = []
        self._bound = slope_bound(levels.nu, levels.sigma_slowdown)
        self._calm_run = 0

    @property
    def halted(self) -> bool:
        return self.clevel is not None

    @property
    def predictor(self) -> PowerLawTrend | None:
        return None if self.clevel is None else self.trends[self.clevel - MIN_LEVEL]

    def update(self, observation: Observation) -> bool:
        if self.halted:
            return True
        if self.observations and observation.x <= self.observations[-1].x:
            raise DomainError("word positions must strictly increase")
        self.observations.append(observation)
        level = len(self.observations)
        if level < MIN_LEVEL:
            return False
        self.trends.append(fit_trend(self.observations, level, self.fit))
        if level > MIN_LEVEL:
            self._advance(level)
        return self.halted

    def extend(self, observations: Sequence[Observation]) -> bool:
        for obs in observations:
            if self.update(obs):
                break
        return self.halted

    def _trend(self, level: int) -> PowerLawTrend:
        return self.trends[level - MIN_LEVEL]

    def _advance(self, level: int) -> None:
        if self.wlevel is None:
            prev = level - 1
            rise = abs(self._trend(level).asymptote - self._trend(prev).asymptote)
            run = self.observations[level - 1].x - self.observations[prev - 1].x
            self._calm_run = self._calm_run + 1 if rise / run <= self._bound else 0
            if self._calm_run < self.levels.lambda_lookahead + 1:
                return
            self.wlevel = level - self.levels.lambda_lookahead - 1
            # Levels between wlevel and now may already qualify.
            for candidate in range(self.wlevel, level + 1):
                if self._trend(candidate).asymptote <= MAX_ACCURACY:
                    self.plevel = candidate
                    break
            if self.plevel is not None:
                for candidate in range(max(self.plevel, MIN_LEVEL + 1), level + 1):
                    if self._check_layer(candidate):
                        return
            return
        if self.plevel is None:
            if self._trend(level).asymptote > MAX_ACCURACY:
                return
            self.plevel = level
        self._check_layer(max(level, MIN_LEVEL + 1))

    def _check_layer(self, level: int) -> bool:
        value = layer_between(self._trend(level), self._trend(level - 1), self.levels)
        self.layers.append((level, value))
        if value <= self.levels.tau:
            self.clevel = level
        return self.halted
