"""Lower bound on the quantum XY critical temperature from two magnetisation bounds.

With ``x`` the square root of the nearest-neighbour correlation, the squared
magnetisation is bounded below by ``b1 = 1/4 - (J3/2) x - K3/beta`` and by
``b2 = x^2 - (I3/2) x - K3'/beta``.  ``b1 > 0`` for ``x < t(beta)`` and
``b2 > 0`` for ``x > r_plus(beta)``, so every ``x`` is covered once
``r_plus < t``.  ``t`` increases and ``r_plus`` decreases with ``beta``, so
the crossing is unique and bisection on ``beta`` finds it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoCrossingError


@dataclass(frozen=True)
class BoundConstants:
    j3: float = 1.15672
    i3: float = 0.349884
    k3: float = 0.252731
    k3p: float = 0.105107

    def __post_init__(self):
        for name in ("j3", "i3", "k3", "k3p"):
            if getattr(self, name) < 0:
                raise ValueError(f"constant {name} must be nonnegative")
        if self.j3 == 0:
            raise ValueError("j3 must be positive")


@dataclass(frozen=True)
class BoundResult:
    t_star: float
    beta_star: float
    t_value: float
    r_plus_value: float
    residual: float
    bracket: tuple[float, float]
    iterations: int

    @property
    def rounded(self) -> str:
        return f"{self.t_star:#.3g}"


def magnetisation_lower_bounds(x: float, beta: float, c: BoundConstants = BoundConstants()) -> tuple[float, float]:
    if x < 0 or beta <= 0:
        raise ValueError("need x >= 0 and beta > 0")
    b1 = 0.25 - c.j3 / 2 * x - c.k3 / beta
    b2 = x * x - c.i3 / 2 * x - c.k3p / beta
    return b1, b2


def threshold_t(beta: float, c: BoundConstants = BoundConstants()) -> float:
    """Zero in ``x`` of the first bound (negative when no ``x`` works)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return (0.5 - 2 * c.k3 / beta) / c.j3


def threshold_r_plus(beta: float, c: BoundConstants = BoundConstants()) -> float:
    """Largest zero in ``x`` of the second bound."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 0.5 * (c.i3 / 2 + math.sqrt(c.i3 ** 2 / 4 + 4 * c.k3p / beta))


def _gap(beta: float, c: BoundConstants) -> float:
    return threshold_t(beta, c) - threshold_r_plus(beta, c)


def critical_threshold(c: BoundConstants = BoundConstants(), beta_tol: float = 1e-9,
                       beta_max: float = 1e12, residual_tol: float = 1e-11) -> BoundResult:
    """Smallest ``beta`` with ``r_plus(beta) <= t(beta)``; positivity holds for all ``T < 1/beta``."""
    # t <= 0 for beta <= 4 K3, so the gap is negative there
    lo = 4 * c.k3 if c.k3 > 0 else 1e-12
    if _gap(lo, c) > 0:
        raise NoCrossingError("thresholds never cross: the bound holds at every temperature probed")
    hi = max(2 * lo, 1.0)
    while _gap(hi, c) <= 0:
        hi *= 2
        if hi > beta_max:
            raise NoCrossingError("t(beta) never exceeds r_plus(beta): 1/(2 J3) <= I3/2")
    bracket = (lo, hi)
    iterations = 0
    # keep halving past beta_tol until the certificate residual is tight too
    while hi - lo > beta_tol or abs(_gap(hi, c)) > residual_tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _gap(mid, c) > 0:
            hi = mid
        else:
            lo = mid
        iterations += 1
    beta = hi
    t, r = threshold_t(beta, c), threshold_r_plus(beta, c)
    return BoundResult(1 / beta, beta, t, r, abs(t - r), bracket, iterations)


def tc_interval(c: BoundConstants = BoundConstants(), ising_upper: float = 5.0010) -> tuple[float, float]:
    """``(T*, T_Ising_upper / 4)``: the lower bound chained with the Ising comparison."""
    if ising_upper <= 0:
        raise ValueError("ising_upper must be positive")
    return critical_threshold(c).t_star, ising_upper / 4
