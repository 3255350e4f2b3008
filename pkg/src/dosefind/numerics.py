"""Scalar numerics shared by every design: the regularized incomplete beta
function, adaptive Simpson quadrature, bisection root finding, and weighted
isotonic regression (PAVA).

Everything here is a pure function of its inputs and safe to call from any
number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

__all__ = [
    "BetaParams",
    "Quadrature",
    "BracketError",
    "ConvergenceError",
    "reg_inc_beta",
    "integrate",
    "bisect",
    "pava_isotonic",
    "std_normal_cdf",
]


class BracketError(ValueError):
    """Root bracket endpoints do not straddle a sign change."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its budget before converging."""


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a Beta(alpha, beta) distribution."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(
                f"beta shape parameters must be positive, got "
                f"({self.alpha}, {self.beta})"
            )


@dataclass(frozen=True)
class Quadrature:
    """Tolerance budget for adaptive integration."""

    abs_tol: float = 1e-10
    max_subdivisions: int = 1024

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 8:
            raise ValueError(
                f"max_subdivisions must be >= 8, got {self.max_subdivisions}"
            )


_CF_MAX_ITER = 300
_CF_EPS = 1e-15
_CF_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by the modified Lentz
    method. Converges quickly for x < (a+1)/(a+b+2)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ConvergenceError(
        f"incomplete-beta continued fraction stalled for a={a}, b={b}, x={x}"
    )


def _betainc_series(a: float, b: float, x: float, log_front: float) -> float:
    """Power-series fallback: I_x(a,b) = front/a * 2F1(1, a+b; a+1; x)."""
    term = 1.0
    total = 1.0
    for n in range(1, 10_000):
        term *= (a + b + n - 1.0) * x / (a + n)
        total += term
        if abs(term) < _CF_EPS * abs(total):
            return math.exp(log_front) * total / a
    raise ConvergenceError(
        f"incomplete-beta series stalled for a={a}, b={b}, x={x}"
    )


def reg_inc_beta(params: BetaParams, x: float) -> float:
    """Regularized incomplete beta function I_x(alpha, beta), i.e. the CDF of
    a Beta(alpha, beta) distribution evaluated at x.

    Uses the continued-fraction expansion on the rapidly converging side of
    the symmetry point, with a power-series fallback. Monotone nondecreasing
    in x with I_0 = 0 and I_1 = 1.
    """
    a, b = params.alpha, params.beta
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        try:
            return math.exp(log_front) * _betacf(a, b, x) / a
        except ConvergenceError:
            return _betainc_series(a, b, x, log_front)
    try:
        return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b
    except ConvergenceError:
        return 1.0 - _betainc_series(b, a, 1.0 - x, log_front)


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    quad: Quadrature = Quadrature(),
) -> float:
    """Adaptive Simpson estimate of the integral of f over [lo, hi].

    The recursion halves intervals until the standard Richardson error
    estimate falls below the (locally apportioned) absolute tolerance.
    Raises ConvergenceError if max_subdivisions are exhausted first.
    """
    if lo > hi:
        raise ValueError(f"integration bounds out of order: [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    budget = [quad.max_subdivisions]

    def recurse(a: float, b: float, fa: float, fm: float, fb: float,
                whole: float, tol: float) -> float:
        if budget[0] <= 0:
            raise ConvergenceError(
                f"adaptive Simpson exhausted {quad.max_subdivisions} "
                f"subdivisions on [{lo}, {hi}]"
            )
        budget[0] -= 1
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = _simpson(fa, flm, fm, m - a)
        right = _simpson(fm, frm, fb, b - m)
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        half = 0.5 * tol
        return (
            recurse(a, m, fa, flm, fm, left, half)
            + recurse(m, b, fm, frm, fb, right, half)
        )

    fa, fb = f(lo), f(hi)
    fm = f(0.5 * (lo + hi))
    whole = _simpson(fa, fm, fb, hi - lo)
    return recurse(lo, hi, fa, fm, fb, whole, quad.abs_tol)


def bisect(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> float:
    """Bisection root of g on [lo, hi]; endpoints must straddle a sign
    change. Deterministic: returns the bracket midpoint once the bracket
    width drops below tol."""
    if lo > hi:
        raise ValueError(f"bracket out of order: [{lo}, {hi}]")
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0.0:
        raise BracketError(
            f"g({lo})={glo:.6g} and g({hi})={ghi:.6g} have the same sign"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket collapsed to adjacent floats
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if glo * gm < 0.0:
            hi = mid
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)


def pava_isotonic(
    values: Sequence[float], weights: Sequence[float]
) -> list[float]:
    """Weighted least-squares nondecreasing fit by pooling adjacent
    violators. Idempotent, and preserves the overall weighted mean."""
    if len(values) != len(weights):
        raise ValueError(
            f"values and weights differ in length: "
            f"{len(values)} vs {len(weights)}"
        )
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    # blocks of (level, weight, count), merged while out of order
    levels: list[float] = []
    wsums: list[float] = []
    counts: list[int] = []
    for v, w in zip(values, weights):
        levels.append(float(v))
        wsums.append(float(w))
        counts.append(1)
        while len(levels) > 1 and levels[-2] > levels[-1]:
            v2, w2, c2 = levels.pop(), wsums.pop(), counts.pop()
            levels[-1] = (levels[-1] * wsums[-1] + v2 * w2) / (wsums[-1] + w2)
            wsums[-1] += w2
            counts[-1] += c2
    out: list[float] = []
    for lev, c in zip(levels, counts):
        out.extend([lev] * c)
    return out


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF via erf."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
