"""
capacity.py

Closed-form storage capacities.

  classical_alpha_c(κ)   (∫_{-κ}^∞ Dy (κ+y)²)⁻¹, the sign perceptron with margin κ
  alpha_c(λ)             1 / Σ_{k≥0} ∫_0^{2π/λ} ω² φ(ω + 2πk/λ) dω
  alpha_c_nearest(λ)     1 / ∫Dt dist(t, {sin λt > 0})²

Every k-term is an interval second moment of the Gaussian with an elementary
antiderivative, so no quadrature is involved; sums stop on an analytic tail
bound. alpha_q_limit_check compares both closed forms with the q → 1
extrapolation of the saddle relation α(λ, q).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import integrate

import replica_core
from errors import InvalidPointError
from settings import DEFAULT_SERIES, SeriesConfig
from specfun import gauss_masses, gauss_pdf

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_Q_LIST = (1.0 - 1e-2, 1.0 - 1e-3, 1.0 - 1e-4)
BLOCK = 4096


class CapacityCurve(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambdas: List[float]
    alpha_c: List[float]
    dalpha_dlambda: List[float]
    truncation_k: List[int]

    @model_validator(mode="after")
    def _consistent(self) -> "CapacityCurve":
        n = len(self.lambdas)
        if not (len(self.alpha_c) == len(self.dalpha_dlambda) == len(self.truncation_k) == n):
            raise ValueError("CapacityCurve columns must have equal length")
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("CapacityCurve lambdas must be strictly increasing")
        if any(a < 2.0 - 1e-9 for a in self.alpha_c):
            raise ValueError("alpha_c below the classical bound 2")
        return self

    def records(self) -> List[dict]:
        return [
            {"lambda": l, "alpha_c": a, "dalpha_dlambda": d, "k_used": k}
            for l, a, d, k in zip(self.lambdas, self.alpha_c, self.dalpha_dlambda, self.truncation_k)
        ]


class LimitCheck(BaseModel):
    """q → 1 extrapolation of α(λ, q) against both closed forms."""

    model_config = ConfigDict(frozen=True)

    lam: float
    q_list: List[float]
    alpha_values: List[float]
    extrapolated: float
    closed_form: float
    rel_gap: float
    nearest_form: float
    nearest_gap: float


def _check_tol(tol: float) -> None:
    if not (math.isfinite(tol) and tol > 0):
        raise InvalidPointError(f"tol must be > 0, got {tol}")


# ---------- Gaussian interval moments ----------

def _second_moment_about(c, lo, hi):
    """∫_lo^hi (t - c)² φ(t) dt, vectorised."""
    return (1.0 + c * c) * gauss_masses(lo, hi) + (lo - 2.0 * c) * gauss_pdf(lo) - (hi - 2.0 * c) * gauss_pdf(hi)


# ---------- Classical perceptron ----------

def classical_alpha_c(kappa: float) -> float:
    """Capacity of the sign perceptron with stability margin κ ≥ 0."""
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise InvalidPointError(f"kappa must be finite and >= 0, got {kappa}")
    denom = (1.0 + kappa * kappa) * 0.5 * math.erfc(-kappa / math.sqrt(2.0)) + kappa * float(gauss_pdf(kappa))
    return 1.0 / denom


def classical_alpha_c_quadrature(kappa: float) -> float:
    value, _ = integrate.quad(
        lambda y: (kappa + y) ** 2 * float(gauss_pdf(y)), -kappa, np.inf, epsabs=1e-14, epsrel=1e-13
    )
    return 1.0 / value


# ---------- Oscillating perceptron ----------

def capacity_denominator(lam: float, tol: float = DEFAULT_TOL) -> Tuple[float, int]:
    """Σ_k ∫_0^P ω² φ(ω + kP) dω with P = 2π/λ; returns (value, terms used).

    For k ≥ 1 the remaining terms are bounded by P³ φ(kP) / (1 - e^{-kP²}).
    """
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be > 0, got {lam}")
    _check_tol(tol)
    period = 2.0 * math.pi / lam
    total = 0.0
    start = 0
    while True:
        k = np.arange(start, start + BLOCK, dtype=float)
        s = k * period
        terms = _second_moment_about(s, s, s + period)
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = period ** 3 * gauss_pdf(s) / -np.expm1(-k * period * period)
        below = np.nonzero((k >= 1) & (bound < tol))[0]
        if below.size:
            stop = int(below[0])
            total += math.fsum(terms[:stop])
            k_used = start + stop
            break
        total += math.fsum(terms)
        start += BLOCK
    logger.debug(f"capacity_denominator(lambda={lam}) = {total!r} with {k_used} terms")
    return total, k_used


def alpha_c(lam: float, tol: float = DEFAULT_TOL) -> float:
    """λ-dependent storage capacity; exactly 2 at λ = 0."""
    if lam == 0.0:
        return 2.0
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be >= 0, got {lam}")
    value, _ = capacity_denominator(lam, tol)
    return 1.0 / value


def nearest_feasible_denominator(lam: float, tol: float = DEFAULT_TOL) -> Tuple[float, int]:
    """∫Dt dist(t, S)² with S = {t : sin(λt) > 0}; returns (value, intervals used).

    Infeasible intervals are ((2k+1)π/λ, (2k+2)π/λ); the distance is measured
    to the nearer end, so each interval splits at its midpoint. Intervals that
    miss [-T, T] are dropped, which costs at most 2(Tφ(T) + H(T)) < tol.
    """
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be > 0, got {lam}")
    _check_tol(tol)
    half = math.pi / lam
    reach = max(10.0, math.sqrt(2.0 * math.log(1.0 / tol)) + 1.0)
    k_lo = math.floor((-reach / half - 2.0) / 2.0)
    k_hi = math.ceil((reach / half - 1.0) / 2.0)
    total = 0.0
    used = 0
    for start in range(k_lo, k_hi + 1, BLOCK):
        k = np.arange(start, min(start + BLOCK, k_hi + 1), dtype=float)
        left = (2.0 * k + 1.0) * half
        right = left + half
        keep = (right > -reach) & (left < reach)
        left, right = left[keep], right[keep]
        mid = 0.5 * (left + right)
        pieces = _second_moment_about(left, left, mid) + _second_moment_about(right, mid, right)
        total += math.fsum(pieces)
        used += int(left.size)
    return total, used


def alpha_c_nearest(lam: float, tol: float = DEFAULT_TOL) -> float:
    """q → 1 limit of the replica-symmetric saddle relation α(λ, q)."""
    if lam == 0.0:
        return 2.0
    value, _ = nearest_feasible_denominator(lam, tol)
    return 1.0 / value


# ---------- Curves ----------

def _curve_point(lam: float, tol: float) -> Tuple[float, int]:
    if lam == 0.0:
        return 2.0, 0
    value, k_used = capacity_denominator(lam, tol)
    return 1.0 / value, k_used


def _central_differences(x: Sequence[float], y: Sequence[float]) -> List[float]:
    n = len(x)
    if n == 1:
        return [0.0]
    out = []
    for i in range(n):
        lo, hi = max(i - 1, 0), min(i + 1, n - 1)
        out.append((y[hi] - y[lo]) / (x[hi] - x[lo]))
    return out


def capacity_curve(
    lambda_grid: Sequence[float], tol: float = DEFAULT_TOL, workers: int = 1
) -> CapacityCurve:
    grid = [float(v) for v in lambda_grid]
    if not grid:
        raise InvalidPointError("lambda grid is empty")
    if any(v < 0 or not math.isfinite(v) for v in grid):
        raise InvalidPointError("lambda grid entries must be finite and >= 0")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidPointError("lambda grid must be strictly increasing")
    _check_tol(tol)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda v: _curve_point(v, tol), grid))
    else:
        points = [_curve_point(v, tol) for v in grid]
    alphas = [a for a, _ in points]
    return CapacityCurve(
        lambdas=grid,
        alpha_c=alphas,
        dalpha_dlambda=_central_differences(grid, alphas),
        truncation_k=[k for _, k in points],
    )


# ---------- q → 1 consistency ----------

def extrapolate_to_zero(h: Sequence[float], values: Sequence[float]) -> float:
    """Neville evaluation at h = 0 of the polynomial through (h_i, values_i)."""
    p = list(values)
    n = len(p)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (h[i] * p[i + 1] - h[i + m] * p[i]) / (h[i] - h[i + m])
    return p[0]


def alpha_q_limit_check(
    lam: float,
    q_list: Sequence[float] = DEFAULT_Q_LIST,
    cfg: SeriesConfig = DEFAULT_SERIES,
    tol: float = DEFAULT_TOL,
) -> LimitCheck:
    qs = [float(q) for q in q_list]
    if not qs:
        raise InvalidPointError("q_list is empty")
    if any(not 0.0 < q < 1.0 for q in qs) or any(b <= a for a, b in zip(qs, qs[1:])):
        raise InvalidPointError("q_list must be strictly increasing inside (0, 1)")
    values = [replica_core.alpha_of_q(lam, q, cfg) for q in qs]
    extrapolated = extrapolate_to_zero([1.0 - q for q in qs], values)
    closed = alpha_c(lam, tol)
    nearest = alpha_c_nearest(lam, tol)
    check = LimitCheck(
        lam=lam,
        q_list=qs,
        alpha_values=values,
        extrapolated=extrapolated,
        closed_form=closed,
        rel_gap=abs(extrapolated - closed) / closed,
        nearest_form=nearest,
        nearest_gap=abs(extrapolated - nearest) / nearest,
    )
    logger.info(
        f"limit check lambda={lam}: extrapolated={extrapolated:.10g} closed={closed:.10g} "
        f"(gap {check.rel_gap:.3%}) nearest={nearest:.10g} (gap {check.nearest_gap:.3%})"
    )
    return check
