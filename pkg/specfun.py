"""
specfun.py

Scalar special functions and Gaussian-measure primitives.

Real-argument kernels (erf, erfc, log_ndtr, gammaln) come from scipy.special;
the complex digamma is implemented here because the Lorentzian approximation
of Φ needs it at complex arguments with a controlled algorithm:
reflection into Re z ≥ 1/2, upward recurrence until Re z ≥ 10, then the
Stirling-type asymptotic series with eight Bernoulli terms.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import special

from errors import InvalidPointError, PoleError

ArrayLike = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
EULER_GAMMA = 0.57721566490153286060651209008240243

# B_{2k} / (2k), k = 1..8
_STIRLING_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)
_SHIFT_TARGET = 10.0
_COT_SATURATION = 40.0


class GaussInterval(BaseModel):
    """Integration bounds in standard-normal units; ±inf allowed."""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self) -> "GaussInterval":
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("GaussInterval bounds must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"GaussInterval requires lo <= hi, got ({self.lo}, {self.hi})")
        return self


def _reject_nan(*values: ArrayLike) -> None:
    for v in values:
        if np.any(np.isnan(v)):
            raise InvalidPointError("NaN argument")


# ---------- Gaussian measure ----------

def gauss_pdf(z: ArrayLike) -> ArrayLike:
    return np.exp(-0.5 * np.square(z) - LOG_SQRT_2PI)


def gauss_masses(lo: ArrayLike, hi: ArrayLike) -> ArrayLike:
    """Vectorised ∫_lo^hi Dz with erfc taken on the smaller tail."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    _reject_nan(lo, hi)
    right = 0.5 * (special.erfc(lo / SQRT2) - special.erfc(hi / SQRT2))
    left = 0.5 * (special.erfc(-hi / SQRT2) - special.erfc(-lo / SQRT2))
    middle = 1.0 - 0.5 * special.erfc(hi / SQRT2) - 0.5 * special.erfc(-lo / SQRT2)
    out = np.where(lo >= 0.0, right, np.where(hi <= 0.0, left, middle))
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def gauss_mass(iv: GaussInterval) -> float:
    return gauss_masses(iv.lo, iv.hi)


def log_gauss_masses(lo: ArrayLike, hi: ArrayLike) -> ArrayLike:
    """ln ∫_lo^hi Dz, finite deep in either tail; -inf for empty intervals."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    _reject_nan(lo, hi)
    mirror = lo > 0.0
    a = np.where(mirror, -hi, lo)
    b = np.where(mirror, -lo, hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_b = special.log_ndtr(b)
        out = log_b + np.log1p(-np.exp(special.log_ndtr(a) - log_b))
    out = np.where(a >= b, -np.inf, out)
    return out if out.ndim else float(out)


def erf(z: ArrayLike) -> ArrayLike:
    _reject_nan(z)
    return special.erf(z)


def erfc(z: ArrayLike) -> ArrayLike:
    _reject_nan(z)
    return special.erfc(z)


# ---------- Digamma ----------

def _cot_pi(z: np.ndarray) -> np.ndarray:
    x2 = 2.0 * np.pi * z.real
    y2 = 2.0 * np.pi * z.imag
    big = np.abs(y2) > _COT_SATURATION
    y_safe = np.where(big, 0.0, y2)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.sin(x2) - 1j * np.sinh(y_safe)) / (np.cosh(y_safe) - np.cos(x2))
    return np.where(big, -1j * np.sign(y2), direct)


def _digamma_right(w: np.ndarray) -> np.ndarray:
    """ψ on Re w >= 1/2: shift upward, then the asymptotic series."""
    acc = np.zeros_like(w)
    w = w.copy()
    steps = int(np.max(np.ceil(_SHIFT_TARGET - w.real), initial=0.0))
    for _ in range(max(steps, 0)):
        low = w.real < _SHIFT_TARGET
        if not np.any(low):
            break
        acc = np.where(low, acc - 1.0 / w, acc)
        w = np.where(low, w + 1.0, w)
    u = 1.0 / (w * w)
    series = np.zeros_like(w)
    for c in reversed(_STIRLING_COEFFS):
        series = series * u + c
    return acc + np.log(w) - 0.5 / w - series * u


def digamma(z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """ψ(z) = Γ'(z)/Γ(z) for complex z off the poles 0, -1, -2, ..."""
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(np.isnan(arr)):
        raise InvalidPointError("NaN argument to digamma")
    poles = (arr.imag == 0.0) & (arr.real <= 0.0) & (arr.real == np.round(arr.real))
    if np.any(poles):
        bad = complex(arr[poles][0])
        raise PoleError(f"digamma pole at z={bad}", bad)

    left = arr.real < 0.5
    w = np.where(left, 1.0 - arr, arr)
    out = _digamma_right(w)
    if np.any(left):
        out = np.where(left, out - np.pi * _cot_pi(np.where(left, arr, 0.5 + 0j)), out)
    return complex(out[0]) if scalar else out


# ---------- Sphere normalisation ----------

def log_sphere_surface(n: int) -> float:
    """ln C_N = ln 2 + (N/2) ln π + ((N-1)/2) ln N - lnΓ(N/2)."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidPointError(f"N must be a positive integer, got {n!r}")
    n = int(n)
    return (
        math.log(2.0)
        + 0.5 * n * math.log(math.pi)
        + 0.5 * (n - 1) * math.log(n)
        - float(special.gammaln(0.5 * n))
    )
