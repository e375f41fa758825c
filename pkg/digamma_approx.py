"""
digamma_approx.py

Lorentzian approximation Φ̃ of Φ = ∂Ψ/∂q.

Replacing every Gaussian factor exp(-x) of the interval form of Φ by 1/(1+x)
turns the k-sum into a sum of rational terms that closes in digamma
functions of the complex arguments

  Z = (λ√qω - s)/(2π),  W = (λ√qω + s)/(2π),  s = √(2λ²(q-1)) = iλ√(2(1-q)).

phi_tilde assembles the eight digamma terms; phi_tilde_trig is the same
quantity after the reflection formula and serves as an independent check.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import ImaginaryResidueError, InvalidPointError
from replica_core import ReplicaPoint, phi_series_array
from settings import DEFAULT_SERIES, SeriesConfig
from specfun import digamma

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
IMAG_TOL = 1e-10
BRANCH_EPS = 1e-8
ASYMPTOTIC_LAMBDA_MIN = 20.0
BOUND_TOL = 1e-12


class PhiTildeParts(BaseModel):
    model_config = ConfigDict(frozen=True)

    Z: complex
    W: complex
    C1: complex
    C2: complex

    @model_validator(mode="after")
    def _conjugate_pairs(self) -> "PhiTildeParts":
        scale = 1.0 + abs(self.Z) + abs(self.C1)
        if abs(self.Z - self.W.conjugate()) > 1e-12 * scale:
            raise ValueError("Z and W must be complex conjugates")
        if abs((self.C1 + self.C2).imag) > 1e-12 * scale:
            raise ValueError("C1 + C2 must be real")
        return self


def _check(lam: float, q: float) -> None:
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be > 0, got {lam}")
    if not (math.isfinite(q) and 0.0 < q < 1.0):
        raise InvalidPointError(f"Φ̃ needs q in (0, 1), got {q}")


def _parts(lam: float, q: float, omega: np.ndarray):
    s = 1j * lam * math.sqrt(2.0 * (1.0 - q))
    center = lam * math.sqrt(q) * omega
    z = (center - s) / TWO_PI
    w = (center + s) / TWO_PI
    denom = 8.0 * math.pi * math.sqrt(q) * math.sqrt(1.0 - q)
    c1 = (2.0 * math.sqrt(q) * lam - omega * s) / denom
    c2 = (omega * s + 2.0 * math.sqrt(q) * lam) / denom
    return z, w, c1, c2


def phi_tilde_parts(pt: ReplicaPoint) -> PhiTildeParts:
    _check(pt.lam, pt.q)
    z, w, c1, c2 = _parts(pt.lam, pt.q, np.asarray(pt.omega, dtype=float))
    return PhiTildeParts(Z=complex(z), W=complex(w), C1=complex(c1), C2=complex(c2))


def _assemble(z, w, c1, c2):
    bracket_z = digamma(0.5 + z) - digamma(1.0 + z) + digamma(-z) - digamma(0.5 - z)
    bracket_w = digamma(0.5 + w) - digamma(0.5 - w) + digamma(-w) - digamma(1.0 + w)
    return c1 * bracket_z + c2 * bracket_w


def phi_tilde_complex(lam: float, q: float, omega) -> np.ndarray:
    """Digamma assembly before the imaginary part is checked and dropped."""
    _check(lam, q)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    return _assemble(*_parts(lam, q, omega))


def phi_tilde_array(lam: float, q: float, omega):
    scalar = np.ndim(omega) == 0
    value = phi_tilde_complex(lam, q, omega)
    residue = np.abs(value.imag)
    limit = IMAG_TOL * (1.0 + np.abs(value.real))
    if np.any(residue > limit):
        worst = float(np.max(residue / limit)) * IMAG_TOL
        raise ImaginaryResidueError(
            f"Φ̃ imaginary residue {worst:.3g} (relative) at lambda={lam}, q={q}", worst
        )
    return float(value.real[0]) if scalar else value.real


def phi_tilde(pt: ReplicaPoint) -> float:
    return phi_tilde_array(pt.lam, pt.q, pt.omega)


def phi_tilde_trig_array(lam: float, q: float, omega):
    """(2λ/(√q√(1-q))) Re[A / sin(λ√qω - ib)], A = (√q - iω√((1-q)/2))/2, b = λ√(2(1-q))."""
    _check(lam, q)
    omega = np.asarray(omega, dtype=float)
    b = lam * math.sqrt(2.0 * (1.0 - q))
    center = lam * math.sqrt(q) * omega
    a = 0.5 * (math.sqrt(q) - 1j * omega * math.sqrt(0.5 * (1.0 - q)))
    # 1/sin(c - ib) = 2i e^{-i(c - ib)} / (1 - e^{-2i(c - ib)}), bounded for b > 0
    e1 = np.exp(-b - 1j * center)
    inv_sin = 2j * e1 / (1.0 - e1 * e1)
    value = (2.0 * lam / (math.sqrt(q) * math.sqrt(1.0 - q))) * np.real(a * inv_sin)
    return float(value) if np.ndim(value) == 0 else value


def phi_tilde_trig(pt: ReplicaPoint) -> float:
    return phi_tilde_trig_array(pt.lam, pt.q, pt.omega)


def lorentzian_series(pt: ReplicaPoint, k_max: int = 100_000) -> float:
    """Direct sum over k = -k_max..k_max of the Lorentzian-substituted terms."""
    _check(pt.lam, pt.q)
    lam, q, omega = pt.lam, pt.q, pt.omega
    sq = math.sqrt(q)
    b2 = 2.0 * lam * lam * (1.0 - q)
    center = lam * sq * omega
    k = np.arange(-k_max, k_max + 1, dtype=float)
    odd = (2.0 * k + 1.0) * math.pi
    even = 2.0 * k * math.pi
    terms = (sq * odd - lam * omega) / (b2 + (odd - center) ** 2) - (sq * even - lam * omega) / (
        b2 + (even - center) ** 2
    )
    return lam / (sq * math.sqrt(1.0 - q)) * math.fsum(terms)


def lorentzian_gaussian_gap(pt: ReplicaPoint, k: int) -> float:
    """1/(1+x) - e^{-x} for the term centred at (2k+1)π, x = ((2k+1)π - λ√qω)²/(2λ²(1-q))."""
    x = ((2 * k + 1) * math.pi - pt.lam * math.sqrt(pt.q) * pt.omega) ** 2 / (2.0 * pt.lam**2 * (1.0 - pt.q))
    return 1.0 / (1.0 + x) - math.exp(-x)


def phi_tilde_asymptotic(pt: ReplicaPoint) -> float:
    """Large-λ form of Φ̃ from ψ(z) ~ ln z, principal branches throughout."""
    _check(pt.lam, pt.q)
    lam, q, omega = pt.lam, pt.q, pt.omega
    if lam < ASYMPTOTIC_LAMBDA_MIN:
        logger.info(f"phi_tilde_asymptotic used below lambda={ASYMPTOTIC_LAMBDA_MIN} (lambda={lam})")
    s = 1j * lam * math.sqrt(2.0 * (1.0 - q))
    c = lam * math.sqrt(q) * omega
    pi = math.pi
    _, _, c1, c2 = _parts(lam, q, np.asarray(omega, dtype=float))
    ratios = (
        (pi - s + c, 2 * pi + c - s),
        (pi - c + s, -c + s),
        (pi + c + s, pi - c - s),
        (2 * pi + c + s, -c - s),
    )
    for num, den in ratios:
        if min(abs(num), abs(den), abs(num / den)) < BRANCH_EPS:
            logger.warning(f"asymptotic Φ̃ near a branch point at lambda={lam}, q={q}, omega={omega}")
    logs = [np.log(num / den) for num, den in ratios]
    value = complex(c1) * (logs[0] - logs[1]) + complex(c2) * (logs[2] - logs[3])
    if abs(value.imag) > 1e-6 * (1.0 + abs(value.real)):
        logger.warning(f"asymptotic Φ̃ branch mismatch: imaginary part {value.imag:.3g}")
    return float(value.real)


# ---------- Upper-bound study ----------

def upper_bound_scan(
    lams: Sequence[float],
    qs: Sequence[float],
    omegas: Sequence[float],
    cfg: SeriesConfig = DEFAULT_SERIES,
) -> List[Dict[str, float]]:
    """Grid points where |Φ̃| < Φ - 1e-12; each one is logged as a finding."""
    findings: List[Dict[str, float]] = []
    omegas = np.asarray(list(omegas), dtype=float)
    for lam in lams:
        for q in qs:
            exact = np.atleast_1d(phi_series_array(lam, q, omegas, cfg))
            approx = np.atleast_1d(phi_tilde_array(lam, q, omegas))
            bad = np.abs(approx) < exact - BOUND_TOL
            for omega, p, pt in zip(omegas[bad], exact[bad], approx[bad]):
                finding = {"lambda": float(lam), "q": float(q), "omega": float(omega), "phi": float(p), "phi_tilde": float(pt)}
                logger.warning(f"upper bound violated: {finding}")
                findings.append(finding)
    return findings
