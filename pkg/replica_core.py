"""
replica_core.py

Replica-symmetric objects of the oscillating perceptron:

  Ψ(λ,q,ω)  Gaussian mass of {z : sin(λ(√q ω + √(1-q) z)) > 0}
  Φ(λ,q,ω)  ∂Ψ/∂q
  G(λ,α,q)  α ∫Dω ln Ψ + ½[q/(1-q) + ln(1-q)]
  α(λ,q)    -q / (2(1-q)²) · (∫Dω Φ/Ψ)⁻¹      (stationarity of G in q)

Two representations of Ψ and Φ are provided. The interval form sums Gaussian
masses between consecutive zeros of the sine and stays cheap up to q → 1.
The theta-series form is a Fourier sine series whose terms decay like
exp(-(1-q)λ²(2m+1)²/2), fast for small q or large λ.

The ω-integrals use the interval form in log space: Φ/Ψ and ln Ψ are
assembled relative to the dominant interval, so points where Ψ is far below
the double range still contribute their exact ratio.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import integrate, optimize, special

from errors import (
    AmbiguousSaddleError,
    InvalidPointError,
    NoBracketError,
    QuadratureError,
    SignViolationError,
    TruncationError,
)
from settings import DEFAULT_SERIES, SeriesConfig
from specfun import LOG_SQRT_2PI, gauss_masses, gauss_pdf, log_gauss_masses

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# q grid scanned by saddle_roots before bisecting each sign change
SADDLE_Q_GRID = (
    1e-3, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
    0.95, 0.98, 0.99, 0.995, 0.999, 0.9995, 0.9999, 0.99999, 0.999999,
)
SADDLE_Q_TOL = 1e-10
MAX_QUAD_POINTS = 1000


class ReplicaPoint(BaseModel):
    """Evaluation point (λ, q, ω) for Ψ and Φ."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    q: float = Field(ge=0, lt=1)
    omega: float

    @field_validator("lam", "q", "omega")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("ReplicaPoint fields must be finite")
        return v


def _check_domain(lam: float, q: float, q_positive: bool = False) -> None:
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be > 0, got {lam}")
    if not (math.isfinite(q) and 0.0 <= q < 1.0):
        raise InvalidPointError(f"q must lie in [0, 1), got {q}")
    if q_positive and q <= 0.0:
        raise InvalidPointError("Φ needs q > 0 (1/√q factor); use finite differences of Ψ at q = 0")


def _out(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


# ---------- Interval representation ----------

def _interval_window(lam: float, q: float, omega: np.ndarray, cfg: SeriesConfig):
    """Lower/upper z-bounds of the positive half-periods nearest to λ√qω.

    Returns (eps1, eps2, a1, a2) with a trailing axis over k.
    """
    sigma = lam * math.sqrt(1.0 - q)
    center = np.asarray(lam * math.sqrt(q) * omega, dtype=float)
    if cfg.k_max is not None:
        half = cfg.k_max
    else:
        half = int(math.ceil(cfg.z_cut * sigma / TWO_PI)) + 1
    if 2 * half + 1 > cfg.term_cap:
        raise TruncationError(f"interval sum needs {2 * half + 1} terms", 2 * half + 1)
    k0 = np.asarray(np.floor(center / TWO_PI))
    ks = k0[..., None] + np.arange(-half, half + 1)
    a1 = TWO_PI * ks
    a2 = a1 + math.pi
    c = center[..., None]
    return (a1 - c) / sigma, (a2 - c) / sigma, a1, a2


def psi_interval_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    _check_domain(lam, q)
    omega = np.asarray(omega, dtype=float)
    eps1, eps2, _, _ = _interval_window(lam, q, omega, cfg)
    return _out(np.sum(gauss_masses(eps1, eps2), axis=-1))


def psi_interval(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Ψ as a sum of Gaussian masses over the windows where the sine is positive."""
    return psi_interval_array(pt.lam, pt.q, pt.omega, cfg)


def log_psi_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    _check_domain(lam, q)
    omega = np.asarray(omega, dtype=float)
    eps1, eps2, _, _ = _interval_window(lam, q, omega, cfg)
    return _out(special.logsumexp(log_gauss_masses(eps1, eps2), axis=-1))


def log_psi(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    return log_psi_array(pt.lam, pt.q, pt.omega, cfg)


def _bound_derivatives(lam: float, q: float, omega: np.ndarray, a: np.ndarray) -> np.ndarray:
    # ∂ε/∂q for ε = (a - λ√q ω)/(λ√(1-q))
    scale = 2.0 * lam * math.sqrt(q) * (1.0 - q) ** 1.5
    return (math.sqrt(q) * a - lam * omega[..., None]) / scale


def _phi_interval_parts(lam: float, q: float, omega, cfg: SeriesConfig):
    _check_domain(lam, q, q_positive=True)
    omega = np.asarray(omega, dtype=float)
    eps1, eps2, a1, a2 = _interval_window(lam, q, omega, cfg)
    d1 = _bound_derivatives(lam, q, omega, a1)
    d2 = _bound_derivatives(lam, q, omega, a2)
    return eps1, eps2, d1, d2


def phi_interval_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    eps1, eps2, d1, d2 = _phi_interval_parts(lam, q, omega, cfg)
    return _out(np.sum(gauss_pdf(eps2) * d2 - gauss_pdf(eps1) * d1, axis=-1))


def phi_interval(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Φ from differentiating the interval bounds of Ψ; valid up to q → 1."""
    return phi_interval_array(pt.lam, pt.q, pt.omega, cfg)


def phi_over_psi_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    eps1, eps2, d1, d2 = _phi_interval_parts(lam, q, omega, cfg)
    log_ref = np.asarray(special.logsumexp(log_gauss_masses(eps1, eps2), axis=-1))[..., None]
    w1 = np.exp(-0.5 * eps1 * eps1 - LOG_SQRT_2PI - log_ref)
    w2 = np.exp(-0.5 * eps2 * eps2 - LOG_SQRT_2PI - log_ref)
    return _out(np.sum(w2 * d2 - w1 * d1, axis=-1))


def phi_over_psi(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    return phi_over_psi_array(pt.lam, pt.q, pt.omega, cfg)


# ---------- Theta-series representation ----------

def _odd_cutoff(sigma: float, prefactor: Callable[[int], float], cfg: SeriesConfig) -> int:
    """Largest odd n needed so the geometric tail bound of the series is < quad_tol."""
    if cfg.m_max is not None:
        return 2 * cfg.m_max + 1
    s2 = sigma * sigma

    def bound(n: int) -> float:
        tail = 1.0 + 1.0 / (2.0 * s2 * n)
        return 2.0 * prefactor(n) * math.exp(-0.5 * s2 * n * n) * tail

    n = 1
    while bound(n) >= cfg.quad_tol:
        n = 2 * n + 1
        if (n + 1) // 2 > cfg.term_cap:
            raise TruncationError(
                f"theta series needs more than {cfg.term_cap} terms (sigma={sigma:.3g})", (n + 1) // 2
            )
    return n


def _series_sum(sigma: float, center: np.ndarray, n_max: int, term: Callable) -> np.ndarray:
    acc = np.zeros_like(center)
    chunk = 1 << 14
    for start in range(1, n_max + 1, 2 * chunk):
        n = np.arange(start, min(n_max, start + 2 * chunk - 1) + 1, 2, dtype=float)
        damp = np.exp(-0.5 * sigma * sigma * n * n)
        acc = acc + np.sum(term(n, damp, center[..., None] * n), axis=-1)
    return acc


def psi_series_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    _check_domain(lam, q)
    omega = np.asarray(omega, dtype=float)
    sigma = lam * math.sqrt(1.0 - q)
    n_max = _odd_cutoff(sigma, lambda n: (2.0 / math.pi) / n, cfg)
    center = np.asarray(lam * math.sqrt(q) * omega, dtype=float)
    s = _series_sum(sigma, center, n_max, lambda n, damp, arg: damp * np.sin(arg) / n)
    return _out(0.5 + (2.0 / math.pi) * s)


def psi_series(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Ψ = ½ + (2/π) Σ_m e^{-(1-q)λ²(2m+1)²/2} sin((2m+1)λ√qω)/(2m+1)."""
    return psi_series_array(pt.lam, pt.q, pt.omega, cfg)


def phi_series_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    _check_domain(lam, q, q_positive=True)
    omega = np.asarray(omega, dtype=float)
    sigma = lam * math.sqrt(1.0 - q)
    cos_coef = np.asarray(lam * omega / math.sqrt(q), dtype=float)
    peak = lam * lam + float(np.max(np.abs(cos_coef), initial=0.0))
    n_max = _odd_cutoff(sigma, lambda n: (lam * lam * n + peak) / math.pi, cfg)
    center = np.asarray(lam * math.sqrt(q) * omega, dtype=float)
    lam2 = lam * lam
    coef = cos_coef[..., None]

    def term(n, damp, arg):
        return damp * (lam2 * n * np.sin(arg) + coef * np.cos(arg))

    return _out(_series_sum(sigma, center, n_max, term) / math.pi)


def phi_series(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Term-by-term q-derivative of the theta series."""
    return phi_series_array(pt.lam, pt.q, pt.omega, cfg)


def log_psi_series_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    """ln Ψ from the theta series, with Ψ floored at cfg.psi_floor."""
    psi_value = np.maximum(psi_series_array(lam, q, omega, cfg), cfg.psi_floor)
    return _out(np.log(psi_value))


def phi_over_psi_series_array(lam: float, q: float, omega, cfg: SeriesConfig = DEFAULT_SERIES):
    psi_value = np.maximum(psi_series_array(lam, q, omega, cfg), cfg.psi_floor)
    return _out(np.asarray(phi_series_array(lam, q, omega, cfg)) / psi_value)


def _prefers_series(lam: float, q: float) -> bool:
    return q <= 0.5 or lam >= 20.0


def psi(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Ψ in whichever representation converges faster at this point."""
    if _prefers_series(pt.lam, pt.q):
        return psi_series(pt, cfg)
    return psi_interval(pt, cfg)


def phi(pt: ReplicaPoint, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    if _prefers_series(pt.lam, pt.q):
        return phi_series(pt, cfg)
    return phi_interval(pt, cfg)


# ---------- ω-integrals ----------

def _break_points(lam: float, q: float, cut: float) -> Optional[List[float]]:
    """Zeros and half-way points of sin(λ√qω) inside (-cut, cut)."""
    if q <= 0.0:
        return [0.0]
    step = math.pi / (2.0 * lam * math.sqrt(q))
    count = int(cut / step)
    if 2 * count + 1 > MAX_QUAD_POINTS:
        return None
    pts = [j * step for j in range(-count, count + 1)]
    return [p for p in pts if -cut < p < cut]


def gauss_integral(
    fn: Callable[[float], float],
    cfg: SeriesConfig,
    points: Optional[Sequence[float]] = None,
    label: str = "integral",
) -> float:
    """∫Dω fn(ω) by adaptive quadrature on [-omega_cut, omega_cut].

    The remainder outside the cut is bounded assuming |fn| grows at most
    quadratically, which holds for ln Ψ and Φ/Ψ.
    """
    cut = cfg.omega_cut
    pts = list(points) if points else None
    limit = max(cfg.quad_limit, 4 * len(pts) + 50) if pts else cfg.quad_limit
    result = integrate.quad(
        lambda w: gauss_pdf(w) * fn(w),
        -cut,
        cut,
        points=pts,
        epsabs=cfg.quad_tol,
        epsrel=cfg.quad_tol,
        limit=limit,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    edge = max(abs(fn(-cut)), abs(fn(cut)), 1.0)
    tail = 2.0 * (cut * float(gauss_pdf(cut)) + 0.5 * math.erfc(cut / math.sqrt(2.0))) * edge
    budget = abserr + tail
    if len(result) > 3:
        logger.debug(f"{label}: quad message {result[3]!r}, abserr={abserr:.3g}")
    if not math.isfinite(value) or budget > math.sqrt(cfg.quad_tol) * max(1.0, abs(value)):
        raise QuadratureError(
            f"{label} did not converge: value={value!r} error budget={budget:.3g}", value, budget
        )
    logger.debug(f"{label} = {value!r} (abserr={abserr:.2g}, tail={tail:.2g})")
    return value


def energetic_term(lam: float, q: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """∫Dω ln Ψ(λ,q,ω)."""
    _check_domain(lam, q)
    if q == 0.0:
        return float(log_psi_array(lam, 0.0, 0.0, cfg))
    return gauss_integral(
        lambda w: float(log_psi_array(lam, q, w, cfg)),
        cfg,
        _break_points(lam, q, cfg.omega_cut),
        label=f"∫Dω lnΨ(λ={lam}, q={q})",
    )


def entropic_term(q: float) -> float:
    return 0.5 * (q / (1.0 - q) + math.log1p(-q))


def free_energy_G(lam: float, alpha: float, q: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """G(λ,α,q) = α∫Dω ln Ψ + ½[q/(1-q) + ln(1-q)]."""
    _check_domain(lam, q)
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise InvalidPointError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0.0:
        return entropic_term(q)
    return alpha * energetic_term(lam, q, cfg) + entropic_term(q)


def saddle_integral(lam: float, q: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """∫Dω Φ/Ψ, negative for every valid (λ, q)."""
    _check_domain(lam, q, q_positive=True)
    return gauss_integral(
        lambda w: float(phi_over_psi_array(lam, q, w, cfg)),
        cfg,
        _break_points(lam, q, cfg.omega_cut),
        label=f"∫Dω Φ/Ψ(λ={lam}, q={q})",
    )


def _alpha_from_integral(q: float, integral: float, where: str) -> float:
    if not integral < 0.0:
        raise SignViolationError(f"∫Dω Φ/Ψ = {integral!r} is not negative at {where}", integral)
    return -q / (2.0 * (1.0 - q) ** 2 * integral)


def alpha_of_q(lam: float, q: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Load α at which q extremises G(λ, α, ·)."""
    _check_domain(lam, q, q_positive=True)
    return _alpha_from_integral(q, saddle_integral(lam, q, cfg), f"lambda={lam}, q={q}")


def classical_alpha_of_q(q: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Saddle relation of the sign perceptron, Ψ = H(-√q ω/√(1-q))."""
    if not 0.0 < q < 1.0:
        raise InvalidPointError(f"q must lie in (0, 1), got {q}")
    sq = math.sqrt(q)
    scale = 2.0 * sq * (1.0 - q) ** 1.5

    def ratio(w: float) -> float:
        u = sq * w / math.sqrt(1.0 - q)
        return math.exp(-0.5 * u * u - LOG_SQRT_2PI - float(special.log_ndtr(u))) * w / scale

    integral = gauss_integral(ratio, cfg, [0.0], label=f"classical ∫Dω Φ/Ψ(q={q})")
    return _alpha_from_integral(q, integral, f"classical q={q}")


# ---------- Saddle point ----------

def saddle_roots(
    lam: float,
    alpha: float,
    cfg: SeriesConfig = DEFAULT_SERIES,
    q_grid: Sequence[float] = SADDLE_Q_GRID,
) -> List[float]:
    """Every q on (0,1) with alpha_of_q(λ, q) = α, one per bracketed sign change.

    Only [q_grid[0], q_grid[-1]] is searched. At large λ, α(λ, q) is not
    monotone: it rises steeply from 0 at small q, falls to a minimum and climbs
    again towards its q -> 1 limit, so one α can have two roots on the grid.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidPointError(f"alpha must be > 0, got {alpha}")
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be > 0, got {lam}")

    grid = sorted(q_grid)
    values = [alpha_of_q(lam, q, cfg) for q in grid]
    logger.info(f"saddle scan lambda={lam}: alpha range [{min(values):.6g}, {max(values):.6g}]")

    def residual(q: float) -> float:
        return alpha_of_q(lam, q, cfg) - alpha

    roots: List[float] = []
    for (q_a, v_a), (q_b, v_b) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        f_a, f_b = v_a - alpha, v_b - alpha
        if f_a == 0.0:
            roots.append(q_a)
        elif f_a * f_b < 0.0:
            roots.append(optimize.bisect(residual, q_a, q_b, xtol=SADDLE_Q_TOL, rtol=4 * np.finfo(float).eps))
    if values[-1] == alpha:
        roots.append(grid[-1])

    if not roots:
        lo, hi = min(values), max(values)
        regime = "below" if alpha < lo else "above"
        q_min = grid[values.index(lo)]
        if regime == "above":
            hint = "q -> 1, at or over capacity"
        elif q_min == grid[0]:
            hint = "q -> 0 regime"
        else:
            hint = f"alpha(q) has its minimum near q={q_min:g}"
        raise NoBracketError(
            f"no saddle for lambda={lam}, alpha={alpha}: alpha outside [{lo:.6g}, {hi:.6g}] ({hint})",
            regime,
            (lo, hi),
        )
    return roots


def saddle_q(lam: float, alpha: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    roots = saddle_roots(lam, alpha, cfg)
    if len(roots) > 1:
        logger.warning(f"multiple saddle roots for lambda={lam}, alpha={alpha}: {roots}")
        raise AmbiguousSaddleError(f"{len(roots)} saddle roots for lambda={lam}, alpha={alpha}", roots)
    return roots[0]
