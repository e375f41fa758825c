"""
gardner_mc.py

Hit-or-miss Monte Carlo for the Gardner volume of the oscillating perceptron
at finite N: the fraction of weights on the sphere ‖w‖² = N satisfying

  ξ^μ sin(λ w·x^μ / √N) > 0   for every pattern μ.

Weights are drawn in blocks of BLOCK samples; block b uses the stream
SeedSequence([seed, b]), so results do not depend on the worker count.

Usage:
  python gardner_mc.py --n 12 --lambda 1e-6 --alphas 0.25:3:0.25 --trials 20 --samples 20000
"""

from __future__ import annotations

import argparse
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from tqdm import tqdm

from errors import InvalidPointError
from quantum_sim import WeightVector

logger = logging.getLogger(__name__)

BLOCK = 4096


# ---------- Models ----------

class PatternSet(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int = Field(ge=1)
    p: int = Field(ge=0)
    patterns: np.ndarray
    labels: np.ndarray

    @field_validator("patterns", "labels", mode="before")
    @classmethod
    def _pm_one(cls, v):
        arr = np.asarray(v, dtype=np.int8)
        if arr.size and not np.all(np.isin(arr, (-1, 1))):
            raise ValueError("entries must be -1 or +1")
        return arr

    @model_validator(mode="after")
    def _shapes(self) -> "PatternSet":
        if self.patterns.shape != (self.p, self.N):
            raise ValueError(f"patterns shape {self.patterns.shape} != ({self.p}, {self.N})")
        if self.labels.shape != (self.p,):
            raise ValueError(f"labels shape {self.labels.shape} != ({self.p},)")
        return self

    def prefix(self, p: int) -> "PatternSet":
        if not 0 <= p <= self.p:
            raise InvalidPointError(f"prefix length {p} outside [0, {self.p}]")
        return PatternSet(N=self.N, p=p, patterns=self.patterns[:p], labels=self.labels[:p])


class VolumeEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    fraction: float = Field(ge=0.0, le=1.0)
    stderr: float = Field(ge=0.0)
    samples: int = Field(gt=0)
    seed: int

    @model_validator(mode="after")
    def _binomial_stderr(self) -> "VolumeEstimate":
        expected = math.sqrt(self.fraction * (1.0 - self.fraction) / self.samples)
        if abs(self.stderr - expected) > 1e-12:
            raise ValueError("stderr must equal sqrt(fraction(1-fraction)/samples)")
        return self

    @classmethod
    def from_count(cls, hits: int, samples: int, seed: int) -> "VolumeEstimate":
        f = hits / samples
        return cls(fraction=f, stderr=math.sqrt(f * (1.0 - f) / samples), samples=samples, seed=seed)


class ScanRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    p: int
    fraction_positive: float
    mean_log_fraction: Optional[float]
    q25: float
    q50: float
    q75: float


# ---------- Sampling ----------

def _check_seed(seed: int) -> None:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < 2**64:
        raise InvalidPointError(f"seed must be an integer in [0, 2^64), got {seed!r}")


def sample_patterns(N: int, p: int, seed: int) -> PatternSet:
    if N < 1 or p < 0:
        raise InvalidPointError(f"need N >= 1 and p >= 0, got N={N}, p={p}")
    _check_seed(seed)
    rng = np.random.default_rng(seed)
    patterns = rng.choice(np.array([-1, 1], dtype=np.int8), size=(p, N))
    labels = rng.choice(np.array([-1, 1], dtype=np.int8), size=p)
    return PatternSet(N=N, p=p, patterns=patterns, labels=labels)


def _sphere_rows(rng: np.random.Generator, count: int, N: int) -> np.ndarray:
    """count isotropic vectors of norm √N."""
    g = rng.standard_normal((count, N))
    return g * (math.sqrt(N) / np.linalg.norm(g, axis=1))[:, None]


def sample_sphere_weight(N: int, seed: int) -> WeightVector:
    if N < 1:
        raise InvalidPointError(f"N must be >= 1, got {N}")
    _check_seed(seed)
    rng = np.random.default_rng(seed)
    return WeightVector.of(_sphere_rows(rng, 1, N)[0])


def _satisfied(W: np.ndarray, ps: PatternSet, lam: float) -> np.ndarray:
    """Per-pattern outcomes, shape (len(W), p)."""
    h = W @ ps.patterns.T.astype(float) / math.sqrt(ps.N)
    return ps.labels[None, :] * np.sin(lam * h) > 0.0


def satisfies_all(w: WeightVector, ps: PatternSet, lam: float) -> bool:
    if w.n != ps.N:
        raise InvalidPointError(f"weight length {w.n} does not match N={ps.N}")
    if ps.p == 0:
        return True
    h = ps.patterns.astype(float) @ w.w / w.norm
    return bool(np.all(ps.labels * np.sin(lam * h) > 0.0))


def _check_run(lam: float, samples: int, seed: int) -> None:
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidPointError(f"lambda must be > 0, got {lam}")
    if samples < 1:
        raise InvalidPointError(f"samples must be >= 1, got {samples}")
    _check_seed(seed)


def _block_sizes(samples: int) -> List[int]:
    full, rest = divmod(samples, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _first_failures(ps: PatternSet, lam: float, samples: int, seed: int, workers: int) -> np.ndarray:
    """Histogram h[j] = number of weight samples whose first violated pattern is j (j = p: none)."""

    def block(b: int, size: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
        W = _sphere_rows(rng, size, ps.N)
        ok = _satisfied(W, ps, lam)
        failed = ~ok
        first = np.where(failed.any(axis=1), failed.argmax(axis=1), ps.p)
        return np.bincount(first, minlength=ps.p + 1)

    sizes = _block_sizes(samples)
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, range(len(sizes)), sizes))
    else:
        parts = [block(b, size) for b, size in enumerate(sizes)]
    return np.sum(parts, axis=0)


def estimate_volume(
    ps: PatternSet, lam: float, samples: int, seed: int, workers: int = 1
) -> VolumeEstimate:
    _check_run(lam, samples, seed)
    if ps.p == 0:
        return VolumeEstimate.from_count(samples, samples, seed)
    hist = _first_failures(ps, lam, samples, seed, workers)
    return VolumeEstimate.from_count(int(hist[ps.p]), samples, seed)


# ---------- Capacity scan ----------

def _loads(N: int, alpha_grid: Sequence[float]) -> List[int]:
    return [int(math.floor(a * N + 0.5)) for a in alpha_grid]


def _trial_seeds(seed: int, trial: int) -> tuple:
    state = np.random.SeedSequence([seed, trial]).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def capacity_scan(
    N: int,
    lam: float,
    alpha_grid: Sequence[float],
    trials: int,
    samples: int,
    seed: int,
    workers: int = 1,
    progress: bool = False,
) -> List[ScanRow]:
    """Fraction of trials with at least one hit, per load α.

    Each trial draws p_max patterns once and one weight sample set; load α uses
    the first round(αN) patterns, so every trial's hit fraction is nonincreasing in α.
    """
    alphas = [float(a) for a in alpha_grid]
    if not alphas or any(not (math.isfinite(a) and a > 0) for a in alphas):
        raise InvalidPointError("alpha grid must be nonempty and positive")
    if trials < 1:
        raise InvalidPointError(f"trials must be >= 1, got {trials}")
    if N < 1:
        raise InvalidPointError(f"N must be >= 1, got {N}")
    _check_run(lam, samples, seed)
    loads = _loads(N, alphas)
    p_max = max(loads)

    def one_trial(t: int) -> np.ndarray:
        pattern_seed, weight_seed = _trial_seeds(seed, t)
        ps = sample_patterns(N, p_max, pattern_seed)
        hist = _first_failures(ps, lam, samples, weight_seed, 1)
        # survivors[p] = samples satisfying the first p patterns
        survivors = samples - np.concatenate(([0], np.cumsum(hist[:-1])))
        return survivors[loads] / samples

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(one_trial, range(trials)), total=trials, disable=not progress, desc="trials"))
    else:
        results = [one_trial(t) for t in tqdm(range(trials), disable=not progress, desc="trials")]
    fractions = np.array(results)

    rows = []
    for j, (alpha, p) in enumerate(zip(alphas, loads)):
        col = fractions[:, j]
        positive = col[col > 0]
        q25, q50, q75 = np.quantile(col, [0.25, 0.5, 0.75])
        rows.append(
            ScanRow(
                alpha=alpha,
                p=p,
                fraction_positive=float(positive.size / trials),
                mean_log_fraction=float(np.mean(np.log(positive))) if positive.size else None,
                q25=float(q25),
                q50=float(q50),
                q75=float(q75),
            )
        )
    logger.info(f"capacity scan N={N} lambda={lam}: crossing at alpha={crossing_alpha(rows)}")
    return rows


def crossing_alpha(rows: Sequence[ScanRow]) -> Optional[float]:
    """Linear interpolation of the α where fraction_positive falls through ½."""
    for a, b in zip(rows, rows[1:]):
        if a.fraction_positive >= 0.5 > b.fraction_positive:
            span = a.fraction_positive - b.fraction_positive
            return a.alpha + (a.fraction_positive - 0.5) / span * (b.alpha - a.alpha)
    return None


def parse_grid(text: str) -> List[float]:
    """'start:stop:step' (inclusive stop) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(s) for s in text.split(":"))
        if step <= 0 or stop < start:
            raise InvalidPointError(f"bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    values = [float(s) for s in text.split(",") if s.strip()]
    if not values:
        raise InvalidPointError(f"empty grid {text!r}")
    return values


def main() -> None:
    parser = argparse.ArgumentParser(description="Monte Carlo Gardner volume scan")
    parser.add_argument("--n", type=int, default=12)
    parser.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    parser.add_argument("--alphas", default="0.25:3:0.25")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--samples", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rows = capacity_scan(args.n, args.lam, parse_grid(args.alphas), args.trials, args.samples, args.seed, progress=True)
    print("=== Capacity Scan ===")
    for r in rows:
        print(f"alpha={r.alpha:6.3f} p={r.p:3d} fraction_positive={r.fraction_positive:.3f}")
    print(f"crossing alpha: {crossing_alpha(rows)}")


if __name__ == "__main__":
    main()
