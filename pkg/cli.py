"""
cli.py

Command-line front end for the oscillating-perceptron capacity library.

Subcommands:
  capacity        alpha_c(λ) curve                  -> lambda,alpha_c,dalpha_dlambda,k_used
  saddle          saddle-point overlap q* per (λ, α) -> lambda,alpha,q_star,G,residual,regime
  limitcheck      q -> 1 extrapolation vs closed forms
  mc              Monte Carlo capacity scan         -> alpha,p,fraction_positive,...
  verify-circuit  dense circuit vs closed-form output state
  approx          Lorentzian Φ̃ study               -> lambda,q,omega,phi,phi_tilde,phi_tilde_asym,bound_ok

Usage:
  python cli.py capacity --lmin 0 --lmax 10 --points 101 -o curve.csv
  python cli.py mc --n 16 --lambda 1e-6 --alphas 0.5:3.5:0.25 --trials 50 --samples 20000 --seed 7
  python cli.py limitcheck --lambdas 0.5,1,2,5 --reference nearest

Values come from (highest first) flags, the --config JSON file, OSCPERC_*
environment variables, built-in defaults. Exit codes: 0 ok, 2 usage,
3 I/O, 4 no saddle, 5 validation failure.

The seed is echoed in every output: as a `# seed=<n>` first line in CSV
files and as a `seed` field leading each record in JSON files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

import capacity
import digamma_approx
import gardner_mc
import quantum_sim
import replica_core
from errors import AmbiguousSaddleError, CapacityError, NoBracketError, ValidationFailure
from settings import configure_logging, default_output_dir, default_seed, default_tol, default_workers

logger = logging.getLogger(__name__)

COMMANDS = ("capacity", "saddle", "limitcheck", "mc", "verify-circuit", "approx")
CIRCUIT_TOL = 1e-12
UPPER_BOUND_Q = 0.99

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "saddle": {"lambdas": [1.0, 2.0], "alphas": [1.0, 1.5]},
    "limitcheck": {"lambdas": [0.5, 1.0, 2.0, 5.0]},
    "mc": {"alphas": gardner_mc.parse_grid("0.25:3:0.25")},
    "approx": {"lambdas": [1.0, 2.0, 3.0], "qs": [0.9, 0.99, 0.999], "omegas": gardner_mc.parse_grid("-3:3:0.1")},
}


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Literal["capacity", "saddle", "limitcheck", "mc", "verify-circuit", "approx"]
    output: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)
    tol: float = Field(default=1e-12, gt=0)
    verbose: int = Field(default=0, ge=0)
    progress: bool = False

    lmin: float = Field(default=0.0, ge=0)
    lmax: float = Field(default=10.0, ge=0)
    points: int = Field(default=101, ge=1)
    lambdas: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    alphas: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    q_list: List[float] = Field(default_factory=lambda: list(capacity.DEFAULT_Q_LIST), min_length=1)
    reference: Literal["closed-form", "nearest"] = "closed-form"

    n: int = Field(default=12, ge=1)
    lam: float = Field(default=1e-6, gt=0)
    trials: int = Field(default=20, ge=1)
    samples: int = Field(default=20000, ge=1)
    cases: int = Field(default=200, ge=1)
    qs: List[float] = Field(default_factory=lambda: [0.99], min_length=1)
    omegas: List[float] = Field(default_factory=lambda: [0.5], min_length=1)

    @model_validator(mode="after")
    def _ranges(self) -> "RunConfig":
        if self.lmax < self.lmin:
            raise ValueError(f"lmax ({self.lmax}) must be >= lmin ({self.lmin})")
        for name in ("lambdas", "alphas", "q_list", "qs", "omegas"):
            if not all(math.isfinite(v) for v in getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self

    def output_path(self) -> Path:
        if self.output is not None:
            return self.output
        stamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
        return default_output_dir() / f"{self.command}_{stamp}.{self.format}"


# ---------- Record files ----------

def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _parse_cell(text: str) -> Any:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def write_records(records: Sequence[Dict[str, Any]], path: Path, fmt: str, seed: int) -> Path:
    """CSV gets a `# seed=` first line; JSON records each carry a leading `seed` field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump([{"seed": seed, **rec} for rec in records], f, indent=2)
            f.write("\n")
        return path
    columns = list(records[0].keys()) if records else []
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# seed={seed}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_format_cell(rec[c]) for c in columns])
    return path


def read_csv_records(path: Path) -> Tuple[Optional[int], List[Dict[str, Any]]]:
    """Inverse of write_records for CSV: (seed, records)."""
    with open(path, "r", newline="", encoding="utf-8") as f:
        lines = f.read().splitlines()
    seed = None
    if lines and lines[0].startswith("# seed="):
        seed = int(lines[0][len("# seed="):])
        lines = lines[1:]
    rows = list(csv.reader(lines))
    if not rows:
        return seed, []
    header = rows[0]
    return seed, [{k: _parse_cell(v) for k, v in zip(header, row)} for row in rows[1:]]


def read_json_records(path: Path) -> Tuple[Optional[int], List[Dict[str, Any]]]:
    """Inverse of write_records for JSON: (seed, records without the seed field)."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    seeds = {rec.pop("seed", None) for rec in data}
    if len(seeds) > 1:
        raise ValueError(f"{path}: records carry more than one seed")
    return (seeds.pop() if seeds else None), data


# ---------- Subcommands ----------

def cmd_capacity(cfg: RunConfig) -> Tuple[int, List[Dict[str, Any]]]:
    grid = np.linspace(cfg.lmin, cfg.lmax, cfg.points) if cfg.points > 1 else np.array([cfg.lmin])
    curve = capacity.capacity_curve(grid.tolist(), tol=cfg.tol, workers=cfg.workers)
    print("=== Capacity Curve ===")
    print(f"lambda in [{cfg.lmin}, {cfg.lmax}], {cfg.points} points")
    print(f"alpha_c range: [{min(curve.alpha_c):.10g}, {max(curve.alpha_c):.10g}]")
    return 0, curve.records()


def cmd_saddle(cfg: RunConfig) -> Tuple[int, List[Dict[str, Any]]]:
    rows = []
    code = 0
    print("=== Saddle Point ===")
    for lam in cfg.lambdas:
        for alpha in cfg.alphas:
            row: Dict[str, Any] = {"lambda": lam, "alpha": alpha, "q_star": None, "G": None, "residual": None, "regime": "ok"}
            try:
                q = replica_core.saddle_q(lam, alpha)
            except NoBracketError as e:
                logger.warning(str(e))
                row["regime"] = e.regime
                code = e.exit_code
            except AmbiguousSaddleError as e:
                logger.warning(str(e))
                row["regime"] = "ambiguous"
                code = e.exit_code
            else:
                row["q_star"] = q
                row["G"] = replica_core.free_energy_G(lam, alpha, q)
                row["residual"] = replica_core.alpha_of_q(lam, q) - alpha
            print(f"lambda={lam:<8g} alpha={alpha:<8g} q*={row['q_star']} ({row['regime']})")
            rows.append(row)
    return code, rows


def _limit_gate(lam: float) -> float:
    return 0.02 if lam <= 2.0 else 0.05


def cmd_limitcheck(cfg: RunConfig) -> Tuple[int, List[Dict[str, Any]]]:
    rows = []
    failures = []
    print("=== q -> 1 Limit Check ===")
    print(f"reference: {cfg.reference}, q list: {cfg.q_list}")
    for lam in cfg.lambdas:
        check = capacity.alpha_q_limit_check(lam, cfg.q_list, tol=cfg.tol)
        gap = check.rel_gap if cfg.reference == "closed-form" else check.nearest_gap
        gate = _limit_gate(lam)
        row = {
            "lambda": lam,
            "extrapolated": check.extrapolated,
            "closed_form": check.closed_form,
            "rel_gap": check.rel_gap,
            "nearest_form": check.nearest_form,
            "nearest_gap": check.nearest_gap,
            "gate": gate,
            "passed": gap <= gate,
        }
        if not row["passed"]:
            logger.warning(f"limit check gate missed at lambda={lam}: gap {gap:.3%} > {gate:.0%} ({cfg.reference})")
            failures.append(row)
        print(
            f"lambda={lam:<6g} extrapolated={check.extrapolated:.8g} closed={check.closed_form:.8g} "
            f"nearest={check.nearest_form:.8g} gap={gap:.3%} {'ok' if row['passed'] else 'FAIL'}"
        )
        rows.append(row)
    return (ValidationFailure.exit_code if failures else 0), rows


def cmd_mc(cfg: RunConfig) -> Tuple[int, List[Dict[str, Any]]]:
    scan = gardner_mc.capacity_scan(
        cfg.n, cfg.lam, cfg.alphas, cfg.trials, cfg.samples, cfg.seed, workers=cfg.workers, progress=cfg.progress
    )
    print("=== Monte Carlo Capacity Scan ===")
    print(f"N={cfg.n} lambda={cfg.lam} trials={cfg.trials} samples={cfg.samples} seed={cfg.seed}")
    print(f"crossing alpha: {gardner_mc.crossing_alpha(scan)}")
    return 0, [row.model_dump() for row in scan]


def cmd_verify_circuit(cfg: RunConfig) -> Tuple[int, List[Dict[str, Any]]]:
    check = quantum_sim.circuit_equivalence_suite(cfg.n, cfg.cases, cfg.seed)
    worst = max(check.max_gap, check.sigma_x_residual, check.sigma_z_residual)
    print("=== Circuit Verification ===")
    print(f"N={check.n} cases={check.cases} seed={check.seed}")
    print(f"max entrywise gap {check.max_gap:.3e}, <sigma_x> residual {check.sigma_x_residual:.3e}")
    code = 0 if worst <= CIRCUIT_TOL else ValidationFailure.exit_code
    return code, [check.model_dump()]


def cmd_approx(cfg: RunConfig) -> Tuple[int, List[Dict[str, Any]]]:
    rows = []
    failures = 0
    omegas = np.asarray(cfg.omegas, dtype=float)
    for lam in cfg.lambdas:
        for q in cfg.qs:
            exact = np.atleast_1d(replica_core.phi_series_array(lam, q, omegas))
            approx = np.atleast_1d(digamma_approx.phi_tilde_array(lam, q, omegas))
            for omega, p, pt in zip(omegas, exact, approx):
                point = replica_core.ReplicaPoint(lam=lam, q=q, omega=float(omega))
                ok = bool(abs(pt) >= p - digamma_approx.BOUND_TOL)
                if not ok and q >= UPPER_BOUND_Q:
                    failures += 1
                rows.append(
                    {
                        "lambda": lam,
                        "q": q,
                        "omega": float(omega),
                        "phi": float(p),
                        "phi_tilde": float(pt),
                        "phi_tilde_asym": digamma_approx.phi_tilde_asymptotic(point),
                        "bound_ok": ok,
                    }
                )
    print("=== Lorentzian Approximation ===")
    print(f"{len(rows)} points, {sum(not r['bound_ok'] for r in rows)} bound violations "
          f"({failures} with q >= {UPPER_BOUND_Q})")
    return (ValidationFailure.exit_code if failures else 0), rows


HANDLERS = {
    "capacity": cmd_capacity,
    "saddle": cmd_saddle,
    "limitcheck": cmd_limitcheck,
    "mc": cmd_mc,
    "verify-circuit": cmd_verify_circuit,
    "approx": cmd_approx,
}


# ---------- Argument parsing ----------

def _grid(text: str) -> List[float]:
    return gardner_mc.parse_grid(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", type=Path, default=None, help="Output file (default: tests/output/<command>_<utc>.<format>)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--seed", type=int, default=None, help="CLI > config > env:OSCPERC_SEED > 0")
    common.add_argument("--workers", type=int, default=None, help="CLI > config > env:OSCPERC_WORKERS > 1")
    common.add_argument("--tol", type=float, default=None, help="CLI > config > env:OSCPERC_TOL > 1e-12")
    common.add_argument("--config", type=Path, default=None, help="JSON file with RunConfig fields")
    common.add_argument("-v", "--verbose", action="count", default=None)

    ap = argparse.ArgumentParser(description="Storage capacity of the oscillating perceptron")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common], help="alpha_c(lambda) curve")
    p.add_argument("--lmin", type=float, default=None)
    p.add_argument("--lmax", type=float, default=None)
    p.add_argument("--points", type=int, default=None)

    p = sub.add_parser("saddle", parents=[common], help="saddle-point overlap")
    p.add_argument("--lambda", dest="lambdas", type=_grid, default=None)
    p.add_argument("--alpha", dest="alphas", type=_grid, default=None)

    p = sub.add_parser("limitcheck", parents=[common], help="q -> 1 consistency")
    p.add_argument("--lambdas", type=_grid, default=None)
    p.add_argument("--q-list", dest="q_list", type=_grid, default=None)
    p.add_argument("--reference", choices=["closed-form", "nearest"], default=None)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo capacity scan")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--alphas", type=_grid, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--progress", action="store_true", default=None)

    p = sub.add_parser("verify-circuit", parents=[common], help="dense circuit oracle")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--cases", type=int, default=None)

    p = sub.add_parser("approx", parents=[common], help="Lorentzian approximation study")
    p.add_argument("--lambdas", type=_grid, default=None)
    p.add_argument("--qs", type=_grid, default=None)
    p.add_argument("--omegas", type=_grid, default=None)
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge built-in/env defaults, command defaults, --config JSON and flags."""
    merged: Dict[str, Any] = {
        "seed": default_seed(),
        "workers": default_workers(),
        "tol": default_tol(),
    }
    merged.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as f:
            from_file = json.load(f)
        if not isinstance(from_file, dict):
            raise ValueError(f"{args.config}: expected a JSON object")
        from_file.pop("command", None)
        merged.update(from_file)
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    merged.update(flags)
    return RunConfig(**merged)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = resolve_config(args)
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return 2
    configure_logging(cfg.verbose)

    try:
        code, records = HANDLERS[cfg.command](cfg)
        path = write_records(records, cfg.output_path(), cfg.format, cfg.seed)
    except CapacityError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return 3
    print(f"Wrote {cfg.format.upper()} to: {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
