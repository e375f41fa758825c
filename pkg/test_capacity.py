"""
Tests for capacity.py: closed-form capacities, the capacity curve and the
q -> 1 limit check.

Run with:  pytest test_capacity.py
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

import capacity as cap
from errors import InvalidPointError
from specfun import gauss_pdf


# ---------- Classical perceptron ----------

def test_classical_capacity_at_zero_margin():
    assert cap.classical_alpha_c(0.0) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0, 2.0])
def test_classical_capacity_matches_quadrature(kappa):
    assert cap.classical_alpha_c(kappa) == pytest.approx(cap.classical_alpha_c_quadrature(kappa), rel=1e-9)


def test_classical_capacity_decreases_with_margin():
    values = [cap.classical_alpha_c(k) for k in (0.0, 0.25, 0.5, 1.0)]
    assert all(a > b for a, b in zip(values, values[1:]))
    with pytest.raises(InvalidPointError):
        cap.classical_alpha_c(-0.1)


# ---------- Oscillating perceptron ----------

def test_alpha_c_classical_limit():
    assert cap.alpha_c(0.0) == 2.0
    assert cap.alpha_c(1e-3) == pytest.approx(2.0, abs=1e-9)
    value, k_used = cap.capacity_denominator(1e-3)
    assert value == pytest.approx(0.5, abs=1e-12)
    assert k_used >= 1


def test_alpha_c_lower_bound_on_log_grid():
    for lam in np.logspace(-3, 3, 200):
        assert cap.alpha_c(float(lam)) >= 2.0 - 1e-9


def test_alpha_c_flat_region():
    curve = cap.capacity_curve(np.linspace(0.1, 1.6, 16).tolist())
    assert all(abs(d) < 0.1 for d in curve.dalpha_dlambda)
    assert all(abs(a - 2.0) < 0.05 for a in curve.alpha_c)


def test_alpha_c_flat_at_origin():
    curve = cap.capacity_curve([0.0, 0.05, 0.1, 0.15, 0.2])
    assert all(abs(d) < 1e-9 for d in curve.dalpha_dlambda)
    assert all(a == pytest.approx(2.0, abs=1e-12) for a in curve.alpha_c)


def test_alpha_c_grows_beyond_two():
    grid = np.linspace(2.0, 10.0, 17).tolist()
    curve = cap.capacity_curve(grid, workers=3)
    assert all(a < b for a, b in zip(curve.alpha_c, curve.alpha_c[1:]))
    a5 = curve.alpha_c[grid.index(5.0)]
    assert curve.alpha_c[-1] > a5 > 2.2


def test_alpha_c_known_values():
    assert cap.alpha_c(1.0) == pytest.approx(2.0, abs=5e-3)
    assert cap.alpha_c(5.0) == pytest.approx(5.13, abs=0.05)


def test_capacity_denominator_tolerance_controls_terms():
    loose_value, loose_k = cap.capacity_denominator(50.0, tol=1e-6)
    tight_value, tight_k = cap.capacity_denominator(50.0, tol=1e-14)
    assert loose_k <= tight_k
    assert loose_value == pytest.approx(tight_value, rel=1e-4)
    with pytest.raises(InvalidPointError):
        cap.capacity_denominator(1.0, tol=0.0)


def test_capacity_denominator_matches_quadrature():
    period = 2 * math.pi / 5.0
    pieces = [
        integrate.quad(lambda w, k=k: w * w * gauss_pdf(w + k * period), 0.0, period, epsabs=1e-15, epsrel=1e-13)[0]
        for k in range(int(12.0 / period) + 1)
    ]
    value, _ = cap.capacity_denominator(5.0)
    assert value == pytest.approx(math.fsum(pieces), rel=1e-10)


def test_capacity_curve_workers_do_not_change_values():
    grid = [0.0, 0.5, 3.0, 7.0]
    serial = cap.capacity_curve(grid)
    threaded = cap.capacity_curve(grid, workers=4)
    assert serial == threaded
    assert serial.alpha_c[0] == 2.0
    assert serial.records()[2]["lambda"] == 3.0


@pytest.mark.parametrize("grid", [[], [1.0, 1.0], [2.0, 1.0], [-1.0, 1.0]])
def test_capacity_curve_rejects_bad_grids(grid):
    with pytest.raises(InvalidPointError):
        cap.capacity_curve(grid)


def test_capacity_curve_model_checks_columns():
    with pytest.raises(ValidationError):
        cap.CapacityCurve(lambdas=[1.0, 2.0], alpha_c=[2.0], dalpha_dlambda=[0.0, 0.0], truncation_k=[1, 1])


# ---------- Nearest-feasible form ----------

def test_nearest_form_classical_limit():
    assert cap.alpha_c_nearest(0.0) == 2.0
    assert cap.alpha_c_nearest(1e-3) == pytest.approx(2.0, abs=1e-9)


def test_nearest_form_close_to_closed_form_at_small_lambda():
    assert cap.alpha_c_nearest(0.5) == pytest.approx(cap.alpha_c(0.5), rel=0.01)


@pytest.mark.parametrize("lam", [1.0, 2.0, 5.0])
def test_nearest_form_exceeds_closed_form(lam):
    assert cap.alpha_c_nearest(lam) > cap.alpha_c(lam) >= 2.0 - 1e-9


# ---------- q -> 1 limit ----------

def test_extrapolate_to_zero_exact_for_quadratics():
    h = [0.1, 0.01, 0.001]
    values = [3.0 + 2.0 * x + 5.0 * x * x for x in h]
    assert cap.extrapolate_to_zero(h, values) == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("lam", [0.01, 0.5])
def test_limit_check_matches_closed_form_at_small_lambda(lam):
    check = cap.alpha_q_limit_check(lam)
    assert check.rel_gap <= 0.02
    assert len(check.alpha_values) == 3


def test_limit_check_classical_value():
    check = cap.alpha_q_limit_check(0.01)
    assert check.extrapolated == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_limit_check_matches_nearest_form(lam):
    check = cap.alpha_q_limit_check(lam)
    assert check.nearest_gap <= 0.05
    assert check.nearest_form == pytest.approx(cap.alpha_c_nearest(lam))


def test_limit_check_large_lambda_follows_nearest_form():
    check = cap.alpha_q_limit_check(5.0)
    assert check.nearest_gap <= 0.01
    assert check.extrapolated > 5 * cap.alpha_c(5.0)


def test_limit_check_rejects_bad_q_list():
    with pytest.raises(InvalidPointError):
        cap.alpha_q_limit_check(1.0, q_list=[0.999, 0.99])
    with pytest.raises(InvalidPointError):
        cap.alpha_q_limit_check(1.0, q_list=[])
