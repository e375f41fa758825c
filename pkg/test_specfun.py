"""
Tests for specfun.py: Gaussian masses, log masses, digamma and sphere normalisation.

Run with:  pytest test_specfun.py
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import special

from errors import InvalidPointError, PoleError
from specfun import (
    EULER_GAMMA,
    GaussInterval,
    digamma,
    erf,
    erfc,
    gauss_mass,
    gauss_masses,
    gauss_pdf,
    log_gauss_masses,
    log_sphere_surface,
)


# ---------- Gaussian measure ----------

def test_gauss_mass_known_values():
    assert gauss_mass(GaussInterval(lo=-math.inf, hi=0.0)) == pytest.approx(0.5, abs=1e-15)
    assert gauss_mass(GaussInterval(lo=-1.0, hi=1.0)) == pytest.approx(math.erf(1 / math.sqrt(2)), rel=1e-14)
    assert gauss_mass(GaussInterval(lo=-math.inf, hi=math.inf)) == pytest.approx(1.0, abs=1e-15)
    assert gauss_mass(GaussInterval(lo=2.0, hi=2.0)) == 0.0


def test_gauss_masses_far_tail_keeps_precision():
    expected = 0.5 * (special.erfc(10 / math.sqrt(2)) - special.erfc(11 / math.sqrt(2)))
    assert gauss_masses(10.0, 11.0) == pytest.approx(expected, rel=1e-12)
    assert gauss_masses(-11.0, -10.0) == pytest.approx(expected, rel=1e-12)
    assert gauss_masses(10.0, 11.0) > 0.0


def test_gauss_masses_vectorised():
    lo = np.array([-1.0, 0.0, 3.0])
    hi = np.array([1.0, np.inf, 4.0])
    out = gauss_masses(lo, hi)
    assert out.shape == (3,)
    assert out[1] == pytest.approx(0.5)
    assert np.all(out >= 0)


def test_gauss_mass_is_additive():
    rng = np.random.default_rng(3)
    a, b, c = np.sort(rng.uniform(-6.0, 6.0, (3, 500)), axis=0)
    np.testing.assert_allclose(gauss_masses(a, c), gauss_masses(a, b) + gauss_masses(b, c), rtol=0, atol=2e-15)
    assert gauss_mass(GaussInterval(lo=-1.0, hi=2.0)) == pytest.approx(
        gauss_mass(GaussInterval(lo=-1.0, hi=0.5)) + gauss_mass(GaussInterval(lo=0.5, hi=2.0)), rel=0, abs=1e-15
    )


def test_gauss_interval_rejects_reversed_and_nan():
    with pytest.raises(ValidationError):
        GaussInterval(lo=1.0, hi=0.0)
    with pytest.raises(ValidationError):
        GaussInterval(lo=math.nan, hi=0.0)


def test_log_gauss_masses_matches_log_in_normal_range():
    for lo, hi in [(0.5, 2.0), (-3.0, -1.0), (-0.5, 0.7)]:
        assert log_gauss_masses(lo, hi) == pytest.approx(math.log(gauss_masses(lo, hi)), rel=1e-13)


def test_log_gauss_masses_deep_tail():
    value = log_gauss_masses(40.0, 41.0)
    assert math.isfinite(value)
    # ln(φ(40)/40) is the leading asymptotic term
    assert value == pytest.approx(-800.0 - 0.5 * math.log(2 * math.pi) - math.log(40.0), abs=1e-2)
    assert log_gauss_masses(-41.0, -40.0) == pytest.approx(value, rel=1e-14)
    assert log_gauss_masses(1.0, 1.0) == -math.inf


def test_gauss_pdf_peak():
    assert gauss_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)


def test_erf_rejects_nan():
    assert erf(0.5) == pytest.approx(math.erf(0.5), rel=1e-15)
    assert erfc(0.5) == pytest.approx(math.erfc(0.5), rel=1e-15)
    with pytest.raises(InvalidPointError):
        erf(math.nan)
    with pytest.raises(InvalidPointError):
        erfc(np.array([0.0, math.nan]))


# ---------- Digamma ----------

def test_digamma_real_special_values():
    assert digamma(1.0).real == pytest.approx(-EULER_GAMMA, abs=1e-14)
    assert digamma(0.5).real == pytest.approx(-EULER_GAMMA - 2 * math.log(2), abs=1e-14)
    assert isinstance(digamma(1.0), complex)


def test_digamma_matches_scipy_off_the_poles():
    rng = np.random.default_rng(3)
    z = rng.uniform(-5.3, 5.3, 200) + 1j * rng.choice([-1, 1], 200) * rng.uniform(0.1, 30.0, 200)
    ours = digamma(z)
    ref = special.psi(z)
    np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-12 * (1 + np.max(np.abs(ref))))


def test_digamma_recurrence_and_reflection():
    for z in [0.3 + 0.2j, -2.7 + 1.1j, 4.2 - 3.3j, 0.1 + 50j]:
        assert digamma(z + 1) == pytest.approx(digamma(z) + 1 / z, abs=1e-12)
        assert digamma(1 - z) - digamma(z) == pytest.approx(math.pi / np.tan(math.pi * z), abs=1e-11)


def test_digamma_conjugate_symmetry():
    z = np.array([0.2 - 3.0j, -1.5 + 0.4j, 7.0 + 2.0j])
    np.testing.assert_allclose(digamma(z.conj()), digamma(z).conj(), atol=1e-14)


@pytest.mark.parametrize("pole", [0.0, -1.0, -3.0])
def test_digamma_poles(pole):
    with pytest.raises(PoleError):
        digamma(pole)


# ---------- Sphere normalisation ----------

def test_log_sphere_surface_low_dimensions():
    # circle of radius √2, sphere of radius √3
    assert log_sphere_surface(2) == pytest.approx(math.log(2 * math.pi * math.sqrt(2)), rel=1e-14)
    assert log_sphere_surface(3) == pytest.approx(math.log(12 * math.pi), rel=1e-14)


def test_log_sphere_surface_two_points_at_n_one():
    assert log_sphere_surface(1) == pytest.approx(math.log(2.0), abs=1e-15)


def test_log_sphere_surface_matches_recurrence():
    # unit-sphere areas obey A_{N+2} = 2π A_N / N
    log_area = math.log(2 * math.pi)
    for n in range(2, 100, 2):
        log_area += math.log(2 * math.pi / n)
    expected = log_area + 0.5 * 99 * math.log(100)
    assert log_sphere_surface(100) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("bad", [0, -2, 2.5, True])
def test_log_sphere_surface_rejects_bad_dimension(bad):
    with pytest.raises(InvalidPointError):
        log_sphere_surface(bad)
