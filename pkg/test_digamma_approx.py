"""
Tests for digamma_approx.py: the Lorentzian approximation Φ̃ in its digamma,
trigonometric and direct-sum forms, its large-λ expansion and the upper-bound study.

Run with:  pytest test_digamma_approx.py
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

import digamma_approx as da
import replica_core as rc
from errors import InvalidPointError
from replica_core import ReplicaPoint


def _grid(n, seed, lam=(0.5, 20.0), q=(0.5, 0.999)):
    rng = np.random.default_rng(seed)
    return [
        ReplicaPoint(lam=float(rng.uniform(*lam)), q=float(rng.uniform(*q)), omega=float(rng.uniform(-3, 3)))
        for _ in range(n)
    ]


def test_parts_are_conjugate_pairs():
    pt = ReplicaPoint(lam=3.0, q=0.8, omega=0.4)
    parts = da.phi_tilde_parts(pt)
    b = 3.0 * math.sqrt(2 * 0.2)
    c = 3.0 * math.sqrt(0.8) * 0.4
    assert parts.Z == pytest.approx(complex(c, -b) / (2 * math.pi))
    assert parts.W == pytest.approx(parts.Z.conjugate())
    assert parts.C2 == pytest.approx(parts.C1.conjugate())
    with pytest.raises(ValidationError):
        da.PhiTildeParts(Z=1 + 1j, W=1 + 1j, C1=1j, C2=-1j)


def test_digamma_assembly_matches_trig_form():
    for pt in _grid(150, seed=1):
        trig = da.phi_tilde_trig(pt)
        assert da.phi_tilde(pt) == pytest.approx(trig, rel=1e-9, abs=1e-9)


def test_branch_choice_of_square_root_is_immaterial():
    # the conjugate branch of √(2λ²(q-1)) swaps Z with W and C1 with C2
    for pt in _grid(20, seed=5):
        p = da.phi_tilde_parts(pt)
        direct = da._assemble(p.Z, p.W, p.C1, p.C2)
        swapped = da._assemble(p.W, p.Z, p.C2, p.C1)
        assert swapped == pytest.approx(direct, rel=1e-12, abs=1e-14)
        assert direct.real == pytest.approx(da.phi_tilde(pt), rel=1e-12, abs=1e-14)


def test_imaginary_residue_is_negligible():
    rng = np.random.default_rng(2)
    for _ in range(20):
        lam, q = float(rng.uniform(0.5, 20)), float(rng.uniform(0.5, 0.999))
        omega = rng.uniform(-3, 3, 15)
        value = da.phi_tilde_complex(lam, q, omega)
        assert np.all(np.abs(value.imag) <= 1e-10 * (1 + np.abs(value.real)))


def test_lorentzian_series_matches_closed_form():
    k_max = 100_000
    for pt in _grid(12, seed=3, lam=(0.5, 6.0), q=(0.5, 0.99)):
        trig = da.phi_tilde_trig(pt)
        tail = 10 * pt.lam / (math.sqrt(1 - pt.q) * k_max)
        assert abs(da.lorentzian_series(pt, k_max) - trig) <= tail + 1e-9 * (1 + abs(trig))


def test_phi_tilde_vanishes_at_zero_omega():
    for lam, q in [(1.0, 0.9), (6.0, 0.99), (15.0, 0.7)]:
        assert abs(da.phi_tilde_array(lam, q, 0.0)) <= 1e-10


def test_phi_tilde_vectorised():
    omega = np.linspace(-2, 2, 9)
    out = da.phi_tilde_array(2.0, 0.95, omega)
    assert out.shape == (9,)
    np.testing.assert_allclose(out, da.phi_tilde_trig_array(2.0, 0.95, omega), rtol=1e-9, atol=1e-9)


def test_domain_errors():
    with pytest.raises(InvalidPointError):
        da.phi_tilde_array(1.0, 0.0, 0.5)
    with pytest.raises(InvalidPointError):
        da.phi_tilde_trig_array(-1.0, 0.5, 0.5)


# ---------- Decay in λ ----------

def test_phi_tilde_small_at_large_lambda():
    for omega in np.linspace(-2, 2, 21):
        assert abs(da.phi_tilde(ReplicaPoint(lam=400.0, q=0.9, omega=float(omega)))) < 1e-2
        assert abs(da.phi_tilde(ReplicaPoint(lam=80.0, q=0.9, omega=float(omega)))) < 1e-6


def test_phi_tilde_decays_along_doubling_lambda():
    values = [abs(da.phi_tilde_trig(ReplicaPoint(lam=10.0 * 2**k, q=0.9, omega=0.5))) for k in range(6)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_asymptotic_form_approaches_exact_form():
    lams = [50.0, 100.0, 200.0, 400.0]
    pts = [ReplicaPoint(lam=lam, q=0.9, omega=0.3) for lam in lams]
    asym = [da.phi_tilde_asymptotic(pt) for pt in pts]
    gaps = [abs(a - da.phi_tilde(pt)) for a, pt in zip(asym, pts)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert all(abs(a) > abs(b) for a, b in zip(asym, asym[1:]))
    assert abs(asym[-1]) < 0.05


# ---------- Lorentzian vs Gaussian ----------

def test_gap_vanishes_at_centre_and_is_bounded():
    pt = ReplicaPoint(lam=1.0, q=0.5, omega=math.pi / math.sqrt(0.5))
    assert da.lorentzian_gaussian_gap(pt, 0) == pytest.approx(0.0, abs=1e-15)
    for p in _grid(50, seed=4):
        for k in range(-5, 6):
            assert 0.0 <= da.lorentzian_gaussian_gap(p, k) <= 0.21


def test_gap_small_near_q_one():
    pt = ReplicaPoint(lam=2.0, q=0.9999, omega=0.5)
    assert max(da.lorentzian_gaussian_gap(pt, k) for k in range(-10, 11)) < 1e-3


# ---------- Upper bound ----------

def test_upper_bound_at_reference_point():
    pt = ReplicaPoint(lam=6.0, q=0.99, omega=1.0)
    assert abs(da.phi_tilde(pt)) >= rc.phi_series(pt)


def test_upper_bound_scan_near_q_one():
    findings = da.upper_bound_scan([1.0, 2.0, 3.0], [0.99, 0.995, 0.999], np.linspace(-3, 3, 61))
    assert findings == []


def test_upper_bound_scan_reports_records():
    findings = da.upper_bound_scan([20.0], [0.9, 0.99], np.linspace(-3, 3, 31))
    for f in findings:
        assert set(f) == {"lambda", "q", "omega", "phi", "phi_tilde"}
        assert abs(f["phi_tilde"]) < f["phi"]
