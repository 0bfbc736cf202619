"""One-parameter families: metric velocities, orbit integrals, and the
variational Jacobi system."""

import math

import numpy as np
import pytest

from magflow import deform, operators, orbits
from magflow.deform import (
    beta,
    beta_from_tensor,
    conformal_torus_family,
    first_order_system_residual,
    jacobi_residual,
    kappa_family,
    length_function,
    livsic_integral_check,
    translation_family,
    variational_field,
)
from magflow.surfaces import ConformalTorusMetric, MagneticSystem, TrigField


# -- beta --------------------------------------------------------------------

def test_conformal_family_beta_is_twice_phi():
    phi = TrigField.from_cos({(1, 0): 0.3}) + TrigField.from_sin({(0, 2): 0.1})
    fam = conformal_torus_family(ConformalTorusMetric(TrigField.zero()), phi,
                                 kappa=TrigField.zero())
    bt = beta(fam, n=32)
    assert bt.mode_numbers() == [0]
    xs = np.array([0.1, 1.2, 3.0])
    ys = np.array([0.5, 2.2, 4.1])
    got = np.real(bt.function.evaluate(xs, ys, np.zeros(3)))
    assert np.allclose(got, 2.0 * phi.value(xs, ys), atol=1e-12)


def test_fixed_metric_family_beta_vanishes(flat_torus_kappa):
    fam = kappa_family(flat_torus_kappa, TrigField.constant(1.0))
    bt = beta(fam, n=16)
    assert bt.mode_numbers() in ([], [0])
    xs = np.linspace(0.0, 6.0, 7)
    assert np.allclose(np.abs(bt.function.evaluate(xs, xs, xs)), 0.0)


def test_numeric_beta_matches_conformal_closed_form():
    phi = TrigField.from_cos({(1, 1): 0.2})
    metric = ConformalTorusMetric(TrigField.zero())
    # strip the exact formula so beta() is forced onto the finite
    # difference of the conformal factors
    fam = conformal_torus_family(metric, phi, kappa=TrigField.zero())
    fam_fd = deform.DeformationFamily(fam.evaluate, eps=fam.eps)
    bt = beta(fam_fd, n=32)
    xs = np.linspace(0.0, 6.0, 13)
    got = np.real(bt.function.evaluate(xs, 0.3 * xs, np.zeros_like(xs)))
    assert np.allclose(got, 2.0 * phi.value(xs, 0.3 * xs), atol=1e-6)


def test_beta_from_tensor_modes_and_pairing():
    metric = ConformalTorusMetric(TrigField.zero())
    E = TrigField.from_cos({(1, 0): 0.4})
    F = TrigField.from_sin({(0, 1): 0.2})
    G = TrigField.from_cos({(1, 1): 0.3})
    bt = beta_from_tensor(metric, E, F, G, n=32)
    assert set(bt.mode_numbers()) <= {-2, 0, 2}
    assert 2 in bt.mode_numbers() and -2 in bt.mode_numbers()
    modes = bt.modes
    assert np.allclose(modes[-2], np.conj(modes[2]), atol=1e-12)
    assert bt.mode_leak < 1e-8
    # pointwise oracle: restriction of the symmetric tensor to (cos, sin)
    xs = np.array([0.3, 2.0])
    ys = np.array([1.1, 4.2])
    ths = np.array([0.7, 2.5])
    got = np.real(bt.function.evaluate(xs, ys, ths))
    want = (E.value(xs, ys) * np.cos(ths) ** 2
            + 2.0 * F.value(xs, ys) * np.cos(ths) * np.sin(ths)
            + G.value(xs, ys) * np.sin(ths) ** 2)
    assert np.allclose(got, want, atol=1e-10)


def test_diagonal_tensor_reproduces_conformal_case():
    metric = ConformalTorusMetric(TrigField.zero())
    phi = TrigField.from_cos({(1, 0): 0.25})
    two_phi = phi * 2.0
    bt = beta_from_tensor(metric, two_phi, TrigField.zero(), two_phi, n=32)
    # the theta-dependent part is carried by (E - G)/2 and F, both zero
    # here, so the stored +-2 coefficients vanish identically
    live = [m for m, arr in bt.modes.items() if np.max(np.abs(arr)) > 1e-12]
    assert live == [0]


# -- isospectral pullback families -------------------------------------------

def test_translation_family_is_isospectral(flat_torus_kappa):
    fam = translation_family(flat_torus_kappa, (0.7, 0.4), eps=0.5)
    lf = length_function(fam, (1, 0), [-0.4, -0.2, 0.0, 0.2, 0.4])
    ell0 = lf[0.0]
    assert max(abs(v - ell0) for v in lf.values()) / ell0 < 1e-8


def test_livsic_integral_vanishes_on_isometry_family(flat_torus_kappa):
    fam = translation_family(flat_torus_kappa, (0.7, 0.4), eps=0.5)
    orbit = orbits.find_periodic_orbit(flat_torus_kappa, (1, 0))
    rep = livsic_integral_check(fam, orbit, s_grid=[-0.3, 0.0, 0.3])
    assert rep.detail["isospectral"]
    assert rep.passed
    assert abs(rep.residual) <= 1e-8 * orbit.period


def test_livsic_check_is_vacuous_off_isospectral_families():
    # a conformal stretch changes lengths, so no vanishing is demanded
    phi = TrigField.constant(1.0)
    metric = ConformalTorusMetric(TrigField.zero())
    fam = conformal_torus_family(metric, phi, kappa=TrigField.zero(), eps=0.2)
    system = fam.base
    orbit = orbits.find_periodic_orbit(system, (1, 0))
    rep = livsic_integral_check(fam, orbit, s_grid=[-0.1, 0.0, 0.1])
    assert not rep.detail["isospectral"]
    assert rep.passed  # vacuous: nothing is claimed, only reported
    assert abs(rep.residual - 2.0 * orbit.period / orbit.period * orbit.period
               ) >= 0.0  # integral of beta = 2 phi = 2 over the orbit
    assert rep.residual == pytest.approx(2.0 * orbit.period, rel=1e-6)


# -- variational fields (fixed metric) ---------------------------------------

@pytest.fixture(scope="module")
def bolza_kappa_family():
    octagon = __import__("magflow.surfaces", fromlist=["x"]
                         ).HyperbolicOctagonSurface()
    system = MagneticSystem(octagon, 0.6)
    return kappa_family(system, 1.0, eps=0.05), system


def test_constant_perturbation_closed_form(bolza_kappa_family):
    # constant kappa, constant f0: the periodic solution of
    # y'' + Kmag y = f0 is the constant y = f0 / Kmag
    fam, system = bolza_kappa_family
    orbit = orbits.find_periodic_orbit(system, (1,))
    field = variational_field(fam, orbit, h_s=1e-3)
    kmag = 0.6 ** 2 - 1.0  # constant curvature -1 plus kappa^2
    assert np.max(np.abs(field.y - 1.0 / kmag)) < 1e-5
    assert np.max(np.abs(kmag * field.y - field.f0)) < 1e-5


def test_jacobi_residual_second_order_decay(bolza_kappa_family):
    fam, system = bolza_kappa_family
    orbit = orbits.find_periodic_orbit(system, (1,))
    r1 = jacobi_residual(system, orbit,
                         variational_field(fam, orbit, h_s=1e-3))
    r2 = jacobi_residual(system, orbit,
                         variational_field(fam, orbit, h_s=5e-4))
    assert r1.passed and r1.residual <= 1e-4
    # halving the step shrinks the residual about fourfold
    assert r2.residual < 0.4 * r1.residual


def test_length_law_under_constant_kappa_growth(bolza_kappa_family):
    fam, system = bolza_kappa_family
    base = orbits.find_periodic_orbit(MagneticSystem(system.metric, 0.0), (1,))
    lf = length_function(fam, (1,), [-0.04, 0.0, 0.04])
    for s, ell in lf.items():
        want = base.period / math.sqrt(1.0 - (0.6 + s) ** 2)
        assert abs(ell - want) / want < 1e-8


# -- first-order reformulation -----------------------------------------------

def test_first_order_system_exact_on_manufactured_data(bolza_kappa_family):
    fam, system = bolza_kappa_family
    # manufacture f0 from a chosen y so the equation holds identically
    y = operators.constant(system, 1.0)
    km = operators.magnetic_curvature_function(system)
    f0 = km.mul(y)
    rep = first_order_system_residual(system, y, f0)
    assert rep.passed
    assert rep.rel_residual < 1e-10


def test_first_order_system_monodromy_certificate(bolza_kappa_family):
    fam, system = bolza_kappa_family
    orbit = orbits.find_periodic_orbit(system, (1,))
    y = operators.constant(system, 1.0)
    km = operators.magnetic_curvature_function(system)
    rep = first_order_system_residual(system, y, km.mul(y), orbit=orbit)
    assert rep.detail["unique_periodic_solution"]
    assert rep.detail["eigenvalue_one_gap"] > 1e-6
    assert rep.passed
