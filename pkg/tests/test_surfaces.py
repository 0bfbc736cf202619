import math

import numpy as np
import pytest

from magflow.surfaces import (
    BOLZA_SYSTOLE,
    BumpField,
    ConformalTorusMetric,
    MagneticSystem,
    NegativityRefusal,
    TrigField,
    hyperbolic_distance,
    negativity_bounds,
)


def test_trig_field_matches_direct_sum():
    f = TrigField.from_cos({(2, 1): 0.7}) + TrigField.from_sin({(1, 0): -0.4})
    x, y = 0.3, 1.1
    assert f.value(x, y) == pytest.approx(
        0.7 * math.cos(2 * x + y) - 0.4 * math.sin(x), abs=1e-14)
    assert f.dx(x, y) == pytest.approx(
        -1.4 * math.sin(2 * x + y) - 0.4 * math.cos(x), abs=1e-14)
    assert f.dy(x, y) == pytest.approx(-0.7 * math.sin(2 * x + y), abs=1e-14)


def test_trig_field_is_real_after_symmetrization():
    f = TrigField({(1, 0): 0.3 + 0.2j})
    g = np.linspace(0, 2 * np.pi, 7)
    assert np.all(np.isreal(f.value(g, g)))


def test_trig_shift_is_translation_pullback():
    f = TrigField.from_cos({(1, 2): 0.5})
    sx, sy = 0.4, -0.9
    assert f.shift(sx, sy).value(0.2, 0.7) == pytest.approx(
        f.value(0.2 + sx, 0.7 + sy), abs=1e-14)


def test_flat_metric_has_zero_curvature():
    m = ConformalTorusMetric(TrigField.zero())
    assert m.is_flat
    assert float(m.gaussian_curvature(0.3, 0.4)) == 0.0


def test_conformal_curvature_against_finite_differences():
    lam = TrigField.from_cos({(1, 0): 0.1, (1, 1): 0.05})
    m = ConformalTorusMetric(lam)
    x, y, h = 0.7, 1.3, 1e-4
    lap = (lam.value(x + h, y) + lam.value(x - h, y) + lam.value(x, y + h)
           + lam.value(x, y - h) - 4 * lam.value(x, y)) / h**2
    expect = -math.exp(-2 * lam.value(x, y)) * lap
    assert float(m.gaussian_curvature(x, y)) == pytest.approx(expect, rel=1e-4)


def test_octagon_relation_word_is_identity(octagon):
    word = []
    for gen, sgn in octagon.RELATION:
        word.append(sgn * (gen + 1))
    M = octagon.word_matrix(tuple(word))
    assert np.allclose(M / M[0, 0], np.eye(2), atol=1e-12)


def test_octagon_generator_trace_gives_systole(octagon):
    M = octagon.word_matrix((1,))
    tr = abs(np.trace(M).real)
    assert 2 * math.acosh(tr / 2) == pytest.approx(BOLZA_SYSTOLE, abs=1e-12)


def test_reduce_to_domain_is_idempotent(octagon):
    z = 0.61 + 0.47j
    z1 = octagon.reduce_to_domain(z)
    assert octagon.reduce_to_domain(z1) == pytest.approx(z1, abs=1e-12)
    assert abs(z1) <= abs(z) + 1e-12


def test_hyperbolic_distance_on_diameter():
    # d(0, r) = 2 artanh(r) = log((1+r)/(1-r)) along a diameter
    r = 0.5
    assert float(hyperbolic_distance(0.0, r)) == pytest.approx(
        math.log((1 + r) / (1 - r)), abs=1e-12)


def test_bump_field_is_deck_invariant_after_reduction(octagon):
    # far-out lifts are evaluated through the domain representative;
    # the reduction of any deck image must reproduce the base value
    f = BumpField(octagon, 0.4, [(0.25 + 0.1j, 0.35, 0.2)])
    z = 0.2 + 0.15j
    v0 = float(f.value(z.real, z.imag))
    assert v0 != pytest.approx(0.4)  # the bump actually contributes
    for g in (1, 2, -3):
        M = octagon.word_matrix((g,))
        w, _ = octagon.apply_deck(M, z, 0.0)
        wr = octagon.reduce_to_domain(w)
        assert float(f.value(wr.real, wr.imag)) == pytest.approx(v0, abs=1e-10)


def test_negativity_bounds_constant_case(bolza06):
    b = negativity_bounds(bolza06)
    assert b.a == pytest.approx(0.32, abs=1e-12)
    assert b.b == pytest.approx(0.32, abs=1e-12)


def test_negativity_bounds_refuses_flat(flat_torus):
    out = negativity_bounds(flat_torus)
    assert isinstance(out, NegativityRefusal)


def test_magnetic_curvature_definition(curved_torus):
    x, y, th = 0.5, 1.2, 0.8
    K = float(curved_torus.gaussian_curvature(x, y))
    kap = float(curved_torus.kappa_value(x, y))
    xk = float(curved_torus.xperp_kappa(x, y, th))
    assert float(curved_torus.magnetic_curvature(x, y, th)) == pytest.approx(
        K - xk + kap * kap, abs=1e-13)


def test_scalar_kappa_is_wrapped():
    sys0 = MagneticSystem(ConformalTorusMetric(TrigField.zero()), 0.25)
    assert float(sys0.kappa_value(1.0, 2.0)) == pytest.approx(0.25)
