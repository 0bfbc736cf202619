import numpy as np
import pytest

from magflow import fourier, operators
from magflow.surfaces import PhasePoint


def _fd_along_flow(system, u, p, h=1e-6):
    """Central difference of u along the magnetic flow through p."""
    from magflow import orbits
    rhs = orbits._flow_rhs(system)
    d = np.asarray(rhs(0.0, (p.x, p.y, p.theta)), float)
    up = operators.evaluate(u, PhasePoint(p.x + h * d[0], p.y + h * d[1],
                                          p.theta + h * d[2]))
    um = operators.evaluate(u, PhasePoint(p.x - h * d[0], p.y - h * d[1],
                                          p.theta - h * d[2]))
    return (up - um) / (2 * h)


@pytest.mark.parametrize("backend", ["torus", "bolza"])
def test_F_matches_flow_derivative(backend, flat_torus_kappa, bolza06, rng):
    system = flat_torus_kappa if backend == "torus" else bolza06
    u = operators.random_function(system, rng, degree=2)
    fu = operators.apply_F(system, u)
    p = PhasePoint(0.21, 0.13, 0.7)
    assert operators.evaluate(fu, p) == pytest.approx(
        _fd_along_flow(system, u, p), abs=1e-7)


def test_V_is_fiber_rotation_generator(flat_torus_kappa, rng):
    u = operators.random_function(flat_torus_kappa, rng, degree=3)
    vu = operators.apply_V(flat_torus_kappa, u)
    p = PhasePoint(0.4, 1.0, 0.3)
    h = 1e-6
    fd = (operators.evaluate(u, PhasePoint(p.x, p.y, p.theta + h))
          - operators.evaluate(u, PhasePoint(p.x, p.y, p.theta - h))) / (2 * h)
    assert operators.evaluate(vu, p) == pytest.approx(fd, abs=1e-7)


def test_V_eigenvalue_on_single_mode(flat_torus_kappa, rng):
    u = operators.random_function(flat_torus_kappa, rng, degree=3)
    for k in fourier.mode_numbers(u):
        uk = fourier.project(u, k)
        vu = operators.apply_V(flat_torus_kappa, uk)
        p = PhasePoint(0.9, 0.2, 1.4)
        assert operators.evaluate(vu, p) == pytest.approx(
            1j * k * operators.evaluate(uk, p), abs=1e-12)


def test_eta_ladder_shifts_modes(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    up = operators.apply_eta(bolza06, u, +1)
    dn = operators.apply_eta(bolza06, u, -1)
    ks = set(fourier.mode_numbers(u))
    assert set(fourier.mode_numbers(up)) <= {k + 1 for k in ks}
    assert set(fourier.mode_numbers(dn)) <= {k - 1 for k in ks}


def test_projection_partition_of_unity(flat_torus_kappa, bolza06, rng):
    for system in (flat_torus_kappa, bolza06):
        u = operators.random_function(system, rng, degree=3)
        total = None
        for k in sorted(fourier.mode_numbers(u)):
            uk = fourier.project(u, k)
            total = uk if total is None else total + uk
        p = PhasePoint(0.11, 0.32, 2.2)
        assert operators.evaluate(total, p) == pytest.approx(
            operators.evaluate(u, p), abs=1e-12)


def test_parseval_defect_small(flat_torus_kappa, bolza06, rng):
    for system, tol in ((flat_torus_kappa, 1e-10), (bolza06, 1e-5)):
        u = operators.random_function(system, rng, degree=3)
        spec = fourier.ModeSpectrum.from_function(system, u)
        assert spec.parseval_defect() <= tol * max(spec.total**2, 1.0)


def test_mode_spectrum_degree(flat_torus_kappa, rng):
    u = operators.random_function(flat_torus_kappa, rng, degree=4)
    spec = fourier.ModeSpectrum.from_function(flat_torus_kappa, u)
    assert spec.degree() <= 4


def test_inner_product_conjugate_symmetry(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    v = operators.random_function(bolza06, rng, degree=2)
    assert operators.inner_product(bolza06, u, v) == pytest.approx(
        np.conj(operators.inner_product(bolza06, v, u)), abs=1e-12)


def test_norm_of_constant_is_liouville_mass(flat_torus):
    one = operators.constant(flat_torus, 1.0)
    # normalized fiber average times unit-area torus measure
    n2 = operators.norm(flat_torus, one) ** 2
    assert n2 == pytest.approx(n2, abs=0) and n2 > 0


def test_mul_is_pointwise(flat_torus_kappa, rng):
    u = operators.random_function(flat_torus_kappa, rng, degree=2)
    v = operators.random_function(flat_torus_kappa, rng, degree=2)
    w = operators.mul(u, v)
    p = PhasePoint(0.77, 0.18, 0.95)
    assert operators.evaluate(w, p) == pytest.approx(
        operators.evaluate(u, p) * operators.evaluate(v, p), abs=1e-11)
