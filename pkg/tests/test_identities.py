import math

import numpy as np
import pytest

from magflow import identities, operators
from magflow.identities import PreconditionError
from magflow.surfaces import negativity_bounds
from magflow.weights import make_weights


def test_structural_relations_torus_exact(flat_torus_kappa, rng):
    for rep in identities.structural_relations(flat_torus_kappa,
                                               operators.random_function(
                                                   flat_torus_kappa, rng, 3)):
        assert rep.passed, rep.line()
        assert rep.rel_residual <= 1e-10


def test_structural_relations_bolza(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    for rep in identities.structural_relations(bolza06, u):
        assert rep.passed, rep.line()


def test_pestov_identity_both_backends(flat_torus_kappa, bolza06, rng):
    ut = operators.random_function(flat_torus_kappa, rng, degree=4)
    rep = identities.pestov_identity(flat_torus_kappa, ut)
    assert rep.passed and rep.rel_residual <= 1e-9
    ub = operators.random_function(bolza06, rng, degree=2)
    rep = identities.pestov_identity(bolza06, ub)
    assert rep.passed and rep.rel_residual <= 1e-5


def test_pestov_corollary(flat_torus_kappa, rng):
    u = operators.random_function(flat_torus_kappa, rng, degree=3)
    rep = identities.pestov_corollary(flat_torus_kappa, u)
    assert rep.passed, rep.line()


def test_riccati_solve_constant_branches(bolza06, systole_orbit):
    for sign in (+1, -1):
        ts, rs, defect = identities.riccati_solve(bolza06, systole_orbit, sign)
        assert np.max(np.abs(rs - sign * 0.8)) <= 1e-8
        assert defect <= 1e-10


def test_riccati_norm_identity(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    rep = identities.riccati_norm_identity(bolza06, u, 0.8)
    assert rep.passed, rep.line()
    assert rep.left >= -1e-9


def test_riccati_norm_identity_rejects_wrong_r(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    with pytest.raises(PreconditionError):
        identities.riccati_norm_identity(bolza06, u, 0.5)


def test_mode_identity(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    for k in (-1, 0, 1):
        try:
            rep = identities.mode_identity(bolza06, u, k)
        except PreconditionError:
            continue
        assert rep.passed, rep.line()


def test_gk_inequalities_cover_positive_and_negative_modes(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=3)
    bounds = negativity_bounds(bolza06)
    for k in (-2, -1, 1, 2):
        reps, used = identities.gk_inequalities(bolza06, u, k, bounds)
        for rep in reps:
            assert rep.passed, rep.line()
        assert used.a == pytest.approx(0.32, abs=1e-12)


def test_carleman_estimate_passes(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=3)
    for sigma in (0.1, 1.0, 3.0):
        rep = identities.carleman_estimate(bolza06, u, sigma, N=2)
        assert rep.passed, rep.line()


def test_summation_engine_matches_estimate(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=3)
    data = identities.harvest_mode_data(bolza06, u)
    bounds = negativity_bounds(bolza06)
    k_hi = max((abs(k) for k in data.u), default=2) + 2
    w = make_weights(1.0, max(k_hi, 4))
    rows, summary = identities.weighted_summation_engine(data, w, 2, bounds.a)
    assert all(r.passed for r in rows), [r.line() for r in rows if not r.passed]
    est = identities.carleman_estimate(bolza06, u, 1.0, N=2)
    assert est.passed == (summary.passed and all(r.passed for r in rows))


def test_degree_reduction(bolza06, rng):
    u = operators.random_function(bolza06, rng, degree=2)
    v = operators.apply_F(bolza06, u)
    rows, m = identities.degree_reduction_check(bolza06, u, v, sigma=1.0)
    assert all(r.passed for r in rows), [r.line() for r in rows if not r.passed]
    assert m >= 0


def test_contraction_chain(bolza06, rng):
    bounds = negativity_bounds(bolza06)
    sigma = math.log(4.0 * bounds.b / bounds.a) + 0.05
    y = operators.random_function(bolza06, rng, degree=2)
    rows = identities.contraction_chain(bolza06, y, sigma, 2)
    assert all(r.passed for r in rows), [r.line() for r in rows if not r.passed]
