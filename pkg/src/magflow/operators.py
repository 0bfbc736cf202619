"""Backend-independent entry points for frame operators and pairings.

Thin dispatch over the two phase-function representations.  ``quad``
selects the Bolza quadrature resolution and is ignored on the torus,
whose pairings are spectral (exact for band-limited data).
"""

from __future__ import annotations

import numpy as np

from . import hypfields, torusfields
from .surfaces import BackendMismatch, MagneticSystem, PhasePoint

__all__ = [
    "constant",
    "random_function",
    "apply_X",
    "apply_V",
    "apply_Xperp",
    "apply_F",
    "apply_eta",
    "inner_product",
    "norm",
    "evaluate",
    "magnetic_curvature_function",
]

DEFAULT_QUAD = (20, 20)
DEFAULT_TORUS_N = 48


def _check(system: MagneticSystem, u):
    if u.backend != system.backend:
        raise BackendMismatch(
            f"function is on {u.backend!r} but system is on {system.backend!r}"
        )


def constant(system: MagneticSystem, c, n: int = DEFAULT_TORUS_N):
    if system.backend == "torus":
        return torusfields.TorusPhaseFunction.constant(c, n)
    return hypfields.HypPhaseFunction.constant(system.metric, c)


def random_function(system: MagneticSystem, rng, degree=2, n=DEFAULT_TORUS_N,
                    real=False, n_atoms=2, bandwidth=2):
    if system.backend == "torus":
        return torusfields.TorusPhaseFunction.random(
            rng, degree=degree, bandwidth=bandwidth, n=n, real=real
        )
    return hypfields.HypPhaseFunction.random(
        system.metric, rng, degree=degree, n_atoms=n_atoms, real=real
    )


def apply_X(system, u):
    _check(system, u)
    return u.apply_X(system)


def apply_V(system, u):
    _check(system, u)
    return u.apply_V(system)


def apply_Xperp(system, u):
    _check(system, u)
    return u.apply_Xperp(system)


def apply_F(system, u):
    _check(system, u)
    return u.apply_F(system)


def apply_eta(system, u, sign: int):
    _check(system, u)
    return u.apply_eta(system, sign)


def inner_product(system, u, v, quad=DEFAULT_QUAD) -> complex:
    _check(system, u)
    if system.backend == "torus":
        return u.inner(system, v)
    return u.inner(system, v, quad)


def norm(system, u, quad=DEFAULT_QUAD) -> float:
    _check(system, u)
    if system.backend == "torus":
        return u.norm(system)
    return u.norm(system, quad)


def evaluate(u, point: PhasePoint):
    v = u.evaluate(np.array([point.x]), np.array([point.y]), np.array([point.theta]))
    return complex(np.asarray(v).reshape(-1)[0])


def magnetic_curvature_function(system: MagneticSystem, n: int = DEFAULT_TORUS_N):
    """Kmag as a phase function (fiber modes -1, 0, 1) on either backend."""
    if system.backend == "torus":
        return torusfields.magnetic_curvature_function(system, n)
    return hypfields.magnetic_curvature_function(system)


def mul(u, v):
    """Pointwise product of phase functions (fiber modes convolve)."""
    return u.mul(v)
