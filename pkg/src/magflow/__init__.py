"""Numerical laboratory for magnetic flows on closed oriented surfaces.

Two chart backends (flat/conformal torus, constant-curvature genus-2
octagon), exact fiberwise Fourier calculus for the frame operators,
energy-identity verifiers, log-domain mode weights, periodic-orbit
shooting with marked classes, and deformation/variational checks.
"""

from .surfaces import (
    BOLZA_SYSTOLE,
    BOLZA_TRACE,
    BackendMismatch,
    BumpField,
    ConformalTorusMetric,
    DomainError,
    HyperbolicOctagonSurface,
    MagneticSystem,
    NegativityBounds,
    NegativityRefusal,
    PhasePoint,
    TrigField,
    negativity_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "BOLZA_SYSTOLE",
    "BOLZA_TRACE",
    "BackendMismatch",
    "BumpField",
    "ConformalTorusMetric",
    "DomainError",
    "HyperbolicOctagonSurface",
    "MagneticSystem",
    "NegativityBounds",
    "NegativityRefusal",
    "PhasePoint",
    "TrigField",
    "negativity_bounds",
    "__version__",
]
