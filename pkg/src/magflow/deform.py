"""One-parameter deformations: metric velocity, orbit continuation in s,
isospectrality, and the variational field with its Jacobi system.

A family is an evaluator s -> MagneticSystem near s = 0.  The metric
velocity beta(v, v) = (d/ds) (g_s)(v, v) restricted to the unit bundle
carries fiber modes {-2, 0, 2} only; fixed-metric families (only kappa
varies) have beta = 0 and support the variational-field machinery.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Dict, Optional

import numpy as np

from . import operators, orbits
from .reports import IdentityReport
from .surfaces import (
    BumpField,
    ConformalTorusMetric,
    MagneticSystem,
    TrigField,
)
from .torusfields import TorusPhaseFunction

__all__ = [
    "DeformationFamily",
    "BetaTensor",
    "VariationalField",
    "constant_family",
    "kappa_family",
    "conformal_torus_family",
    "translation_family",
    "beta",
    "beta_from_tensor",
    "length_function",
    "livsic_integral_check",
    "variational_field",
    "jacobi_residual",
    "first_order_system_residual",
]


@dataclasses.dataclass
class DeformationFamily:
    """s -> MagneticSystem with metadata the verifiers rely on."""

    evaluate: Callable[[float], MagneticSystem]
    eps: float = 0.1
    h_s: float = 1e-3
    fixed_metric: bool = False
    # closed-form metric velocity on the unit bundle, if known
    beta_exact: Optional[Callable[[int], TorusPhaseFunction]] = None
    # (d/ds) kappa_s at s = 0 as a field on M (fixed-metric families)
    kappa_dot: object = None

    def system(self, s: float) -> MagneticSystem:
        if abs(s) > self.eps:
            raise ValueError(f"s={s} outside the family range (+-{self.eps})")
        return self.evaluate(float(s))

    @property
    def base(self) -> MagneticSystem:
        return self.evaluate(0.0)


def constant_family(system: MagneticSystem, eps: float = 0.5) -> DeformationFamily:
    zero = (TrigField.zero() if system.backend == "torus"
            else BumpField(system.metric, 0.0))
    return DeformationFamily(lambda s: system, eps=eps, fixed_metric=True,
                             beta_exact=None, kappa_dot=zero)


def kappa_family(system: MagneticSystem, delta, eps: float = 0.5):
    """Fixed metric, kappa_s = kappa + s * delta."""
    if system.backend == "torus":
        if not isinstance(delta, TrigField):
            delta = TrigField.constant(float(delta))
        ev = lambda s: MagneticSystem(system.metric, system.kappa + delta * s)
    else:
        if not isinstance(delta, BumpField):
            delta = BumpField(system.metric, float(delta))
        k = system.kappa

        def ev(s):
            return MagneticSystem(system.metric, BumpField(
                system.metric, k.constant + s * delta.constant,
                list(k.atoms) + [(c, r, s * w) for (c, r, w) in delta.atoms]))
    return DeformationFamily(ev, eps=eps, fixed_metric=True, kappa_dot=delta)


def conformal_torus_family(metric: ConformalTorusMetric, phi: TrigField,
                           kappa=None, eps: float = 0.5) -> DeformationFamily:
    """g_s = e^{2 s phi} g_0 on the torus; beta = 2 phi (fiber mode 0)."""
    ev = lambda s: MagneticSystem(ConformalTorusMetric(metric.lam + phi * s),
                                  kappa)

    def beta_exact(n):
        return TorusPhaseFunction.from_field(phi * 2.0, n=n, k=0)

    return DeformationFamily(ev, eps=eps, beta_exact=beta_exact)


def translation_family(system: MagneticSystem, velocity, eps: float = 0.5):
    """Pullback along the translation flow of the torus: isometries when
    the conformal factor is constant, so beta measures only the drift of
    lam; kappa rides along by the same shift."""
    vx, vy = float(velocity[0]), float(velocity[1])

    def ev(s):
        return MagneticSystem(
            ConformalTorusMetric(system.metric.lam.shift(s * vx, s * vy)),
            system.kappa.shift(s * vx, s * vy))

    return DeformationFamily(ev, eps=eps)


# -- beta --------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class BetaTensor:
    """Metric velocity restricted to the unit bundle, as a phase function.

    Real-valued, so the mode pairing is beta_{-2} = conj(beta_2); the
    only possibly-live fiber modes are {-2, 0, 2}.
    """

    function: TorusPhaseFunction
    mode_leak: float

    @property
    def modes(self) -> Dict[int, np.ndarray]:
        return self.function.modes

    def mode_numbers(self):
        from . import fourier
        return sorted(fourier.mode_numbers(self.function))


def beta(family: DeformationFamily, n: int = 48) -> BetaTensor:
    if family.beta_exact is not None:
        fn = family.beta_exact(n)
        return BetaTensor(fn, 0.0)
    if family.fixed_metric:
        return BetaTensor(TorusPhaseFunction.constant(0.0, n)
                          if family.base.backend == "torus"
                          else operators.constant(family.base, 0.0), 0.0)
    if family.base.backend != "torus":
        raise NotImplementedError("metric families live on the torus backend")
    h = family.h_s
    lp = family.system(+h).metric.lam
    lm = family.system(-h).metric.lam
    # g_s conformal: beta(v,v) = (d/ds) e^{2(lam_s - lam_0)} = 2 lam_s'
    fn = TorusPhaseFunction.from_field((lp + lm * -1.0) * (1.0 / h), n=n, k=0)
    return BetaTensor(fn, 0.0)


def beta_from_tensor(metric: ConformalTorusMetric, E: TrigField, F: TrigField,
                     G: TrigField, n: int = 48,
                     leak_tol: float = 1e-8) -> BetaTensor:
    """Restrict a symmetric 2-tensor E dx^2 + 2F dxdy + G dy^2 to the unit
    bundle of a conformal torus metric: unit vectors are
    v = e^{-lam}(cos th, sin th), so

      beta = e^{-2 lam} [ (E+G)/2 + Re( ((E-G)/2 - iF) e^{2 i th} ) ]

    with fiber modes {-2, 0, 2} exactly."""
    g = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    X, Y = np.meshgrid(g, g, indexing="ij")
    w = np.exp(-2.0 * metric.lam.value(X, Y))
    e, f, gg = E.value(X, Y), F.value(X, Y), G.value(X, Y)
    m0 = w * (e + gg) / 2.0
    m2 = w * ((e - gg) / 4.0 - 0.5j * f)
    fn = TorusPhaseFunction(n, {0: m0.astype(complex), 2: m2,
                                -2: np.conj(m2)})
    vals = fn.evaluate(X.reshape(-1), Y.reshape(-1),
                       np.full(n * n, 0.37))
    leak = float(np.max(np.abs(np.imag(vals))))
    if leak > leak_tol:
        raise ValueError(f"tensor restriction leaked imaginary part {leak:.2e}")
    return BetaTensor(fn, leak)


# -- length function and isospectrality --------------------------------------

def length_function(family: DeformationFamily, class_label, s_grid):
    """Continue the closed orbit of the class across s_grid (warm starts
    from neighbor to neighbor, starting at the base orbit)."""
    base = orbits.find_periodic_orbit(family.base, class_label)
    out = {}
    s_grid = sorted(float(s) for s in s_grid)
    # walk outward from 0 in both directions so warm starts stay close
    for side in (sorted([s for s in s_grid if s >= 0.0]),
                 sorted([s for s in s_grid if s < 0.0], reverse=True)):
        cur = base
        for s in side:
            cur = orbits.continue_orbit(family.system(s), cur)
            out[s] = cur.period
    return dict(sorted(out.items()))


def livsic_integral_check(family: DeformationFamily, orbit,
                          s_grid=None, n_samples: int = 512,
                          iso_tol: float = 1e-8,
                          tol: float = 1e-8) -> IdentityReport:
    """Orbit integral of beta along the base orbit.  If the family is
    isospectral on the class (checked over s_grid when given), the
    integral must vanish; otherwise both quantities are just reported."""
    bt = beta(family)
    base = family.base
    ts, states = orbit.resample(base, n_samples)
    vals = np.real(bt.function.evaluate(states[:, 0], states[:, 1],
                                        states[:, 2]))
    integral = float(np.sum(vals) * orbit.period / n_samples)
    iso_defect = 0.0
    if s_grid is not None:
        lf = length_function(family, orbit.class_label, s_grid)
        iso_defect = max(abs(v - orbit.period) for v in lf.values())
    isospectral = iso_defect <= iso_tol * orbit.period
    passed = (abs(integral) <= tol * orbit.period) if isospectral else True
    return IdentityReport(
        name=f"orbit integral of beta ({orbit.class_label})",
        left=integral, right=0.0, residual=abs(integral),
        rel_residual=abs(integral) / orbit.period, tolerance=tol,
        passed=passed,
        resolution={"n_samples": n_samples},
        detail={"isospectral": isospectral, "iso_defect": iso_defect})


# -- variational field -------------------------------------------------------

@dataclasses.dataclass
class VariationalField:
    """S(t) = x(t) gamma' + y(t) i gamma' along a closed base orbit."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    f0: np.ndarray
    h_s: float
    period: float


def _normal_displacement(base_point, theta, ev, tau0):
    """Signed i-gamma'-component of the offset from a base point to the
    nearest point of a continued orbit (Newton on the tangency condition).

    ``ev(tau)`` must trace the orbit in the chart without wrapping: a
    closed orbit on the octagon surface closes only modulo a deck
    transformation, so chart positions at tau and tau + T differ."""
    px, py = base_point
    c, s = math.cos(theta), math.sin(theta)
    tau = tau0
    for _ in range(8):
        st = ev(tau)
        g = (st[0] - px) * c + (st[1] - py) * s
        # d/dtau of the projection: velocity ~ e^{-lam} (cos, sin)
        v = ev(tau + 1e-6)[:2] - ev(tau - 1e-6)[:2]
        dg = (v[0] * c + v[1] * s) / 2e-6
        if abs(dg) < 1e-14:
            break
        step = -g / dg
        tau += step
        if abs(step) < 1e-13:
            break
    st = ev(tau)
    return -(st[0] - px) * s + (st[1] - py) * c


def variational_field(family: DeformationFamily, orbit,
                      h_s: Optional[float] = None,
                      n_samples: int = 256) -> VariationalField:
    """Central difference quotient of the continued orbit across +-h_s.

    y is the normal offset measured against the continued orbit as a
    curve (parametrization-free); x is the tangential component of the
    same-time displacement with the time-shift gauge fixed at t = 0.
    Both are converted to orthonormal-frame components with the e^{lam}
    chart factor.
    """
    if not family.fixed_metric:
        raise ValueError("variational fields need a fixed-metric family")
    h = float(h_s if h_s is not None else family.h_s)
    base = family.base
    o_p = orbits.continue_orbit(family.system(+h), orbit)
    o_m = orbits.continue_orbit(family.system(-h), orbit)
    ts, states = orbit.resample(base, n_samples)
    def _tracer(sysc, oc):
        fwd = orbits._solve(sysc, list(oc.states[0]), (0.0, 1.05 * oc.period))
        bwd = orbits._solve(sysc, list(oc.states[0]), (0.0, -0.05 * oc.period))
        return lambda tau: (fwd.sol(tau) if tau >= 0.0 else bwd.sol(tau))

    ev_p = _tracer(family.system(+h), o_p)
    ev_m = _tracer(family.system(-h), o_m)
    xs = np.empty(n_samples)
    ys = np.empty(n_samples)
    for j, (t, st) in enumerate(zip(ts, states)):
        px, py, th = st
        lam = float(base.lam_value(px, py))
        elam = math.exp(lam)
        yp = _normal_displacement((px, py), th, ev_p,
                                 t * o_p.period / orbit.period)
        ym = _normal_displacement((px, py), th, ev_m,
                                 t * o_m.period / orbit.period)
        ys[j] = elam * (yp - ym) / (2.0 * h)
        sp = ev_p(t)
        sm = ev_m(t)
        dx, dy = (sp[0] - sm[0]) / (2.0 * h), (sp[1] - sm[1]) / (2.0 * h)
        xs[j] = elam * (dx * math.cos(th) + dy * math.sin(th))
    xs -= xs[0]
    kd = family.kappa_dot
    f0 = np.asarray(kd.value(states[:, 0], states[:, 1]), float) \
        if kd is not None else np.zeros(n_samples)
    return VariationalField(ts, xs, ys, f0, h, orbit.period)


def _spectral_derivative(vals, period, order=1, cutoff=None):
    """Fourier derivative of a smooth periodic sample, low-passed.

    The samples carry interpolation jitter from the dense ODE output;
    multiplying a mode-k coefficient by (2 pi k / T)^order amplifies
    that jitter quadratically for the second derivative, so modes above
    the signal band (default n/16) are dropped before differentiating.
    """
    n = len(vals)
    if cutoff is None:
        cutoff = max(8, n // 16)
    coeffs = np.fft.fft(vals)
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    coeffs[k > cutoff] = 0.0
    freqs = 2.0j * math.pi * np.fft.fftfreq(n, d=1.0 / n) / period
    return np.real(np.fft.ifft((freqs ** order) * coeffs))


def jacobi_residual(system: MagneticSystem, orbit,
                    field: VariationalField) -> IdentityReport:
    """Residuals of y'' + Kmag y = f0 and x' = kappa y along the orbit.

    y is differentiated spectrally (periodic); x is detrended by its
    secular drift (one period of x' integrates to the period derivative,
    which need not vanish) and the drift slope is restored afterwards.
    """
    ts, states = orbit.resample(system, len(field.times))
    km = np.array([float(system.magnetic_curvature(*st)) for st in states])
    kap = np.asarray(system.kappa_value(states[:, 0], states[:, 1]), float)
    ydd = _spectral_derivative(field.y, field.period, order=2)
    res_y = ydd + km * field.y - field.f0
    # estimate the secular drift slope of x (one period of x' integrates
    # to the period derivative, generally nonzero) by a linear fit
    n = len(field.times)
    t = field.times
    A = np.vstack([t, np.ones_like(t)]).T
    c, _ = np.linalg.lstsq(A, field.x, rcond=None)[0], None
    slope = c[0]
    x_per = field.x - slope * t
    x_per -= np.mean(x_per)
    xd = _spectral_derivative(x_per, field.period, order=1) + slope
    res_x = xd - kap * field.y
    r1 = float(np.max(np.abs(res_y)))
    r2 = float(np.max(np.abs(res_x)))
    scale = max(float(np.max(np.abs(field.f0))), 1.0)
    return IdentityReport(
        name=f"variational Jacobi system ({orbit.class_label})",
        left=r1, right=0.0, residual=max(r1, r2),
        rel_residual=max(r1, r2) / scale,
        tolerance=1e-4,
        passed=max(r1, r2) <= 1e-4 * scale,
        resolution={"h_s": field.h_s, "n_samples": n},
        detail={"jacobi_residual": r1, "transport_residual": r2,
                "drift_slope": slope})


# -- two-dimensional first-order system --------------------------------------

def first_order_system_residual(system: MagneticSystem, y, f0,
                                quad=operators.DEFAULT_QUAD,
                                orbit=None,
                                tolerance: float = 1e-8) -> IdentityReport:
    """Residual of (F + A) u = v with u = (y, Fy), v = (0, f0) for phase
    functions y, f0; the first component is exact by construction, so the
    report carries ||F(Fy) + Kmag * y - f0||.  With an orbit given, a
    monodromy surrogate certifies that the homogeneous system admits only
    the zero periodic solution (no eigenvalue 1 of the period map)."""
    fy = operators.apply_F(system, y)
    ffy = operators.apply_F(system, fy)
    if system.backend == "torus":
        km = operators.magnetic_curvature_function(system, y.n)
    else:
        km = operators.magnetic_curvature_function(system)
    res = operators.norm(system, ffy + km.mul(y) - f0, quad)
    scale = max(operators.norm(system, f0, quad),
                operators.norm(system, y, quad), 1.0)
    detail = {}
    passed = res <= tolerance * scale
    if orbit is not None:
        mono = orbits.monodromy(system, orbit)
        gap = float(np.min(np.abs(mono.eigenvalues - 1.0)))
        detail["monodromy_eigs"] = [complex(e) for e in mono.eigenvalues]
        detail["eigenvalue_one_gap"] = gap
        detail["unique_periodic_solution"] = gap > 1e-6
        passed = passed and gap > 1e-6
    return IdentityReport(
        name="first-order system (F + A)u = v", left=res, right=0.0,
        residual=res, rel_residual=res / scale, tolerance=tolerance,
        passed=passed, resolution={"quad": list(quad)}
        if system.backend == "bolza" else {"n": getattr(y, "n", None)},
        detail=detail)
