"""Flow integration, periodic orbits per free-homotopy class, monodromy.

The flow is integrated in chart coordinates (x, y, theta); unit speed
is built into the parametrization, so time equals arclength and no
renormalization step is needed.  Periodic orbits are found by 8-segment
multiple shooting on the lift condition, seeded from the geodesic
representative of the class and continued in the magnetic intensity.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from typing import Dict, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .surfaces import (
    BumpField,
    ConformalTorusMetric,
    DomainError,
    HyperbolicOctagonSurface,
    MagneticSystem,
    PhasePoint,
    hyperbolic_distance,
)

__all__ = [
    "PeriodicOrbit",
    "Monodromy",
    "OrbitError",
    "canonicalize_class",
    "integrate_flow",
    "find_periodic_orbit",
    "continue_orbit",
    "marked_length_spectrum",
    "monodromy",
    "birkhoff_average",
]

TWO_PI = 2.0 * math.pi
N_SEGMENTS = 8
_RTOL = 1e-12
_ATOL = 1e-13


class OrbitError(RuntimeError):
    """Shooting failed; carries the best iterate found."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


def _wrap(a):
    return (a + math.pi) % TWO_PI - math.pi


# -- flow --------------------------------------------------------------------

def _flow_rhs(system: MagneticSystem):
    bolza = system.backend == "bolza"
    surface = system.metric if bolza else None

    if not bolza:
        # scalar fast path: unrolled sparse trig sums beat the array
        # machinery by an order of magnitude inside the ODE solver
        lam_items = list(system.metric.lam.coeffs.items())
        kap_items = list(system.kappa.coeffs.items())

        def rhs(t, s):
            x, y, th = s
            lam = lx = ly = kap = 0.0
            for (m, n), c in lam_items:
                e = c * cmath.exp(1j * (m * x + n * y))
                lam += e.real
                lx -= m * e.imag
                ly -= n * e.imag
            for (m, n), c in kap_items:
                kap += (c * cmath.exp(1j * (m * x + n * y))).real
            emlam = math.exp(-lam)
            c_, sn = math.cos(th), math.sin(th)
            return (emlam * c_, emlam * sn,
                    emlam * (-lx * sn + ly * c_) + kap)

        return rhs

    def rhs(t, s):
        x, y, th = s
        lx, ly = system.lam_grad(x, y)
        emlam = math.exp(-float(system.lam_value(x, y)))
        c, sn = math.cos(th), math.sin(th)
        if not system.kappa.is_constant:
            # kappa is deck-invariant: evaluate at the domain representative
            # so far-out arcs of the lift still see the right intensity
            zr = surface.reduce_to_domain(x + 1j * y)
            kap = float(system.kappa.value(zr.real, zr.imag))
        else:
            kap = float(system.kappa_value(x, y))
        return (emlam * c, emlam * sn,
                emlam * (-lx * sn + ly * c) + kap)

    return rhs


def _solve(system, state0, t_span, t_eval=None, jacobi=False, rtol=_RTOL):
    if jacobi:
        base = _flow_rhs(system)

        def rhs(t, s):
            dx, dy, dth = base(t, s[:3])
            km = float(system.magnetic_curvature(s[0], s[1], s[2]))
            # two Jacobi columns (y, w) with ydot = w, wdot = -Kmag y
            return (dx, dy, dth,
                    s[4], -km * s[3], s[6], -km * s[5])
    else:
        rhs = _flow_rhs(system)
    sol = solve_ivp(rhs, t_span, state0, method="DOP853",
                    rtol=rtol, atol=max(_ATOL, rtol / 10.0), t_eval=t_eval,
                    dense_output=True)
    if not sol.success:
        raise OrbitError(f"flow integration failed: {sol.message}")
    return sol


def integrate_flow(system: MagneticSystem, point: PhasePoint, t: float,
                   dense: bool = False):
    """Advance a phase point by time t (= arclength) along the flow."""
    sol = _solve(system, [point.x, point.y, point.theta], (0.0, float(t)))
    if dense:
        return sol
    x, y, th = sol.y[:, -1]
    if system.backend == "bolza" and abs(x + 1j * y) >= 1.0:
        raise DomainError("trajectory left the disk chart")
    return PhasePoint(x, y, th)


# -- class labels ------------------------------------------------------------

def canonicalize_class(system_or_backend, label):
    """Stable table key for a free-homotopy class.

    Torus: integer pair, sign-normalized so the first nonzero entry is
    positive (a loop and its reverse share a length).  Multiples of a
    primitive pair are kept distinct: they are different classes with
    different lengths.  Hyperbolic: word of signed 1-based generator
    indices, freely and cyclically reduced, then the lexicographically
    smallest cyclic rotation.  Contractible classes are rejected.
    """
    backend = getattr(system_or_backend, "backend", system_or_backend)
    if backend == "torus":
        m, n = int(label[0]), int(label[1])
        if m == 0 and n == 0:
            raise ValueError("contractible class (0, 0) has no closed orbit")
        if m < 0 or (m == 0 and n < 0):
            m, n = -m, -n
        return (m, n)
    word = tuple(int(s) for s in label)
    if any(s == 0 or abs(s) > 8 for s in word):
        raise ValueError(f"bad generator index in word {word}")
    word = _cyclic_reduce(word)
    if not word:
        raise ValueError(f"word {tuple(label)} is trivial (contractible class)")
    rots = [word[i:] + word[:i] for i in range(len(word))]
    return min(rots)


def _cyclic_reduce(word):
    out = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    while len(out) >= 2 and out[0] == -out[-1]:
        out = out[1:-1]
    return tuple(out)


# -- periodic orbits ---------------------------------------------------------

@dataclasses.dataclass
class PeriodicOrbit:
    """A closed orbit of the lifted flow in a marked class.

    ``states`` samples one full period uniformly in time (the last
    sample is the closing deck image of the first, not repeated).
    """

    class_label: tuple
    period: float
    times: np.ndarray
    states: np.ndarray           # (n, 3) chart samples over [0, T)
    closure_defect: float
    word_matrix: Optional[np.ndarray] = None   # bolza: closing deck element
    _dense: object = dataclasses.field(default=None, repr=False, compare=False)

    @property
    def start(self) -> PhasePoint:
        return PhasePoint(*self.states[0])

    def at(self, t):
        """Dense-output state at time(s) t in [0, period]."""
        return self._dense.sol(t) if self._dense is not None else None

    def resample(self, system, n: int):
        ts = np.linspace(0.0, self.period, n, endpoint=False)
        sol = _solve(system, list(self.states[0]), (0.0, self.period), t_eval=ts)
        return ts, sol.y.T


def _axis_seed(surface: HyperbolicOctagonSurface, word):
    """Geodesic representative of a hyperbolic word: start point on the
    axis (closest to the origin), direction toward the attracting fixed
    point, and the translation length from the trace."""
    A = surface.word_matrix(word)
    tr = float(np.real(np.trace(A)))
    if abs(tr) <= 2.0 + 1e-9:
        raise ValueError(f"word {word} is not hyperbolic (|tr| = {abs(tr):.6f})")
    T0 = 2.0 * math.acosh(abs(tr) / 2.0)
    al, be = A[0, 0], A[0, 1]
    roots = np.roots([np.conj(be), np.conj(al) - al, -be])
    # attracting fixed point: Mobius derivative 1/|conj(be) z + conj(al)|^2 < 1
    d = [1.0 / abs(np.conj(be) * z + np.conj(al)) ** 2 for z in roots]
    z_att = roots[int(np.argmin(d))]
    z_rep = roots[int(np.argmax(d))]
    z_att /= abs(z_att)
    z_rep /= abs(z_rep)
    if abs(z_att + z_rep) < 1e-9:
        # axis is a diameter through the origin
        z0 = 0.0 + 0.0j
        tdir = z_att
    else:
        # euclidean center m of the axis circle: Re(conj(p) m) = 1 at both
        # ideal endpoints (orthogonality to the unit circle)
        M = np.array([[z_att.real, z_att.imag], [z_rep.real, z_rep.imag]])
        mx, my = np.linalg.solve(M, [1.0, 1.0])
        m = complex(mx, my)
        r = math.sqrt(abs(m) ** 2 - 1.0)
        z0 = m * (1.0 - r / abs(m))
        tdir = 1j * (z0 - m) / r
        if (np.conj(tdir) * (z_att - z0)).real < 0.0:
            tdir = -tdir
    return PhasePoint(z0.real, z0.imag, math.atan2(tdir.imag, tdir.real)), T0, A


def _pack(starts, T):
    return np.concatenate([np.asarray(starts, float).reshape(-1), [T]])


def _unpack(v):
    return v[:-1].reshape(N_SEGMENTS, 3), v[-1]


def _shoot_residual(system, v, seed0, closure, rtol=_RTOL):
    starts, T = _unpack(v)
    bad = T <= 0.0
    if system.backend == "bolza":
        bad = bad or np.any(np.hypot(starts[:, 0], starts[:, 1]) > 0.995)
    if bad:
        # keep the objective finite and steeply increasing outside the chart
        return np.full(3 * N_SEGMENTS + 1, 1e3)
    res = []
    h = T / N_SEGMENTS
    for i in range(N_SEGMENTS):
        sol = _solve(system, list(starts[i]), (0.0, h), rtol=rtol)
        end = sol.y[:, -1]
        if i < N_SEGMENTS - 1:
            tgt = starts[i + 1]
        else:
            tgt = closure(starts[0])
        w = math.exp(float(system.lam_value(end[0], end[1])))
        res += [w * (end[0] - tgt[0]), w * (end[1] - tgt[1]),
                _wrap(end[2] - tgt[2])]
    # phase anchor: fix the time-shift gauge at the seed point
    d0 = np.asarray(_flow_rhs(system)(0.0, seed0), float)
    d0 /= np.linalg.norm(d0)
    res.append(float(np.dot(starts[0] - seed0, d0)))
    return np.asarray(res)


def _augmented_rhs(system):
    """Flow RHS extended with the 3x3 variational transport matrix."""
    base = _flow_rhs(system)
    fd = 1e-6

    def rhs(t, s):
        xyz = np.asarray(s[:3])
        M = np.asarray(s[3:]).reshape(3, 3)
        f0 = np.array(base(t, xyz))
        Df = np.empty((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = fd
            Df[:, j] = (np.array(base(t, xyz + e))
                        - np.array(base(t, xyz - e))) / (2.0 * fd)
        return np.concatenate([f0, (Df @ M).reshape(-1)])

    return rhs


def _newton_step_data(system, starts, T):
    """Segment endpoints, transport matrices and end velocities in one pass."""
    aug = _augmented_rhs(system)
    h = T / N_SEGMENTS
    ends, phis, fends = [], [], []
    for i in range(N_SEGMENTS):
        s0 = np.concatenate([starts[i], np.eye(3).reshape(-1)])
        sol = solve_ivp(aug, (0.0, h), s0, method="DOP853",
                        rtol=1e-12, atol=1e-13)
        if not sol.success:
            raise OrbitError(f"variational integration failed: {sol.message}")
        ends.append(sol.y[:3, -1])
        phis.append(sol.y[3:, -1].reshape(3, 3))
        fends.append(np.array(_flow_rhs(system)(0.0, ends[-1])))
    return ends, phis, fends


def _closure_jacobian(closure, s0, fd=1e-7):
    C = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = fd
        C[:, j] = (closure(s0 + e) - closure(s0 - e)) / (2.0 * fd)
    return C


def _solve_shooting(system, seed: PhasePoint, T_seed: float, closure,
                    max_iter=50):
    """Multiple-shooting damped Newton (Armijo) on the lift condition."""
    seed0 = np.array([seed.x, seed.y, seed.theta])
    starts = [np.array(seed0)]
    h = T_seed / N_SEGMENTS
    for i in range(1, N_SEGMENTS):
        starts.append(_solve(system, list(starts[-1]), (0.0, h)).y[:, -1])
    starts = np.array(starts)
    T = float(T_seed)
    d0 = np.asarray(_flow_rhs(system)(0.0, seed0), float)
    d0 /= np.linalg.norm(d0)

    def resid(v):
        return _shoot_residual(system, v, seed0, closure)

    v = _pack(starts, T)
    r = resid(v)
    rn = float(np.linalg.norm(r))
    for _ in range(max_iter):
        if float(np.linalg.norm(r, np.inf)) <= 1e-11:
            break
        starts, T = _unpack(v)
        ends, phis, fends = _newton_step_data(system, starts, T)
        J = np.zeros((3 * N_SEGMENTS + 1, 3 * N_SEGMENTS + 1))
        for i in range(N_SEGMENTS):
            w = math.exp(float(system.lam_value(ends[i][0], ends[i][1])))
            W = np.diag([w, w, 1.0])
            rows = slice(3 * i, 3 * i + 3)
            J[rows, 3 * i:3 * i + 3] = W @ phis[i]
            J[rows, -1] = (W @ fends[i]) / N_SEGMENTS
            if i < N_SEGMENTS - 1:
                J[rows, 3 * i + 3:3 * i + 6] = -W
            else:
                J[rows, 0:3] = -W @ _closure_jacobian(closure, starts[0])
        J[-1, 0:3] = d0
        try:
            delta = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        improved = False
        while step >= 1.0 / 1024.0:
            v_try = v + step * delta
            r_try = resid(v_try)
            rn_try = float(np.linalg.norm(r_try))
            if rn_try < (1.0 - 1e-4 * step) * rn:
                v, r, rn = v_try, r_try, rn_try
                improved = True
                break
            step /= 2.0
        if not improved:
            break
    resid_inf = float(np.linalg.norm(r, np.inf))
    if resid_inf <= 1e-10:
        starts, T = _unpack(v)
        return starts, T, resid_inf
    if resid_inf < 1e-4:
        # Newton got close but stalled; polish with trust-region least squares
        out = least_squares(resid, v, method="trf", xtol=1e-15, ftol=1e-15,
                            gtol=1e-15, max_nfev=200)
        resid_inf = float(np.linalg.norm(resid(out.x), np.inf))
        if resid_inf <= 1e-10:
            starts, T = _unpack(out.x)
            return starts, T, resid_inf
    starts, T = _unpack(v)
    raise OrbitError(
        f"shooting stalled at defect {resid_inf:.3e}", best=(starts, T))


def _build_orbit(system, label, start, T, closing_matrix=None, n_samples=256):
    ts = np.linspace(0.0, T, n_samples, endpoint=False)
    sol = _solve(system, list(start), (0.0, T), t_eval=ts)
    end = _solve(system, list(start), (0.0, T)).y[:, -1]
    if system.backend == "torus":
        dx = end[:2] - start[:2] - TWO_PI * np.asarray(label, float)
        defect = math.hypot(dx[0], dx[1]) + abs(_wrap(end[2] - start[2]))
    else:
        Minv = np.linalg.inv(closing_matrix)
        z_end, th_end = system.metric.apply_deck(Minv, end[0] + 1j * end[1],
                                                end[2])
        defect = (float(hyperbolic_distance(z_end, start[0] + 1j * start[1]))
                  + abs(_wrap(th_end - start[2])))
    return PeriodicOrbit(tuple(label), float(T), ts, sol.y.T, float(defect),
                         closing_matrix, _dense=sol)


def find_periodic_orbit(system: MagneticSystem, class_label,
                        continuation_steps: int = 10,
                        _seed=None) -> PeriodicOrbit:
    """Closed orbit of the lifted magnetic flow in a marked class.

    Seeds from the geodesic representative (torus: straight line;
    hyperbolic: the axis of the class word) and, when the magnetic
    intensity is nonzero, walks it up from zero in at most
    ``continuation_steps`` homotopy steps, Newton-correcting at each.
    """
    label = canonicalize_class(system, class_label)
    if system.backend == "torus":
        m, n = label
        L = TWO_PI * math.hypot(m, n)
        closure = lambda s0: np.array(
            [s0[0] + TWO_PI * m, s0[1] + TWO_PI * n, s0[2]])
        if _seed is not None:
            seed, T0 = _seed if isinstance(_seed, tuple) else (_seed, L)
            starts, T, resid = _solve_shooting(system, seed, T0, closure)
            return _build_orbit(system, label, starts[0], T)
        seed = PhasePoint(0.0, 0.0, math.atan2(n, m))
        try:
            starts, T, resid = _solve_shooting(system, seed, L, closure)
            return _build_orbit(system, label, starts[0], T)
        except OrbitError:
            # direct shooting from the straight-line seed failed (curved
            # metric or strong intensity): walk up from the flat geodesic
            predictor = lambda cs, cT, cf, f: (cs, cT)
            return _homotopy_from_geodesic(system, label, seed, L, closure,
                                           continuation_steps, predictor)

    surface = system.metric
    seed, T0, A = _axis_seed(surface, label)
    closure = lambda s0, _A=A: _closed_target(surface, _A, s0)
    if _seed is not None:
        seed, T0 = _seed
        starts, T, resid = _solve_shooting(system, seed, T0, closure)
        return _build_orbit(system, label, starts[0], T, A)
    kap_c = system.kappa.constant if system.kappa.is_constant else None

    def predictor(cur_seed, cur_T, cur_f, f):
        if kap_c is None or abs(kap_c) >= 1.0:
            return cur_seed, cur_T
        # constant intensity: the period scales like 1/sqrt(1 - kappa^2)
        # and the orbit is a hypercycle offset arctanh(kappa) from the
        # geodesic axis, on the clockwise-normal side
        T_guess = cur_T * math.sqrt(
            (1.0 - (kap_c * cur_f) ** 2) / (1.0 - (kap_c * f) ** 2))
        dd = math.atanh(abs(kap_c) * f) - math.atanh(abs(kap_c) * cur_f)
        side = -1.0 if kap_c > 0 else 1.0
        w = cmath.rect(math.tanh(side * dd / 2.0),
                       cur_seed.theta + math.pi / 2.0)
        z = complex(cur_seed.x, cur_seed.y)
        z2 = (z + w) / (1.0 + z.conjugate() * w)
        return PhasePoint(z2.real, z2.imag, cur_seed.theta), T_guess

    return _homotopy_from_geodesic(system, label, seed, T0, closure,
                                   continuation_steps, predictor, A)


def _homotopy_from_geodesic(system, label, seed, T0, closure,
                            continuation_steps, predictor, A=None):
    """Solve the zero-intensity (and, on the torus, flat-metric) problem
    first, then jump straight to the target scale factor 1, bisecting back
    toward the last success on failure; at most ``continuation_steps``
    extra solves."""
    starts, T, _ = _solve_shooting(_scaled_system(system, 0.0), seed, T0,
                                   closure)
    cur_seed, cur_T, cur_f = PhasePoint(*starts[0]), T, 0.0
    stack = [1.0]
    budget = max(continuation_steps, 1)
    while stack:
        f = stack[-1]
        sysk = _scaled_system(system, f)
        seed_guess, T_guess = predictor(cur_seed, cur_T, cur_f, f)
        try:
            starts, T, _ = _solve_shooting(sysk, seed_guess, T_guess, closure)
        except OrbitError as e:
            budget -= 1
            if budget <= 0 or f - cur_f < 1.0 / 64.0:
                raise OrbitError(
                    f"continuation for class {label} stalled at factor "
                    f"{cur_f:.3f}: {e}", best=e.best)
            stack.append((cur_f + f) / 2.0)
            continue
        stack.pop()
        cur_seed, cur_T, cur_f = PhasePoint(*starts[0]), T, f
    return _build_orbit(system, label, starts[0], T, A)


def _closed_target(surface, A, s0):
    z, th = surface.apply_deck(A, s0[0] + 1j * s0[1], s0[2])
    return np.array([z.real, z.imag, th])


def _scaled_system(system: MagneticSystem, factor: float) -> MagneticSystem:
    if factor == 1.0:
        return system
    if system.backend == "torus":
        # scale the conformal factor together with the intensity so the
        # zero end of the homotopy is the flat torus (exact seed)
        return MagneticSystem(ConformalTorusMetric(system.metric.lam * factor),
                              system.kappa * factor)
    k = system.kappa
    return MagneticSystem(system.metric, BumpField(
        system.metric, k.constant * factor,
        [(c, r, w * factor) for (c, r, w) in k.atoms]))


def continue_orbit(system: MagneticSystem, orbit: PeriodicOrbit) -> PeriodicOrbit:
    """Re-solve a known orbit's class on a nearby system, warm-started
    from the orbit itself (no homotopy from zero)."""
    return find_periodic_orbit(system, orbit.class_label,
                                _seed=(orbit.start, orbit.period))


def marked_length_spectrum(system: MagneticSystem, class_list) -> Dict:
    """Map classes to orbit lengths; per-class failures are recorded as
    error strings rather than aborting the table."""
    table = {}
    for label in class_list:
        key = canonicalize_class(system, label)
        if key in table:
            continue
        try:
            table[key] = find_periodic_orbit(system, key).period
        except (OrbitError, ValueError) as e:
            table[key] = f"error: {e}"
    return dict(sorted(table.items(), key=lambda kv: (len(str(kv[0])), str(kv[0]))))


# -- monodromy ---------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Monodromy:
    """Linearized transverse return map in the Jacobi frame (y, w)."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    trace: float
    determinant: float

    @property
    def hyperbolic(self) -> bool:
        return abs(self.trace) > 2.0


def monodromy(system: MagneticSystem, orbit: PeriodicOrbit) -> Monodromy:
    state0 = list(orbit.states[0]) + [1.0, 0.0, 0.0, 1.0]
    sol = _solve(system, state0, (0.0, orbit.period), jacobi=True)
    y1, w1, y2, w2 = sol.y[3:, -1]
    M = np.array([[y1, y2], [w1, w2]])
    return Monodromy(M, np.linalg.eigvals(M), float(np.trace(M)),
                     float(np.linalg.det(M)))


# -- Birkhoff averages -------------------------------------------------------

def birkhoff_average(system: MagneticSystem, u, point: PhasePoint,
                     T_max: float, checkpoints: int = 16):
    """Running orbit averages (1/T) int_0^T u(phi_t) dt at checkpoint times."""
    n = max(64, int(32 * T_max))
    ts = np.linspace(0.0, T_max, n + 1)
    sol = _solve(system, [point.x, point.y, point.theta], (0.0, T_max),
                 t_eval=ts)
    xs, ys, ths = sol.y[0], sol.y[1], sol.y[2]
    if system.backend == "bolza":
        # evaluate on domain representatives: phase functions only carry
        # the deck translates needed near the fundamental octagon
        red = [system.metric.reduce_to_domain(x + 1j * y, th)
               for x, y, th in zip(xs, ys, ths)]
        xs = np.array([z.real for z, _ in red])
        ys = np.array([z.imag for z, _ in red])
        ths = np.array([t for _, t in red])
    vals = np.real(u.evaluate(xs, ys, ths))
    cum = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) / 2.0)]) \
        * (ts[1] - ts[0])
    cps = np.linspace(T_max / checkpoints, T_max, checkpoints)
    idx = np.searchsorted(ts, cps)
    idx = np.minimum(idx, n)
    return cps, cum[idx] / ts[idx]
