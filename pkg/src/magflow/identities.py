"""Energy identities and weighted estimates for the twisted generator.

Everything here is a verifier: build both sides of an identity (or
estimate) from independent operator applications and report the
residual.  The weighted estimates run in the log domain because the
mode weights grow super-exponentially.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Dict, Optional

import numpy as np
from scipy.special import logsumexp

from . import fourier, operators
from .operators import DEFAULT_QUAD, apply_F, apply_V, apply_Xperp, inner_product, norm
from .reports import IdentityReport
from .surfaces import MagneticSystem, NegativityBounds, negativity_bounds
from .weights import CarlemanWeights, make_weights

__all__ = [
    "pestov_identity",
    "pestov_corollary",
    "riccati_norm_identity",
    "mode_identity",
    "gk_inequalities",
    "ModeData",
    "harvest_mode_data",
    "carleman_estimate",
    "weighted_summation_engine",
    "degree_reduction_check",
    "contraction_chain",
    "structural_relations",
    "PreconditionError",
]


class PreconditionError(ValueError):
    """A verifier's hypothesis failed before the check could run."""


def _kmag(system, n=None, quad=DEFAULT_QUAD):
    if system.backend == "torus":
        return operators.magnetic_curvature_function(system, n or operators.DEFAULT_TORUS_N)
    return operators.magnetic_curvature_function(system)


def _tol(system, torus_tol, bolza_tol):
    return torus_tol if system.backend == "torus" else bolza_tol


# -- structural relations ----------------------------------------------------

def structural_relations(system: MagneticSystem, u, quad=DEFAULT_QUAD,
                         tolerance: Optional[float] = None, n: Optional[int] = None):
    """Commutator relations of the moving frame, tested weakly against u.

    Checks [V,F]u = Xperp u, [V,Xperp]u = -Fu + kappa Vu and
    [F,Xperp]u = -kappa F u + Kmag V u, reporting the largest residual
    norm relative to a first-derivative scale of u.
    """
    tolerance = tolerance if tolerance is not None else _tol(system, 1e-10, 1e-6)
    km = _kmag(system, n or getattr(u, "n", None), quad)

    def kmul(w):
        if system.backend == "torus":
            from .torusfields import chart_for
            return w.mul_base(system, chart_for(system, w.n).kappa)
        return w.mul_base(system, system.kappa)

    F = lambda w: apply_F(system, w)
    V = lambda w: apply_V(system, w)
    P = lambda w: apply_Xperp(system, w)

    rel = {
        "[V,F]=Xperp": (V(F(u)) - F(V(u))) - P(u),
        "[V,Xperp]=-F+kappaV": (V(P(u)) - P(V(u))) - (kmul(V(u)) - F(u)),
        "[F,Xperp]=-kappaF+KmagV": (F(P(u)) - P(F(u)))
        - (km.mul(V(u)) - kmul(F(u))),
    }
    scale = max(norm(system, F(u), quad), norm(system, P(u), quad), 1e-300)
    rows = []
    res = {"quad": list(quad)} if system.backend == "bolza" else {"n": u.n}
    for name, r in rel.items():
        rn = norm(system, r, quad)
        rows.append(IdentityReport(
            name=f"frame bracket {name}", left=rn, right=0.0,
            residual=rn, rel_residual=rn / scale, tolerance=tolerance,
            passed=rn / scale <= tolerance, resolution=dict(res)))
    return rows


# -- Pestov ------------------------------------------------------------------

def pestov_identity(system: MagneticSystem, u, quad=DEFAULT_QUAD,
                    tolerance: Optional[float] = None,
                    n: Optional[int] = None) -> IdentityReport:
    """||F V u||^2 - (Kmag V u, V u) + ||F u||^2  =  ||V F u||^2."""
    tolerance = tolerance if tolerance is not None else _tol(system, 1e-9, 1e-5)
    vu = apply_V(system, u)
    fu = apply_F(system, u)
    fvu = apply_F(system, vu)
    vfu = apply_V(system, fu)
    km = _kmag(system, n or getattr(u, "n", None), quad)
    curv = inner_product(system, km.mul(vu), vu, quad).real
    left = norm(system, fvu, quad) ** 2 - curv + norm(system, fu, quad) ** 2
    right = norm(system, vfu, quad) ** 2
    res = {"quad": list(quad)} if system.backend == "bolza" else {"n": u.n}
    return IdentityReport.from_sides(
        "pestov energy identity", left, right, tolerance,
        resolution=res, relative=True,
        detail={"curvature_term": curv})


def pestov_corollary(system: MagneticSystem, u, quad=DEFAULT_QUAD,
                     tolerance: Optional[float] = None,
                     n: Optional[int] = None) -> IdentityReport:
    """2 Re(Xperp u, V F u) = ||F u||^2 + ||Xperp u||^2 - (Kmag V u, V u)."""
    tolerance = tolerance if tolerance is not None else _tol(system, 1e-9, 1e-5)
    vu = apply_V(system, u)
    fu = apply_F(system, u)
    pu = apply_Xperp(system, u)
    km = _kmag(system, n or getattr(u, "n", None), quad)
    left = 2.0 * inner_product(system, pu, apply_V(system, fu), quad).real
    right = (norm(system, fu, quad) ** 2 + norm(system, pu, quad) ** 2
             - inner_product(system, km.mul(vu), vu, quad).real)
    res = {"quad": list(quad)} if system.backend == "bolza" else {"n": u.n}
    return IdentityReport.from_sides(
        "pestov pairing corollary", left, right, tolerance,
        resolution=res, relative=True)


# -- Riccati norm identity ---------------------------------------------------

def riccati_norm_identity(system: MagneticSystem, u, r: float,
                          quad=DEFAULT_QUAD,
                          tolerance: Optional[float] = None,
                          precondition_tol: float = 1e-8,
                          n: Optional[int] = None) -> IdentityReport:
    """||F u||^2 - (Kmag u, u) = ||F u - r u||^2 for a constant Riccati
    solution r of F r + r^2 + Kmag = 0 (constant solutions need Kmag = -r^2
    pointwise, which is the constant-intensity hyperbolic situation)."""
    tolerance = tolerance if tolerance is not None else _tol(system, 1e-9, 1e-5)
    r = float(r)
    km = _kmag(system, n or getattr(u, "n", None), quad)
    one = operators.constant(system, 1.0, n or getattr(u, "n", operators.DEFAULT_TORUS_N))
    ric = km + operators.constant(system, r * r, n or getattr(u, "n", operators.DEFAULT_TORUS_N))
    defect = norm(system, ric, quad) / max(norm(system, one, quad), 1e-300)
    if defect > precondition_tol:
        raise PreconditionError(
            f"r={r} is not a Riccati solution here (|r^2 + Kmag| ~ {defect:.3e})")
    fu = apply_F(system, u)
    left = norm(system, fu, quad) ** 2 - inner_product(system, km.mul(u), u, quad).real
    right = norm(system, fu - u * r, quad) ** 2
    res = {"quad": list(quad)} if system.backend == "bolza" else {"n": u.n}
    return IdentityReport.from_sides(
        "riccati norm identity", left, right, tolerance,
        resolution=res, relative=True, detail={"r": r})


def riccati_solve(system: MagneticSystem, orbit, sign: int = +1,
                  n_samples: int = 256, tol: float = 1e-10,
                  max_periods: int = 80):
    """Periodic solution of r' + r^2 + Kmag = 0 along a closed orbit.

    r' is the derivative along the flow.  The attracting branch (sign +1)
    is found by forward integration of the period map to its fixed point;
    the repelling branch (sign -1) by integrating backward.  Returns
    (times, r samples, period-map defect)."""
    from scipy.integrate import solve_ivp as _ivp
    from scipy.interpolate import CubicSpline

    ts, states = orbit.resample(system, n_samples)
    km = np.array([float(system.magnetic_curvature(*st)) for st in states])
    T = orbit.period
    # periodic interpolant of Kmag along the orbit
    tper = np.concatenate([ts, [T]])
    kper = np.concatenate([km, [km[0]]])
    spline = CubicSpline(tper, kper, bc_type="periodic")

    def rhs(t, r):
        return [-(r[0] * r[0] + float(spline(t % T)))]

    direction = 1.0 if sign >= 0 else -1.0
    r0 = math.sqrt(max(-float(np.mean(km)), 1e-12)) * direction
    defect = math.inf
    for _ in range(max_periods):
        sol = _ivp(rhs, (0.0, direction * T), [r0], method="DOP853",
                   rtol=1e-12, atol=1e-13)
        if not sol.success:
            raise PreconditionError(
                f"Riccati integration blew up (r0={r0:.3e}): {sol.message}")
        r1 = float(sol.y[0, -1])
        defect = abs(r1 - r0)
        r0 = r1
        if defect <= tol:
            break
    sol = _ivp(rhs, (0.0, direction * T), [r0], method="DOP853",
               rtol=1e-12, atol=1e-13, t_eval=direction * ts)
    rs = sol.y[0]
    if direction < 0:
        # backward samples sit at -ts_j = T - ts_j (mod T); the uniform
        # grid makes the remap an index reversal
        rs = np.concatenate([[rs[0]], rs[1:][::-1]])
    return ts, rs, defect


# -- single-mode identity and curvature inequalities -------------------------

def mode_identity(system: MagneticSystem, u, k: int, quad=DEFAULT_QUAD,
                  tolerance: Optional[float] = None) -> IdentityReport:
    """(k^2+1)||F u_k||^2 - k^2 (Kmag u_k, u_k) = ||V F u_k||^2 for a
    single-mode u_k (the Pestov identity specialized to one fiber mode)."""
    tolerance = tolerance if tolerance is not None else _tol(system, 1e-9, 1e-5)
    uk = fourier.project(u, k)
    if fourier.ModeSpectrum.from_function(system, uk, quad).total == 0.0:
        raise PreconditionError(f"u has no mode {k} content")
    km = _kmag(system, None if system.backend == "bolza" else uk.n, quad)
    fu = apply_F(system, uk)
    left = ((k * k + 1) * norm(system, fu, quad) ** 2
            - k * k * inner_product(system, km.mul(uk), uk, quad).real)
    right = norm(system, apply_V(system, fu), quad) ** 2
    return IdentityReport.from_sides(
        f"single-mode energy identity (k={k})", left, right, tolerance,
        relative=True, resolution={"k": k})


def gk_inequalities(system: MagneticSystem, u, k: int,
                    bounds: Optional[NegativityBounds] = None,
                    quad=DEFAULT_QUAD, margin: Optional[float] = None):
    """Mode-wise ladder inequalities under -2b <= Kmag <= -2a < 0.

    For k > 0 (mirrored for k < 0 with the ladder directions swapped):

      (GK1)  ||eta- u_k||^2 + k a ||u_k||^2 + (k/2)||kappa u_k||^2
                 <= ||eta+ u_k||^2
                 <= ||eta- u_k||^2 + k b ||u_k||^2 + (k/2)||kappa u_k||^2
      (GK2)  ||eta+ u_k||^2
                 <= 2||(Fu)_{k+1}||^2 + 4||eta- u_{k+2}||^2
                    + 4(k+1)^2 ||kappa u_{k+1}||^2

    GK2 needs the neighboring modes of u, so ``u`` is the full function
    and ``k`` picks the rung.  Returns ([gk1_lower, gk1_upper, gk2], bounds).
    """
    if bounds is None:
        bounds = negativity_bounds(system)
        if not isinstance(bounds, NegativityBounds):
            raise PreconditionError(f"curvature not negatively pinched: {bounds}")
    if k == 0:
        raise PreconditionError("ladder inequalities need k != 0")
    # with a = b the GK1 bounds are equalities, so the margin must cover
    # quadrature error on the Bolza backend
    margin = margin if margin is not None else _tol(system, 1e-9, 1e-4)
    a, b = bounds.a, bounds.b
    s = 1 if k > 0 else -1
    kk = abs(k)
    uk = fourier.project(u, k)
    out_n = norm(system, operators.apply_eta(system, uk, s), quad)      # raises |k|
    in_n = norm(system, operators.apply_eta(system, uk, -s), quad)      # lowers |k|
    un = norm(system, uk, quad)
    kn = norm(system, _kappa_mul(system, uk), quad)
    fu = apply_F(system, u)
    fu_next = norm(system, fourier.project(fu, k + s), quad)
    in_next2 = norm(system, operators.apply_eta(
        system, fourier.project(u, k + 2 * s), -s), quad)
    kn_next = norm(system, _kappa_mul(
        system, fourier.project(u, k + s)), quad)
    base = in_n ** 2 + (kk / 2.0) * kn ** 2
    res = {"k": k, "a": a, "b": b}
    rows = [
        IdentityReport.from_bound(f"gk1 lower (k={k})",
                                  base + kk * a * un ** 2, out_n ** 2,
                                  margin, resolution=res),
        IdentityReport.from_bound(f"gk1 upper (k={k})",
                                  out_n ** 2, base + kk * b * un ** 2,
                                  margin, resolution=res),
        IdentityReport.from_bound(
            f"gk2 (k={k})", out_n ** 2,
            2.0 * fu_next ** 2 + 4.0 * in_next2 ** 2
            + 4.0 * (kk + 1) ** 2 * kn_next ** 2,
            margin, resolution=res),
    ]
    return rows, bounds


def _kappa_mul(system, w):
    if system.backend == "torus":
        from .torusfields import chart_for
        return w.mul_base(system, chart_for(system, w.n).kappa)
    return w.mul_base(system, system.kappa)


# -- mode data harvest -------------------------------------------------------

@dataclasses.dataclass
class ModeData:
    """Per-mode L2 norms of u, eta+-u, kappa*u and of Fu, for the engine."""

    u: Dict[int, float]
    eta_plus: Dict[int, float]     # ||(eta+ u)_{k+1}|| indexed by source k
    eta_minus: Dict[int, float]    # ||(eta- u)_{k-1}|| indexed by source k
    kappa_u: Dict[int, float]
    fu: Dict[int, float]           # ||(F u)_k|| indexed by result mode k
    degree: int


def harvest_mode_data(system: MagneticSystem, u, quad=DEFAULT_QUAD) -> ModeData:
    spec = fourier.ModeSpectrum.from_function(system, u, quad)
    fu = apply_F(system, u)
    fu_spec = fourier.ModeSpectrum.from_function(system, fu, quad)
    eta_p, eta_m, kap = {}, {}, {}
    for k in fourier.mode_numbers(u):
        uk = fourier.project(u, k)
        eta_p[k] = norm(system, operators.apply_eta(system, uk, +1), quad)
        eta_m[k] = norm(system, operators.apply_eta(system, uk, -1), quad)
        kap[k] = norm(system, _kappa_mul(system, uk), quad)
    return ModeData(dict(spec.norms), eta_p, eta_m, kap,
                    dict(fu_spec.norms), spec.degree())


# -- Carleman estimate -------------------------------------------------------

def _log_terms(w: CarlemanWeights, norms: Dict[int, float], keep):
    """log(gamma_k^2 ||.||^2) for modes passing ``keep``; empty -> -inf."""
    out = []
    for k, v in norms.items():
        if keep(k) and v > 0.0:
            out.append(w.log_gamma_sq(k) + 2.0 * np.log(v))
    return np.array(out) if out else np.array([-np.inf])


def carleman_estimate(system: MagneticSystem, u, sigma: float, N: int,
                      quad=DEFAULT_QUAD,
                      bounds: Optional[NegativityBounds] = None,
                      data: Optional[ModeData] = None,
                      tolerance: float = 1e-9) -> IdentityReport:
    """Weighted tail estimate under pinched negative curvature:

        sum_{|k|>=N} gamma_k^2 ||u_k||^2
            <= (2 / (a e^sigma)) sum_{|k|>=N+1} gamma_k^2 ||(F u)_k||^2

    for N at least the truncation threshold.  Both sides are assembled
    with log-sum-exp; passes iff lhs <= rhs*(1+tolerance).
    """
    if bounds is None:
        bounds = negativity_bounds(system)
        if not isinstance(bounds, NegativityBounds):
            raise PreconditionError(f"curvature not negatively pinched: {bounds}")
    if N < 2:
        raise PreconditionError("threshold N must be >= 2")
    if data is None:
        data = harvest_mode_data(system, u, quad)
    w = make_weights(sigma, max(64, data.degree + 4))
    log_lhs = logsumexp(_log_terms(w, data.u, lambda k: abs(k) >= N))
    log_rhs = (np.log(2.0 / bounds.a) - sigma
               + logsumexp(_log_terms(w, data.fu, lambda k: abs(k) >= N + 1)))
    res = {"sigma": sigma, "N": N, "a": bounds.a}
    if system.backend == "bolza":
        res["quad"] = list(quad)
    if log_lhs == -np.inf:
        return IdentityReport.from_bound(
            f"carleman tail estimate (sigma={sigma}, N={N})",
            0.0, float(np.exp(min(log_rhs, 700.0))) if log_rhs > -np.inf else 0.0,
            tolerance, resolution=res, detail={"empty_tail": True})
    slack = log_lhs - log_rhs
    rep = IdentityReport(
        name=f"carleman tail estimate (sigma={sigma}, N={N})",
        left=float(log_lhs), right=float(log_rhs),
        residual=max(float(slack), 0.0),
        rel_residual=max(float(slack), 0.0),
        tolerance=tolerance,
        passed=bool(slack <= np.log1p(tolerance)),
        resolution=res,
        detail={"log_domain": True, "log_slack": float(slack)})
    return rep


# -- weighted summation engine -----------------------------------------------

def weighted_summation_engine(data: ModeData, w: CarlemanWeights, N: int,
                              a: float, step_reports: bool = False):
    """Replays the telescoping weighted summation one ladder rung at a time.

    For each side s in {+1,-1} and each |k| in [N, degree] it certifies
    the chained per-mode inequality (GK1-lower into GK2)

        ||eta_in u_k||^2 + |k| a ||u_k||^2 + (|k|/2)||kappa u_k||^2
            <= 2 ||(Fu)_{k+s}||^2 + 4 ||eta_in u_{k+2s}||^2
               + 4 (|k|+1)^2 ||kappa u_{k+s}||^2

    (eta_in is the ladder direction lowering |k|), checks nonnegativity
    of the bracket coefficients [gamma_k^2 - 4 gamma_{k-2}^2] and
    [k gamma_k^2 / 2 - 4 k^2 gamma_{k-1}^2] that absorb the shifted
    terms, and certifies the telescoped conclusion

        a sum_{|k|>=N} gamma_k^2 ||u_k||^2
            <= 2 sum_{|k|>=N+1} gamma_{|k|-1}^2 ||(Fu)_k||^2

    in the log domain.  Returns (rows, summary_report).
    """
    rows = []
    cert = w.certificate()
    rows.append(IdentityReport(
        name="weight recurrence certificates", left=float(np.min(cert.skip_two)),
        right=0.0, residual=0.0, rel_residual=0.0, tolerance=0.0,
        passed=cert.ok,
        detail={"min_skip_two": float(np.min(cert.skip_two)),
                "min_step_one": float(np.min(cert.step_one)),
                "min_sigma_gap": float(np.min(cert.sigma_gap))}))
    k_hi = max(data.degree, N)
    bracket_ok = True
    for kk in range(N, k_hi + 3):
        if kk >= N + 2:
            bracket_ok &= w.log_gamma_sq(kk) > np.log(4.0) + w.log_gamma_sq(kk - 2)
        if kk >= N + 1:
            # k gamma_k^2 / 2 >= 4 k^2 gamma_{k-1}^2
            bracket_ok &= (np.log(kk / 2.0) + w.log_gamma_sq(kk)
                           >= np.log(4.0 * kk * kk) + w.log_gamma_sq(kk - 1))
    rows.append(IdentityReport(
        name=f"bracket coefficients nonnegative (N={N})", left=0.0, right=0.0,
        residual=0.0, rel_residual=0.0, tolerance=0.0, passed=bool(bracket_ok),
        resolution={"N": N, "k_max_checked": k_hi + 2}))
    for s in (+1, -1):
        for kk in range(N, k_hi + 1):
            k = s * kk
            e_in = (data.eta_minus if k > 0 else data.eta_plus).get(k, 0.0)
            e_shift = (data.eta_minus if k > 0 else data.eta_plus).get(k + 2 * s, 0.0)
            lhs = (e_in ** 2 + a * kk * data.u.get(k, 0.0) ** 2
                   + (kk / 2.0) * data.kappa_u.get(k, 0.0) ** 2)
            rhs = (2.0 * data.fu.get(k + s, 0.0) ** 2
                   + 4.0 * e_shift ** 2
                   + 4.0 * (kk + 1) ** 2 * data.kappa_u.get(k + s, 0.0) ** 2)
            if step_reports or lhs > rhs * (1.0 + 1e-9):
                rows.append(IdentityReport.from_bound(
                    f"ladder transfer (k={k})", lhs, rhs, 1e-9,
                    resolution={"k": k}))
    log_lhs = np.log(a) + logsumexp(_log_terms(w, data.u, lambda k: abs(k) >= N))
    rhs_terms = []
    for k, v in data.fu.items():
        if abs(k) >= N + 1 and v > 0.0:
            rhs_terms.append(w.log_gamma_sq(abs(k) - 1) + 2.0 * np.log(v))
    log_rhs = np.log(2.0) + logsumexp(np.array(rhs_terms) if rhs_terms
                                      else np.array([-np.inf]))
    slack = float(log_lhs - log_rhs)
    summary = IdentityReport(
        name=f"telescoped weighted estimate (N={N})",
        left=float(log_lhs), right=float(log_rhs),
        residual=max(slack, 0.0), rel_residual=max(slack, 0.0),
        tolerance=1e-9,
        passed=bool(log_lhs == -np.inf or slack <= np.log1p(1e-9)),
        resolution={"N": N, "sigma": w.sigma},
        detail={"log_domain": True})
    rows.append(summary)
    return rows, summary


def degree_reduction_check(system: MagneticSystem, u, v, sigma: float,
                           quad=DEFAULT_QUAD,
                           bounds: Optional[NegativityBounds] = None,
                           tolerance: float = 1e-9):
    """If Fu = v and deg(v) = m, certify the tail of u beyond m is
    controlled: for every N > m the weighted tail estimate holds with an
    empty forcing tail contribution above deg(v), forcing the weighted
    mass of u above m to be controlled by modes near m."""
    if bounds is None:
        bounds = negativity_bounds(system)
        if not isinstance(bounds, NegativityBounds):
            raise PreconditionError(f"curvature not negatively pinched: {bounds}")
    data = harvest_mode_data(system, u, quad)
    vspec = fourier.ModeSpectrum.from_function(system, v, quad)
    m = vspec.degree()
    fu = apply_F(system, u)
    mismatch = norm(system, fu - v, quad)
    if mismatch > 1e-8 * max(vspec.total, 1e-300):
        raise PreconditionError(f"Fu != v (residual {mismatch:.3e})")
    rows = []
    for N in range(max(m, 2), max(m, 2) + 3):
        rows.append(carleman_estimate(system, u, sigma, N, quad, bounds,
                                      data=data, tolerance=tolerance))
    return rows, m


# -- second-order contraction chain ------------------------------------------

def contraction_chain(system: MagneticSystem, y, sigma: float, N: int,
                      quad=DEFAULT_QUAD,
                      bounds: Optional[NegativityBounds] = None,
                      tolerance: float = 1e-9):
    """Chains the tail estimate through v = F y and w = F v:

      tail_N(y) <= (2/(a e^sigma)) tail_{N+1}(v)
                <= (4/(a^2 e^{2sigma})) tail_{N+2}(w)

    and reports the closing constant 16 b^2 / (a^2 e^{2 sigma}) that a
    bounded-coefficient substitution ||w_k|| <= 2 b ||y_k|| would yield,
    which is < 1 once sigma > log(4b/a)."""
    if bounds is None:
        bounds = negativity_bounds(system)
        if not isinstance(bounds, NegativityBounds):
            raise PreconditionError(f"curvature not negatively pinched: {bounds}")
    a, b = bounds.a, bounds.b
    v = apply_F(system, y)
    rows = []
    r1 = carleman_estimate(system, y, sigma, N, quad, bounds, tolerance=tolerance)
    r2 = carleman_estimate(system, v, sigma, N + 1, quad, bounds,
                           tolerance=tolerance)
    rows += [r1, r2]
    # direct two-step bound
    dy = harvest_mode_data(system, y, quad)
    w = make_weights(sigma, max(64, dy.degree + 6))
    wdata = harvest_mode_data(system, v, quad)  # wdata.fu holds ||(F^2 y)_k||
    log_lhs = logsumexp(_log_terms(w, dy.u, lambda k: abs(k) >= N))
    log_rhs = (np.log(4.0) - 2.0 * np.log(a) - 2.0 * sigma
               + logsumexp(_log_terms(w, wdata.fu, lambda k: abs(k) >= N + 2)))
    chained = IdentityReport(
        name=f"two-step chained tail estimate (N={N})",
        left=float(log_lhs), right=float(log_rhs),
        residual=max(float(log_lhs - log_rhs), 0.0),
        rel_residual=max(float(log_lhs - log_rhs), 0.0),
        tolerance=tolerance,
        passed=bool(log_lhs <= log_rhs + np.log1p(tolerance)
                    or log_lhs == -np.inf),
        resolution={"sigma": sigma, "N": N},
        detail={"log_domain": True})
    rows.append(chained)
    closing = 16.0 * b * b / (a * a * np.exp(2.0 * sigma))
    rows.append(IdentityReport.from_bound(
        "closing contraction constant 16 b^2 / (a^2 e^{2 sigma})",
        closing, 1.0, 0.0,
        resolution={"sigma": sigma, "a": a, "b": b},
        detail={"sigma_threshold": float(np.log(4.0 * b / a))}))
    return rows
