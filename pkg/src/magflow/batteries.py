"""Named verification batteries: bundles of identity and inequality
checks runnable over a configured system with a seeded function battery.

Each battery is a callable ``(system, cfg, rng) -> list[IdentityReport]``
registered under a stable name; the CLI and the test suite both drive
verification through this table.
"""

from __future__ import annotations

import numpy as np

from . import deform, identities, operators, orbits
from .reports import IdentityReport
from .surfaces import negativity_bounds

__all__ = ["BATTERIES", "run_battery", "battery_descriptions"]


def _certified_bounds(system):
    b = negativity_bounds(system)
    if not hasattr(b, "a"):
        raise identities.PreconditionError(
            "magnetic curvature is not certified negative "
            f"(witness {b.point}, value {b.value:.3e})")
    return b


def _battery_functions(system, cfg, rng):
    return [operators.random_function(system, rng, degree=cfg["degree"],
                                      n=cfg["n_grid"])
            for _ in range(cfg["n_functions"])]


def _quad(cfg):
    return tuple(cfg["quad"])


def _structural(system, cfg, rng):
    rows = []
    for i, u in enumerate(_battery_functions(system, cfg, rng)):
        for rep in identities.structural_relations(system, u, _quad(cfg)):
            rep.detail["function"] = i
            rows.append(rep)
    return rows


def _pestov(system, cfg, rng):
    rows = []
    for i, u in enumerate(_battery_functions(system, cfg, rng)):
        for rep in (identities.pestov_identity(system, u, _quad(cfg)),
                    identities.pestov_corollary(system, u, _quad(cfg))):
            rep.detail["function"] = i
            rows.append(rep)
    return rows


def _riccati(system, cfg, rng):
    rows = []
    quad = _quad(cfg)
    us = _battery_functions(system, cfg, rng)
    if system.backend == "bolza" and system.kappa.is_constant:
        kap = system.kappa.constant
        if abs(kap) < 1.0:
            r = float(np.sqrt(1.0 - kap * kap))
            orb = orbits.find_periodic_orbit(system, (1,))
            for sign in (+1, -1):
                ts, rs, defect = identities.riccati_solve(system, orb, sign)
                dev = float(np.max(np.abs(rs - sign * r)))
                rows.append(IdentityReport(
                    name=f"periodic Riccati solution (branch {sign:+d})",
                    left=float(np.mean(rs)), right=sign * r, residual=dev,
                    rel_residual=dev / r, tolerance=1e-8,
                    passed=dev <= 1e-8 and defect <= 1e-10,
                    resolution={"n_samples": len(ts)},
                    detail={"period_map_defect": defect}))
            for i, u in enumerate(us):
                rep = identities.riccati_norm_identity(system, u, r, quad)
                rep.detail["function"] = i
                rows.append(rep)
    # nonnegativity of the left side holds on every backend
    km = identities._kmag(system, cfg["n_grid"] if system.backend == "torus"
                          else None, quad)
    for i, u in enumerate(us):
        fu = operators.apply_F(system, u)
        left = (operators.norm(system, fu, quad) ** 2
                - operators.inner_product(system, km.mul(u), u, quad).real)
        scale = max(operators.norm(system, u, quad) ** 2, 1e-300)
        rows.append(IdentityReport(
            name="nonnegativity of ||Fu||^2 - (Kmag u, u)",
            left=left, right=0.0, residual=max(-left, 0.0),
            rel_residual=max(-left, 0.0) / scale, tolerance=1e-9,
            passed=left >= -1e-9 * scale,
            resolution={"quad": list(quad)} if system.backend == "bolza"
            else {"n": cfg["n_grid"]}, detail={"function": i}))
    return rows


def _mode_identity(system, cfg, rng):
    rows = []
    quad = _quad(cfg)
    for i, u in enumerate(_battery_functions(system, cfg, rng)):
        for k in sorted(identities.fourier.mode_numbers(u)):
            try:
                rep = identities.mode_identity(system, u, k, quad)
            except identities.PreconditionError:
                continue
            rep.detail["function"] = i
            rows.append(rep)
    return rows


def _gk(system, cfg, rng):
    rows = []
    quad = _quad(cfg)
    bounds = _certified_bounds(system)
    for i, u in enumerate(_battery_functions(system, cfg, rng)):
        for k in sorted(identities.fourier.mode_numbers(u)):
            if k == 0:
                continue
            reps, _ = identities.gk_inequalities(system, u, k, bounds, quad)
            for rep in reps:
                rep.detail["function"] = i
                rows.append(rep)
    return rows


def _weights(system, cfg, rng):
    from .weights import make_weights

    rows = []
    for sigma in cfg["sigma_grid"]:
        w = make_weights(float(sigma), cfg["k_max"])
        cert = w.certificate()
        rows.append(IdentityReport(
            name=f"weight recurrence certificate (sigma={sigma})",
            left=0.0, right=0.0, residual=0.0, rel_residual=0.0,
            tolerance=0.0, passed=cert.ok,
            resolution={"k_max": cfg["k_max"]},
            detail={"sigma": float(sigma)}))
    return rows


def _carleman(system, cfg, rng):
    rows = []
    quad = _quad(cfg)
    sigma = float(cfg["sigma"])
    for i, u in enumerate(_battery_functions(system, cfg, rng)):
        rep = identities.carleman_estimate(system, u, sigma,
                                           N=cfg["tail_start"], quad=quad)
        rep.detail["function"] = i
        rows.append(rep)
        data = identities.harvest_mode_data(system, u, quad)
        from .weights import make_weights
        k_hi = max((abs(k) for k in data.u), default=2) + 2
        w = make_weights(sigma, max(k_hi, 4))
        bounds = _certified_bounds(system)
        engine_rows, summary = identities.weighted_summation_engine(
            data, w, cfg["tail_start"], bounds.a)
        for rep in engine_rows + [summary]:
            rep.detail["function"] = i
            rows.append(rep)
    return rows


def _contraction(system, cfg, rng):
    rows = []
    quad = _quad(cfg)
    bounds = _certified_bounds(system)
    sigma = max(float(cfg["sigma"]),
                float(np.log(4.0 * bounds.b / bounds.a)) + 0.05)
    for i, u in enumerate(_battery_functions(system, cfg, rng)):
        for rep in identities.contraction_chain(system, u, sigma,
                                                cfg["tail_start"], quad=quad):
            rep.detail["function"] = i
            rows.append(rep)
    return rows


def _deformation(system, cfg, rng):
    rows = []
    if system.backend != "bolza" or not system.kappa.is_constant:
        return rows
    fam = deform.kappa_family(system, 1.0)
    orb = orbits.find_periodic_orbit(system, (1,))
    vf = deform.variational_field(fam, orb, h_s=cfg["h_s"], n_samples=64)
    rows.append(deform.jacobi_residual(system, orb, vf))
    km = float(system.magnetic_curvature(*orb.states[0]))
    dev = float(np.max(np.abs(km * vf.y - vf.f0)))
    rows.append(IdentityReport(
        name="constant-perturbation closed form (Kmag y = f0)",
        left=km * float(np.mean(vf.y)), right=float(vf.f0[0]),
        residual=dev, rel_residual=dev / max(abs(vf.f0[0]), 1.0),
        tolerance=1e-5, passed=dev <= 1e-5,
        resolution={"h_s": cfg["h_s"]}, detail={}))
    return rows


BATTERIES = {
    "structural": (
        "frame bracket relations [V,F], [V,Xperp], [F,Xperp] as operator "
        "residuals on random phase functions", _structural),
    "pestov": (
        "integral identity ||FVu||^2 - (Kmag Vu, Vu) + ||Fu||^2 = ||VFu||^2 "
        "and its corollary", _pestov),
    "riccati": (
        "periodic solutions of r' + r^2 + Kmag = 0 along closed orbits; "
        "norm identity; nonnegativity of ||Fu||^2 - (Kmag u, u)", _riccati),
    "mode-identity": (
        "single-fiber-mode specialization of the integral identity",
        _mode_identity),
    "gk": (
        "per-mode ladder inequalities bounding the raising term by the "
        "lowering term plus curvature-pinching contributions", _gk),
    "weights": (
        "log-domain recurrence certificate for the exponential-factorial "
        "weight sequence", _weights),
    "carleman": (
        "shifted-weight tail estimate and the weighted summation engine "
        "reproducing it from harvested mode norms", _carleman),
    "contraction": (
        "two chained tail estimates on (y, Fy) with the closing constant "
        "16 b^2 / (a^2 e^{2 sigma}) <= 1", _contraction),
    "deformation": (
        "variational field of an intensity perturbation and its "
        "non-homogeneous Jacobi system along a closed orbit", _deformation),
}


def battery_descriptions():
    return {name: desc for name, (desc, _) in BATTERIES.items()}


def run_battery(name, system, cfg, rng):
    if name not in BATTERIES:
        raise KeyError(f"unknown battery {name!r}; "
                       f"known: {', '.join(sorted(BATTERIES))}")
    return BATTERIES[name][1](system, cfg, rng)
