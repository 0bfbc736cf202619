"""Phase functions and frame operators on the Bolza surface.

A fiber mode ``f_k`` is a finite sum of *equivariant bump terms*.  Each
term is generated from a compactly supported radial bump seeded at a
center ``c`` inside the fundamental octagon and pushed around by the
deck group: the translate by ``B`` contributes

    b(q(z, B c)) * exp(i k arg C'(z)),   C := B^{-1},

where ``q = cosh(d_hyp) - 1`` is the Mobius-invariant radial coordinate
and the phase factor carries the fiber cocycle of the deck action, so
the finite translate sum is exactly Gamma-equivariant (no truncation:
the bump support is compact and only finitely many translates meet the
evaluation region).

Operators are applied *symbolically*: every term references a sympy
expression in the chart variables and the term parameters, and the
ladder operators

    eta_pm f_k = (1/2) e^{-lam} [ (d_x -/+ i d_y) f_k
                 + (-/+ k lam_x + i k lam_y) f_k ]   (mode k -> k pm 1)

produce new expressions by exact differentiation.  Expressions are
lambdified once and cached, then evaluated vectorized over quadrature
nodes and terms, so identity residuals are limited only by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .surfaces import (
    BackendMismatch,
    BumpField,
    HyperbolicOctagonSurface,
    MagneticSystem,
    _mobius,
    hyperbolic_distance,
)

__all__ = ["HypPhaseFunction", "TermBlock", "magnetic_curvature_function"]

TWO_PI = 2.0 * math.pi

_x, _y = sp.symbols("x y", real=True)
_k = sp.Symbol("k", real=True)

# parameter sets for up to two bump factors in a product
_SET1 = sp.symbols("cx cy qr aR aI bR bI", real=True)
_SET2 = sp.symbols("cx2 cy2 qr2 aR2 aI2 bR2 bI2", real=True)

_r2 = _x * _x + _y * _y
_LAM = sp.log(2) - sp.log(1 - _r2)
_LAM_X = sp.diff(_LAM, _x)
_LAM_Y = sp.diff(_LAM, _y)

_PROFILE_POWER = BumpField.PROFILE_POWER


def _bump_expr(cx, cy, qr):
    q = 2 * ((_x - cx) ** 2 + (_y - cy) ** 2) / ((1 - _r2) * (1 - cx**2 - cy**2))
    t = 1 - q / qr
    return sp.Piecewise((t**_PROFILE_POWER, q < qr), (0, True))


def _phase_expr(aR, aI, bR, bI, mode):
    # D = conj(beta) z + conj(alpha) for C = [[alpha, beta], [conj beta, conj alpha]]
    ReD = bR * _x + bI * _y + aR
    ImD = bR * _y - bI * _x - aI
    return sp.exp(sp.I * mode * (-2) * sp.atan2(ImD, ReD))


def _atom_expr():
    cx, cy, qr, aR, aI, bR, bI = _SET1
    return _bump_expr(cx, cy, qr) * _phase_expr(aR, aI, bR, bI, _k)


def _base_factor_expr():
    # mode-0 bump in the second parameter set (no phase: k = 0)
    cx, cy, qr, *_rest = _SET2
    return _bump_expr(cx, cy, qr)


_ATOM = _atom_expr()
_BASE2 = _base_factor_expr()

_LAMBDIFY_CACHE: dict = {}


def _evaluator(expr, syms):
    key = (expr, syms)
    fn = _LAMBDIFY_CACHE.get(key)
    if fn is None:
        fn = sp.lambdify((_x, _y, _k, *syms), expr, modules="numpy", cse=True)
        _LAMBDIFY_CACHE[key] = fn
    return fn


@dataclass
class TermBlock:
    """Terms sharing one symbolic template: ``sum_j w_j expr(x, y; p_j)``."""

    expr: sp.Expr
    syms: tuple  # parameter symbols, columns of params
    params: np.ndarray  # (T, len(syms)) float
    weights: np.ndarray  # (T,) complex
    k: int  # fiber mode of every term in the block

    def _support_mask(self, x, y):
        """(N, T) mask of node/term pairs inside every bump factor's support."""
        mask = None
        one_m_z2 = 1.0 - (x * x + y * y)
        # each bump factor occupies 7 consecutive parameter columns
        for off in range(0, len(self.syms), len(_SET1)):
            cx = self.params[:, off + 0]
            cy = self.params[:, off + 1]
            qr = self.params[:, off + 2]
            d2 = (x[:, None] - cx) ** 2 + (y[:, None] - cy) ** 2
            q = 2.0 * d2 / (one_m_z2[:, None] * (1.0 - cx * cx - cy * cy))
            m = q < qr
            mask = m if mask is None else (mask & m)
        return mask

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        T = self.params.shape[0]
        if T == 0:
            return np.zeros(len(x), dtype=complex)
        fn = _evaluator(self.expr, self.syms)
        if self.syms and len(self.syms) >= len(_SET1):
            mask = self._support_mask(x, y)
        else:
            mask = None
        if mask is None:
            cols = [self.params[:, j] for j in range(self.params.shape[1])]
            vals = fn(x[:, None], y[:, None], float(self.k), *cols)
            vals = np.broadcast_to(np.asarray(vals, dtype=complex), (len(x), T))
            return vals @ self.weights
        ii, jj = np.nonzero(mask)
        out = np.zeros(len(x), dtype=complex)
        if len(ii):
            cols = [self.params[jj, j] for j in range(self.params.shape[1])]
            vals = np.asarray(fn(x[ii], y[ii], float(self.k), *cols), dtype=complex)
            np.add.at(out, ii, vals * self.weights[jj])
        return out

    def scaled(self, s):
        return TermBlock(self.expr, self.syms, self.params, self.weights * s, self.k)

    def eta(self, sign: int):
        e = self.expr
        new = (
            sp.Rational(1, 2)
            * sp.exp(-_LAM)
            * (
                sp.diff(e, _x)
                - sp.I * sign * sp.diff(e, _y)
                + (-sign * _k * _LAM_X + sp.I * _k * _LAM_Y) * e
            )
        )
        # re-anchor the mode symbol so that k always denotes the block's own mode
        new = new.subs(_k, _k - sign)
        return TermBlock(new, self.syms, self.params, self.weights.copy(), self.k + sign)

    def conj(self):
        # templates are real bump factors times exp(i k phi), so conjugation
        # flips the sign of the mode
        cexpr = sp.conjugate(self.expr).subs(_k, -_k)
        return TermBlock(cexpr, self.syms, self.params, np.conj(self.weights), -self.k)

    def mul_block(self, other: "TermBlock"):
        """Product with a block written in the second parameter set."""
        if any(s in other.expr.free_symbols for s in _SET1):
            raise NotImplementedError(
                "products of more than two bump factors are not supported"
            )
        expr = self.expr * other.expr
        syms = self.syms + other.syms
        t1, t2 = self.params.shape[0], other.params.shape[0]
        p1 = np.repeat(self.params, t2, axis=0)
        p2 = np.tile(other.params, (t1, 1))
        params = np.hstack([p1, p2]) if syms else np.zeros((t1 * t2, 0))
        w = (self.weights[:, None] * other.weights[None, :]).reshape(-1)
        return TermBlock(expr, syms, params, w, self.k + other.k)


class HypPhaseFunction:
    """Finite-degree function on the unit tangent bundle of the Bolza surface."""

    backend = "bolza"

    def __init__(self, surface: HyperbolicOctagonSurface, blocks=()):
        self.surface = surface
        self.blocks: list[TermBlock] = [b for b in blocks if len(b.weights)]

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, surface, c):
        blk = TermBlock(
            sp.Integer(1),
            (),
            np.zeros((1, 0)),
            np.array([complex(c)]),
            0,
        )
        return cls(surface, [blk])

    @classmethod
    def atom(cls, surface, center, rho, k, weight=1.0, reach_margin=0.8):
        """Gamma-equivariant bump atom in fiber mode ``k``."""
        center = complex(center)
        qr = math.cosh(rho) - 1.0
        reach = surface.circumradius + rho + reach_margin
        ball = surface.group_ball(round(reach + 1.6, 1))
        rows = []
        for B, _word in ball:
            cb = _mobius(B, center)
            if float(hyperbolic_distance(cb, 0.0)) > reach:
                continue
            C = np.linalg.inv(B)
            alpha, beta = C[0, 0], C[0, 1]
            rows.append(
                [cb.real, cb.imag, qr, alpha.real, alpha.imag, beta.real, beta.imag]
            )
        params = np.array(rows, dtype=float)
        weights = np.full(len(rows), complex(weight))
        blk = TermBlock(_ATOM, _SET1, params, weights, int(k))
        return cls(surface, [blk])

    @classmethod
    def random(cls, surface, rng, degree=2, n_atoms=2, real=False):
        """Seeded random finite-degree function built from bump atoms."""
        u = cls(surface, [])
        ks = range(0, degree + 1) if real else range(-degree, degree + 1)
        for k in ks:
            for _ in range(n_atoms):
                r_c = rng.uniform(0.0, 1.2)
                phi_c = rng.uniform(0.0, TWO_PI)
                c = math.tanh(r_c / 2.0) * complex(math.cos(phi_c), math.sin(phi_c))
                # wide atoms: narrow bumps are under-resolved by the
                # reference quadrature and spoil identity residuals
                rho = rng.uniform(0.8, 1.2)
                w = rng.normal() + 1j * rng.normal()
                u = u + cls.atom(surface, c, rho, k, w)
        if real:
            u = u + u.conj()
        return u

    # -- algebra ------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, HypPhaseFunction):
            raise BackendMismatch("expected a Bolza phase function")
        if other.surface is not self.surface:
            raise BackendMismatch("functions live on different surfaces")

    def __add__(self, other):
        self._check(other)
        return HypPhaseFunction(self.surface, self.blocks + other.blocks)

    def __sub__(self, other):
        return self + (other * (-1.0))

    def __mul__(self, s):
        return HypPhaseFunction(self.surface, [b.scaled(s) for b in self.blocks])

    __rmul__ = __mul__

    def conj(self):
        return HypPhaseFunction(self.surface, [b.conj() for b in self.blocks])

    def mode_ks(self):
        return sorted({b.k for b in self.blocks})

    def mode(self, k):
        return HypPhaseFunction(self.surface, [b for b in self.blocks if b.k == k])

    # -- operators ----------------------------------------------------------

    def apply_V(self, system=None):
        return HypPhaseFunction(
            self.surface, [b.scaled(1j * b.k) for b in self.blocks if b.k != 0]
        )

    def apply_eta(self, system, sign: int):
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        return HypPhaseFunction(self.surface, [b.eta(sign) for b in self.blocks])

    def apply_X(self, system):
        return self.apply_eta(system, +1) + self.apply_eta(system, -1)

    def apply_Xperp(self, system):
        return (self.apply_eta(system, +1) - self.apply_eta(system, -1)) * 1j

    def mul_base(self, system, base: BumpField):
        """Multiply by a Gamma-invariant base function (constant + bumps)."""
        out = [b.scaled(base.constant) for b in self.blocks] if base.constant else []
        if base.atoms:
            for c, rho, w in base.atoms:
                fac = _kappa_block(self.surface, c, rho, w)
                for b in self.blocks:
                    out.append(b.mul_block(fac))
        return HypPhaseFunction(self.surface, out)

    def apply_F(self, system):
        if system.backend != "bolza":
            raise BackendMismatch("system is not a Bolza system")
        return self.apply_X(system) + self.apply_V(system).mul_base(
            system, system.kappa
        )

    def mul(self, other: "HypPhaseFunction"):
        """Product with another phase function whose blocks are plain atoms."""
        self._check(other)
        out = []
        for b2 in other.blocks:
            for b1 in self.blocks:
                if b2.syms == ():
                    t = b1.scaled(b2.weights[0])
                    t.k = b1.k + b2.k
                    out.append(t)
                else:
                    shifted = TermBlock(
                        b2.expr.subs(dict(zip(_SET1, _SET2))),
                        _SET2,
                        b2.params,
                        b2.weights,
                        b2.k,
                    )
                    out.append(b1.mul_block(shifted))
        return HypPhaseFunction(self.surface, out)

    # -- evaluation and pairing ---------------------------------------------

    def mode_values(self, x, y):
        """Dict k -> values of the mode component at base points (cached)."""
        cached = getattr(self, "_mv_cache", None)
        if cached is not None and cached[0] is x and cached[1] is y:
            return cached[2]
        out: dict[int, np.ndarray] = {}
        for b in self.blocks:
            v = b.evaluate(x, y)
            out[b.k] = out.get(b.k, 0.0) + v
        self._mv_cache = (x, y, out)
        return out

    def evaluate(self, x, y, theta):
        vals = self.mode_values(x, y)
        theta = np.asarray(theta, dtype=float)
        out = 0.0
        for k, v in vals.items():
            out = out + v * np.exp(1j * k * theta)
        return out

    def inner(self, system, other, quad=(20, 20)) -> complex:
        """Liouville pairing via octagon quadrature (fiber integral exact)."""
        self._check(other)
        xq, yq, w = _quad_nodes(self.surface, quad)
        mu = self.mode_values(xq, yq)
        mv = other.mode_values(xq, yq)
        tot = 0.0 + 0.0j
        for k, fu in mu.items():
            fv = mv.get(k)
            if fv is None:
                continue
            tot += np.sum(w * fu * np.conj(fv))
        return TWO_PI * tot

    def norm(self, system, quad=(20, 20)) -> float:
        return math.sqrt(max(self.inner(system, self, quad).real, 0.0))

    def sup_norm(self, quad=(20, 20)) -> float:
        xq, yq, _ = _quad_nodes(self.surface, quad)
        vals = self.mode_values(xq, yq)
        return max((float(np.max(np.abs(v))) for v in vals.values()), default=0.0)

    def c2_proxy(self, system, quad=(20, 20)) -> float:
        vals = [self.sup_norm(quad)]
        for s in (+1, -1):
            d1 = self.apply_eta(system, s)
            vals.append(d1.sup_norm(quad))
            for s2 in (+1, -1):
                vals.append(d1.apply_eta(system, s2).sup_norm(quad))
        return max(vals)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self):
        return {
            "backend": "bolza",
            "blocks": [
                {
                    "k": b.k,
                    "syms": [str(s) for s in b.syms],
                    "params": b.params.tolist(),
                    "weights_re": b.weights.real.tolist(),
                    "weights_im": b.weights.imag.tolist(),
                }
                for b in self.blocks
                if b.syms in ((), _SET1)
            ],
        }


_QUAD_NODES: dict = {}


def _quad_nodes(surface, quad):
    """Stable (x, y, w) node arrays so per-function caches can key on id()."""
    key = (id(surface), quad)
    if key not in _QUAD_NODES:
        z, w = surface.quadrature(*quad)
        _QUAD_NODES[key] = (np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag), w)
    return _QUAD_NODES[key]


_KAPPA_BLOCKS: dict = {}


def _kappa_block(surface, center, rho, weight) -> TermBlock:
    """Mode-0 invariant bump in the second parameter set (product factor)."""
    key = (id(surface), complex(center), float(rho), float(weight))
    blk = _KAPPA_BLOCKS.get(key)
    if blk is not None:
        return blk
    center = complex(center)
    qr = math.cosh(rho) - 1.0
    reach = surface.circumradius + rho + 0.8
    ball = surface.group_ball(round(reach + 1.6, 1))
    rows = []
    for B, _word in ball:
        cb = _mobius(B, center)
        if float(hyperbolic_distance(cb, 0.0)) <= reach:
            rows.append([cb.real, cb.imag, qr, 0.0, 0.0, 0.0, 0.0])
    blk = TermBlock(
        _BASE2,
        _SET2,
        np.array(rows, dtype=float),
        np.full(len(rows), complex(weight)),
        0,
    )
    _KAPPA_BLOCKS[key] = blk
    return blk


def magnetic_curvature_function(system: MagneticSystem) -> HypPhaseFunction:
    """Kmag = K - Xperp(kappa) + kappa^2 as a phase function (modes -1..1)."""
    surface = system.metric
    kap = system.kappa
    base_c = -1.0 + kap.constant**2
    out = HypPhaseFunction.constant(surface, base_c)
    if kap.atoms:
        katoms = HypPhaseFunction(surface, [])
        for c, rho, w in kap.atoms:
            katoms = katoms + HypPhaseFunction.atom(surface, c, rho, 0, w)
        # kappa^2 - const^2 = 2 c kappa_atoms + kappa_atoms^2
        out = out + katoms * (2.0 * kap.constant) + katoms.mul(katoms)
        out = out - katoms.apply_Xperp(system)
    return out
