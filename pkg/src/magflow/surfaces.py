"""Surface backends, magnetic systems, and curvature evaluation.

Two concrete closed oriented surfaces are supported:

* a conformal torus ``g = e^{2 lam}(dx^2 + dy^2)`` on the 2pi-periodic
  square, with ``lam`` a real trigonometric polynomial, and
* the Bolza surface, the genus-2 quotient of the hyperbolic disk by the
  regular-octagon Fuchsian group (constant curvature -1).

Both backends use isothermal coordinates, so the unit tangent bundle is
charted by ``(x, y, theta)`` with ``theta`` the fiber angle measured
against the ``d/dx`` direction.  The magnetic intensity ``kappa`` lives in
the backend's natural function basis (trig polynomial on the torus, a
constant plus a finite sum of invariant radial bumps on Bolza).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "TrigField",
    "ConformalTorusMetric",
    "HyperbolicOctagonSurface",
    "BumpField",
    "MagneticSystem",
    "PhasePoint",
    "NegativityBounds",
    "NegativityRefusal",
    "negativity_bounds",
    "BOLZA_TRACE",
    "BOLZA_SYSTOLE",
]

# |trace| of each octagon side pairing; systole = 2 arccosh(|tr|/2).
BOLZA_TRACE = 2.0 * (1.0 + math.sqrt(2.0))
BOLZA_SYSTOLE = 2.0 * math.acosh(1.0 + math.sqrt(2.0))


class DomainError(ValueError):
    """A point fell outside the chart domain of a backend."""


class BackendMismatch(TypeError):
    """An operand was built for a different surface backend."""


# ---------------------------------------------------------------------------
# Trigonometric scalar fields on the 2pi-periodic square.
# ---------------------------------------------------------------------------


class TrigField:
    """Real scalar field ``sum_{mn} c_mn e^{i(mx+ny)}`` on the torus.

    Coefficients are stored sparsely and kept conjugate-symmetric so the
    field is real-valued.  Used for the conformal factor ``lam``, the
    magnetic intensity ``kappa``, and deformation directions.
    """

    def __init__(self, coeffs=None):
        self.coeffs: dict[tuple[int, int], complex] = {}
        if coeffs:
            for (m, n), c in coeffs.items():
                self.coeffs[(m, n)] = self.coeffs.get((m, n), 0.0) + complex(c)
        self._symmetrize()

    def _symmetrize(self):
        sym = {}
        for (m, n), c in self.coeffs.items():
            cc = self.coeffs.get((-m, -n), 0.0)
            sym[(m, n)] = 0.5 * (c + np.conj(cc))
        self.coeffs = {k: v for k, v in sym.items() if v != 0}

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): float(c)})

    @classmethod
    def from_cos(cls, terms):
        """Build from ``{(m, n): amplitude}`` meaning ``a cos(mx+ny)``."""
        coeffs = {}
        for (m, n), a in terms.items():
            coeffs[(m, n)] = coeffs.get((m, n), 0.0) + a / 2.0
            coeffs[(-m, -n)] = coeffs.get((-m, -n), 0.0) + a / 2.0
        return cls(coeffs)

    @classmethod
    def from_sin(cls, terms):
        coeffs = {}
        for (m, n), a in terms.items():
            coeffs[(m, n)] = coeffs.get((m, n), 0.0) + a / 2.0j
            coeffs[(-m, -n)] = coeffs.get((-m, -n), 0.0) - a / 2.0j
        return cls(coeffs)

    @property
    def bandwidth(self) -> int:
        return max((max(abs(m), abs(n)) for (m, n) in self.coeffs), default=0)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = TrigField.constant(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return TrigField(out)

    def __mul__(self, s: float):
        return TrigField({k: c * s for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def _apply(self, x, y, weight):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (m, n), c in self.coeffs.items():
            out += weight(m, n) * c * np.exp(1j * (m * x + n * y))
        return out.real

    def value(self, x, y):
        return self._apply(x, y, lambda m, n: 1.0)

    def dx(self, x, y):
        return self._apply(x, y, lambda m, n: 1j * m)

    def dy(self, x, y):
        return self._apply(x, y, lambda m, n: 1j * n)

    def laplacian(self, x, y):
        return self._apply(x, y, lambda m, n: -(m * m + n * n))

    def shift(self, sx, sy):
        """Pullback by the translation ``(x, y) -> (x + sx, y + sy)``."""
        return TrigField(
            {
                (m, n): c * cmath.exp(1j * (m * sx + n * sy))
                for (m, n), c in self.coeffs.items()
            }
        )


@dataclass(frozen=True)
class ConformalTorusMetric:
    """Metric ``e^{2 lam}(dx^2 + dy^2)`` on the 2pi-periodic square."""

    lam: TrigField = field(default_factory=TrigField.zero)

    @property
    def is_flat(self) -> bool:
        return not self.lam.coeffs

    def gaussian_curvature(self, x, y):
        # K = -e^{-2 lam} Lap(lam) in isothermal coordinates.
        lam = self.lam.value(x, y)
        return -np.exp(-2.0 * lam) * self.lam.laplacian(x, y)


# ---------------------------------------------------------------------------
# The Bolza surface.
# ---------------------------------------------------------------------------


def _mobius(M, z):
    return (M[0, 0] * z + M[0, 1]) / (M[1, 0] * z + M[1, 1])


def _mobius_deriv(M, z):
    # det M = 1 for all deck transformations used here.
    return 1.0 / (M[1, 0] * z + M[1, 1]) ** 2


def hyperbolic_distance(z, w):
    """Distance in the disk model (curvature -1)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    num = 2.0 * np.abs(z - w) ** 2
    den = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2)
    return np.arccosh(1.0 + num / den)


class HyperbolicOctagonSurface:
    """The Bolza surface: regular-octagon quotient of the hyperbolic disk.

    The eight side pairings are the hyperbolic translations
    ``T_k = R_k T_0 R_k^{-1}`` where ``R_k`` rotates by ``k pi/4`` and
    ``T_0`` translates along the real axis by the systole length.  They
    identify opposite sides of the regular octagon whose side midpoints
    sit at angles ``k pi/4``.  The surface-group relation is

        ``T0 T1^-1 T2 T3^-1 T0^-1 T1 T2^-1 T3 = 1``.
    """

    #: relation word as (generator index, exponent sign) pairs
    RELATION = ((0, 1), (1, -1), (2, 1), (3, -1), (0, -1), (1, 1), (2, -1), (3, 1))

    def __init__(self):
        ch = 1.0 + math.sqrt(2.0)
        sh = math.sqrt(ch * ch - 1.0)
        T0 = np.array([[ch, sh], [sh, ch]], dtype=complex)
        self.disk_generators = []
        for k in range(8):
            phi = k * math.pi / 4.0
            R = np.diag([cmath.exp(0.5j * phi), cmath.exp(-0.5j * phi)])
            self.disk_generators.append(R @ T0 @ np.linalg.inv(R))
        # real SL(2, R) picture via the Cayley transform to the half-plane
        C = np.array([[1.0, -1.0j], [1.0, 1.0j]], dtype=complex) / math.sqrt(2.0)
        Cinv = np.linalg.inv(C)
        self.group_generators = [
            np.real(Cinv @ G @ C) for G in self.disk_generators
        ]

        # octagon geometry: inradius = systole/2, circumradius arccosh(3+2 sqrt 2)
        self.inradius = BOLZA_SYSTOLE / 2.0
        self.circumradius = math.acosh(3.0 + 2.0 * math.sqrt(2.0))
        p = math.tanh(self.inradius / 2.0)
        self._side_center = (1.0 + p * p) / (2.0 * p)  # euclidean circle center
        self.fundamental_domain = [
            math.tanh(self.circumradius / 2.0)
            * cmath.exp(1j * (math.pi / 8.0 + k * math.pi / 4.0))
            for k in range(8)
        ]
        self.curvature = -1.0

    # -- chart / domain -----------------------------------------------------

    def boundary_radius(self, phi):
        """Hyperbolic radius of the octagon boundary at polar angle phi."""
        phi = np.asarray(phi, dtype=float)
        loc = np.mod(phi + math.pi / 8.0, math.pi / 4.0) - math.pi / 8.0
        c = self._side_center
        rho = c * np.cos(loc) - np.sqrt((c * np.cos(loc)) ** 2 - 1.0)
        return 2.0 * np.arctanh(rho)

    def contains(self, z, tol=1e-12):
        z = np.asarray(z, dtype=complex)
        r = 2.0 * np.arctanh(np.minimum(np.abs(z), 1.0 - 1e-15))
        return r <= self.boundary_radius(np.angle(z)) + tol

    def gaussian_curvature(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= 1.0):
            raise DomainError("point outside the unit disk")
        return np.full(z.shape, -1.0)

    # conformal factor lam = log(2/(1-|z|^2)) and derivatives
    @staticmethod
    def lam(x, y):
        return np.log(2.0) - np.log1p(-(x * x + y * y))

    @staticmethod
    def lam_grad(x, y):
        d = 1.0 - (x * x + y * y)
        return 2.0 * x / d, 2.0 * y / d

    # -- group machinery ----------------------------------------------------

    def apply_deck(self, M, z, theta=None):
        """Act on a point (or phase point) of the disk by a deck matrix."""
        zz = _mobius(M, z)
        if theta is None:
            return zz
        dtheta = np.angle(_mobius_deriv(M, z))
        return zz, theta + dtheta

    @lru_cache(maxsize=8)
    def group_ball(self, radius: float, max_word_len: int = 4):
        """Deck transformations moving 0 within hyperbolic ``radius``.

        BFS over reduced words with matrix deduplication; returns a list of
        ``(matrix, word)`` pairs including the identity, ordered by
        discovery.  Words are tuples of signed generator indices (1-based,
        sign = inverse).
        """
        gens = []
        for i, G in enumerate(self.disk_generators):
            gens.append((G, i + 1))
            gens.append((np.linalg.inv(G), -(i + 1)))

        def key(M):
            # projective dedupe: fix sign of the largest entry
            flat = M.reshape(-1)
            j = int(np.argmax(np.abs(flat)))
            M = M * (np.conj(flat[j]) / abs(flat[j]))
            return tuple(np.round(M.reshape(-1), 7).tolist())

        seen = {key(np.eye(2, dtype=complex))}
        out = [(np.eye(2, dtype=complex), ())]
        frontier = [(np.eye(2, dtype=complex), ())]
        for _ in range(max_word_len):
            nxt = []
            for M, word in frontier:
                for G, s in gens:
                    if word and word[-1] == -s:
                        continue
                    M2 = M @ G
                    k = key(M2)
                    if k in seen:
                        continue
                    seen.add(k)
                    w2 = word + (s,)
                    if float(hyperbolic_distance(_mobius(M2, 0.0), 0.0)) <= radius:
                        out.append((M2, w2))
                    # keep expanding even slightly outside the ball so the
                    # BFS can come back in through shorter elements
                    if float(hyperbolic_distance(_mobius(M2, 0.0), 0.0)) <= radius + BOLZA_SYSTOLE:
                        nxt.append((M2, w2))
            frontier = nxt
        return out

    def word_matrix(self, word, disk=True):
        """Matrix of a word given as signed 1-based generator indices."""
        gens = self.disk_generators if disk else self.group_generators
        M = np.eye(2, dtype=complex if disk else float)
        for s in word:
            G = gens[abs(s) - 1]
            M = M @ (G if s > 0 else np.linalg.inv(G))
        return M

    def reduce_to_domain(self, z, theta=None, max_steps=64):
        """Map a disk point into the fundamental octagon by deck moves."""
        moved = True
        steps = 0
        total = np.eye(2, dtype=complex)
        while moved and steps < max_steps:
            moved = False
            if self.contains(z):
                break
            for G in self.disk_generators:
                for M in (np.linalg.inv(G), G):
                    z2 = _mobius(M, z)
                    if abs(z2) < abs(z) - 1e-15:
                        total = M @ total
                        z = z2
                        moved = True
                        break
                if moved:
                    break
            steps += 1
        if theta is None:
            return z
        return self.apply_deck(total, _mobius(np.linalg.inv(total), z), theta)

    # -- quadrature ---------------------------------------------------------

    @lru_cache(maxsize=8)
    def quadrature(self, n_r: int = 24, n_phi: int = 24):
        """Gauss-Legendre nodes/weights over the octagon (hyperbolic area).

        Polar-sector rule: eight sectors, Gauss in angle and in the scaled
        hyperbolic radius, weight ``sinh(r) dr dphi``.  Returns
        ``(z, w)`` with complex nodes and weights summing to 4 pi.
        """
        tr, wr = np.polynomial.legendre.leggauss(n_r)
        tp, wp = np.polynomial.legendre.leggauss(n_phi)
        pts, wts = [], []
        for k in range(8):
            for u, wu in zip(tp, wp):
                loc = u * math.pi / 8.0
                phi = k * math.pi / 4.0 + loc
                R = float(self.boundary_radius(phi))
                r = (tr + 1.0) / 2.0 * R
                z = np.tanh(r / 2.0) * np.exp(1j * phi)
                pts.append(z)
                wts.append(wu * (math.pi / 8.0) * wr * (R / 2.0) * np.sinh(r))
        return np.concatenate(pts), np.concatenate(wts)


# ---------------------------------------------------------------------------
# Invariant bump fields on the Bolza surface.
# ---------------------------------------------------------------------------


class BumpField:
    """Gamma-invariant scalar field: constant plus radial bump atoms.

    Each atom is ``w * (1 - q/q_rho)^3`` on ``q < q_rho`` where
    ``q = cosh(d_hyp(z, c)) - 1`` is the Mobius-invariant radial
    coordinate; the sum runs over all deck translates of the center, so
    the field descends to the quotient surface.
    """

    PROFILE_POWER = 5

    def __init__(self, surface: HyperbolicOctagonSurface, constant=0.0, atoms=()):
        self.surface = surface
        self.constant = float(constant)
        # atoms: list of (center complex, rho, weight)
        self.atoms = [(complex(c), float(r), float(w)) for (c, r, w) in atoms]
        self._translates = None

    @property
    def is_constant(self) -> bool:
        return not self.atoms

    def _centers(self):
        """All translated centers relevant inside the evaluation ball."""
        if self._translates is None:
            reach = self.surface.circumradius + max(
                (r for (_, r, _) in self.atoms), default=0.0
            ) + 0.7
            ball = self.surface.group_ball(round(reach + 1.6, 1))
            rows = []
            for c, rho, w in self.atoms:
                for M, _ in ball:
                    cb = _mobius(M, c)
                    if float(hyperbolic_distance(cb, 0.0)) <= reach:
                        rows.append((cb, math.cosh(rho) - 1.0, w))
            self._translates = rows
        return self._translates

    def _q_terms(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        rows = self._centers()
        out_v = np.zeros(z.shape, dtype=float) + self.constant
        out_dx = np.zeros(z.shape, dtype=float)
        out_dy = np.zeros(z.shape, dtype=float)
        one_m_z2 = 1.0 - np.abs(z) ** 2
        p = self.PROFILE_POWER
        for cb, qr, w in rows:
            one_m_c2 = 1.0 - abs(cb) ** 2
            dz2 = np.abs(z - cb) ** 2
            q = 2.0 * dz2 / (one_m_z2 * one_m_c2)
            mask = q < qr
            if not np.any(mask):
                continue
            t = np.where(mask, 1.0 - q / qr, 0.0)
            out_v += w * t**p
            # dq/dx, dq/dy
            den = one_m_z2 * one_m_c2
            qx = (4.0 * (x - cb.real) / den) + q * (2.0 * x / one_m_z2)
            qy = (4.0 * (y - cb.imag) / den) + q * (2.0 * y / one_m_z2)
            dbdq = np.where(mask, -p * t ** (p - 1) / qr, 0.0)
            out_dx += w * dbdq * qx
            out_dy += w * dbdq * qy
        return out_v, out_dx, out_dy

    def value(self, x, y):
        return self._q_terms(x, y)[0]

    def dx(self, x, y):
        return self._q_terms(x, y)[1]

    def dy(self, x, y):
        return self._q_terms(x, y)[2]


# ---------------------------------------------------------------------------
# Magnetic systems.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhasePoint:
    """Point of the unit tangent bundle in chart coordinates."""

    x: float
    y: float
    theta: float

    def wrapped(self):
        return PhasePoint(self.x, self.y, self.theta % (2.0 * math.pi))

    @classmethod
    def from_vector(cls, system, x, y, vx, vy, tol=1e-10):
        """Build from a tangent vector, validating ``|v|_g = 1``."""
        lam = system.lam_value(x, y)
        norm = math.exp(lam) * math.hypot(vx, vy)
        if abs(norm - 1.0) > tol:
            raise ValueError(f"vector is not unit: |v|_g = {norm!r}")
        return cls(x, y, math.atan2(vy, vx))


class MagneticSystem:
    """A surface backend paired with a magnetic intensity ``kappa``."""

    def __init__(self, metric, kappa=None):
        if isinstance(metric, ConformalTorusMetric):
            self.backend = "torus"
            if kappa is None:
                kappa = TrigField.zero()
            if not isinstance(kappa, TrigField):
                kappa = TrigField.constant(kappa)
        elif isinstance(metric, HyperbolicOctagonSurface):
            self.backend = "bolza"
            if kappa is None:
                kappa = BumpField(metric, 0.0)
            if not isinstance(kappa, BumpField):
                kappa = BumpField(metric, float(kappa))
        else:
            raise TypeError(f"unsupported metric backend: {type(metric)!r}")
        self.metric = metric
        self.kappa = kappa

    # -- scalar fields on M -------------------------------------------------

    def lam_value(self, x, y):
        if self.backend == "torus":
            return self.metric.lam.value(x, y)
        return HyperbolicOctagonSurface.lam(x, y)

    def lam_grad(self, x, y):
        if self.backend == "torus":
            return self.metric.lam.dx(x, y), self.metric.lam.dy(x, y)
        return HyperbolicOctagonSurface.lam_grad(x, y)

    def gaussian_curvature(self, x, y):
        """Gaussian curvature at chart points."""
        if self.backend == "torus":
            return self.metric.gaussian_curvature(x, y)
        return self.metric.gaussian_curvature(
            np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
        )

    def kappa_value(self, x, y):
        return self.kappa.value(x, y)

    def kappa_grad(self, x, y):
        return self.kappa.dx(x, y), self.kappa.dy(x, y)

    # -- magnetic curvature -------------------------------------------------

    def xperp_kappa(self, x, y, theta):
        """Horizontal derivative of ``kappa`` at phase points."""
        kx, ky = self.kappa_grad(x, y)
        emlam = np.exp(-self.lam_value(x, y))
        return emlam * (-np.sin(theta) * kx + np.cos(theta) * ky)

    def magnetic_curvature(self, x, y, theta):
        """K - Xperp(kappa) + kappa^2 at phase points."""
        K = self.gaussian_curvature(x, y)
        k = self.kappa_value(x, y)
        return K - self.xperp_kappa(x, y, theta) + k * k


# ---------------------------------------------------------------------------
# Negativity bounds for the magnetic curvature.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NegativityBounds:
    """Constants a, b > 0 with ``-2b <= Kmag <= -2a`` on all samples."""

    a: float
    b: float


@dataclass(frozen=True)
class NegativityRefusal:
    """Witness that the magnetic curvature fails to be negative."""

    point: tuple
    value: float


def _phase_samples(system, n):
    theta = np.linspace(0.0, 2.0 * math.pi, 2 * n, endpoint=False)
    if system.backend == "torus":
        g = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        X, Y, TH = np.meshgrid(g, g, theta, indexing="ij")
        h = 2.0 * math.pi / n
    else:
        # structured polar grid over the octagon (slightly inset in r)
        phi = np.linspace(0.0, 2.0 * math.pi, 8 * n, endpoint=False)
        R = system.metric.boundary_radius(phi)
        t = (np.arange(n) + 0.5) / n
        r = t[:, None] * R[None, :]
        z = np.tanh(r / 2.0) * np.exp(1j * phi[None, :])
        X = np.repeat(z.real[:, :, None], len(theta), axis=2)
        Y = np.repeat(z.imag[:, :, None], len(theta), axis=2)
        TH = np.broadcast_to(theta, X.shape).copy()
        h = float(np.max(R)) / n
    return X, Y, TH, h


def _lipschitz_margin(Kmag, h):
    """Margin = 2 h L with L from adjacent-sample slopes on the grid."""
    slopes = [0.0]
    for ax in range(Kmag.ndim):
        d = np.abs(np.diff(Kmag, axis=ax))
        if d.size:
            slopes.append(float(np.max(d)) / h)
    return 2.0 * h * max(slopes)


def negativity_bounds(system: MagneticSystem, sample_resolution: int = 32):
    """Certify ``-2b <= Kmag <= -2a < 0`` by dense sampling, or refuse.

    The sampled extrema are widened by a Lipschitz margin of twice the
    grid spacing (slope estimated from the samples themselves), so the
    certificate is conservative at desk scale.
    """
    if sample_resolution < 8:
        raise ValueError("sample_resolution below minimum grid (8)")
    X, Y, TH, h = _phase_samples(system, sample_resolution)
    Kmag = system.magnetic_curvature(X, Y, TH)
    margin = _lipschitz_margin(Kmag, h)
    hi = float(np.max(Kmag)) + margin
    lo = float(np.min(Kmag)) - margin
    if hi >= 0.0:
        i = int(np.argmax(Kmag))
        pt = (
            float(X.reshape(-1)[i]),
            float(Y.reshape(-1)[i]),
            float(TH.reshape(-1)[i]),
        )
        return NegativityRefusal(point=pt, value=float(np.max(Kmag)))
    return NegativityBounds(a=-hi / 2.0, b=-lo / 2.0)
