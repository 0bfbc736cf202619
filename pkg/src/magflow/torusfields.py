"""Phase functions and frame operators on the conformal torus.

A phase function on the unit tangent bundle is stored as a sparse map
``k -> f_k`` of fiber Fourier modes, each ``f_k`` an ``n x n`` array of
values on the uniform ``(x, y)`` grid.  Base derivatives are spectral
(FFT), so every operator below is exact on band-limited data sampled
below the Nyquist limit; in particular all identities hold to rounding
on the flat torus.

In isothermal coordinates the ladder operators act mode by mode:

    eta_pm (f e^{ik th}) = (1/2) e^{-lam} [ (d_x -/+ i d_y) f
                           + (-/+ k lam_x + i k lam_y) f ] e^{i(k pm 1)th}

and ``X = eta_+ + eta_-``, ``Xperp = i(eta_+ - eta_-)``, ``V = d_theta``
(exact ``ik`` multiplication), ``F = X + kappa V``.
"""

from __future__ import annotations

import math

import numpy as np

from .surfaces import BackendMismatch, MagneticSystem, TrigField

__all__ = ["TorusChart", "TorusPhaseFunction", "chart_for"]

TWO_PI = 2.0 * math.pi


class TorusChart:
    """Cached grid samples of the metric/intensity fields of a system."""

    def __init__(self, system: MagneticSystem, n: int):
        if system.backend != "torus":
            raise BackendMismatch("TorusChart requires a torus system")
        self.system = system
        self.n = n
        g = np.linspace(0.0, TWO_PI, n, endpoint=False)
        self.X, self.Y = np.meshgrid(g, g, indexing="ij")
        self.lam = system.lam_value(self.X, self.Y)
        self.emlam = np.exp(-self.lam)
        self.e2lam = np.exp(2.0 * self.lam)
        self.lam_x, self.lam_y = system.lam_grad(self.X, self.Y)
        self.kappa = system.kappa_value(self.X, self.Y)
        self.K = np.asarray(system.gaussian_curvature(self.X, self.Y))
        kx, ky = system.kappa_grad(self.X, self.Y)
        self.kappa_x, self.kappa_y = kx, ky
        freq = np.fft.fftfreq(n, 1.0 / n)
        self.ikx = (1j * freq)[:, None]
        self.iky = (1j * freq)[None, :]

    def dx(self, f):
        return np.fft.ifft2(self.ikx * np.fft.fft2(f))

    def dy(self, f):
        return np.fft.ifft2(self.iky * np.fft.fft2(f))


_CHARTS: dict[tuple[int, int], TorusChart] = {}


def chart_for(system: MagneticSystem, n: int) -> TorusChart:
    key = (id(system), n)
    if key not in _CHARTS:
        _CHARTS[key] = TorusChart(system, n)
    return _CHARTS[key]


def magnetic_curvature_function(system: MagneticSystem, n: int) -> "TorusPhaseFunction":
    """Kmag = K - Xperp(kappa) + kappa^2 as a phase function (modes -1, 0, 1)."""
    ch = chart_for(system, n)
    base = TorusPhaseFunction(n, {0: (ch.K + ch.kappa**2).astype(complex)})
    kap = TorusPhaseFunction(n, {0: ch.kappa.astype(complex)})
    return base - kap.apply_Xperp(system)


class TorusPhaseFunction:
    """Finite-degree function on the unit tangent bundle of the torus."""

    backend = "torus"

    def __init__(self, n: int, modes: dict[int, np.ndarray] | None = None):
        self.n = n
        self.modes: dict[int, np.ndarray] = {}
        if modes:
            for k, f in modes.items():
                f = np.asarray(f, dtype=complex)
                if f.shape != (n, n):
                    raise ValueError(f"mode {k} has shape {f.shape}, want {(n, n)}")
                self.modes[int(k)] = f

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c, n: int = 32):
        return cls(n, {0: np.full((n, n), complex(c))})

    @classmethod
    def from_field(cls, field: TrigField, n: int = 32, k: int = 0):
        """Lift a base field to fiber mode ``k``."""
        g = np.linspace(0.0, TWO_PI, n, endpoint=False)
        X, Y = np.meshgrid(g, g, indexing="ij")
        vals = field.value(X, Y).astype(complex)
        return cls(n, {k: vals})

    @classmethod
    def from_callable(cls, fn, k: int, n: int = 32):
        g = np.linspace(0.0, TWO_PI, n, endpoint=False)
        X, Y = np.meshgrid(g, g, indexing="ij")
        return cls(n, {k: np.asarray(fn(X, Y), dtype=complex)})

    @classmethod
    def random(cls, rng, degree: int = 2, bandwidth: int = 2, n: int = 32,
               real: bool = False):
        """Random band-limited finite-degree function (seeded)."""
        g = np.linspace(0.0, TWO_PI, n, endpoint=False)
        X, Y = np.meshgrid(g, g, indexing="ij")
        modes = {}
        ks = range(0, degree + 1) if real else range(-degree, degree + 1)
        for k in ks:
            f = np.zeros((n, n), dtype=complex)
            for m in range(-bandwidth, bandwidth + 1):
                for l in range(-bandwidth, bandwidth + 1):
                    c = rng.normal() + 1j * rng.normal()
                    f += c * np.exp(1j * (m * X + l * Y))
            modes[k] = f
        u = cls(n, modes)
        if real:
            u = u + u.conj()
        return u

    # -- algebra ------------------------------------------------------------

    def copy(self):
        return TorusPhaseFunction(self.n, {k: f.copy() for k, f in self.modes.items()})

    def __add__(self, other):
        if not isinstance(other, TorusPhaseFunction):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("grid size mismatch")
        out = {k: f.copy() for k, f in self.modes.items()}
        for k, f in other.modes.items():
            out[k] = out.get(k, 0.0) + f
        return TorusPhaseFunction(self.n, out)

    def __sub__(self, other):
        return self + (other * (-1.0))

    def __mul__(self, s):
        return TorusPhaseFunction(self.n, {k: f * s for k, f in self.modes.items()})

    __rmul__ = __mul__

    def conj(self):
        return TorusPhaseFunction(
            self.n, {-k: np.conj(f) for k, f in self.modes.items()}
        )

    def mode_ks(self):
        return sorted(self.modes)

    def prune(self, tol=0.0):
        keep = {k: f for k, f in self.modes.items()
                if np.max(np.abs(f)) > tol}
        return TorusPhaseFunction(self.n, keep)

    # -- operators ----------------------------------------------------------

    def apply_V(self, system: MagneticSystem):
        return TorusPhaseFunction(
            self.n, {k: 1j * k * f for k, f in self.modes.items() if k != 0}
        )

    def apply_eta(self, system: MagneticSystem, sign: int):
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        ch = chart_for(system, self.n)
        out: dict[int, np.ndarray] = {}
        for k, f in self.modes.items():
            g = 0.5 * ch.emlam * (
                ch.dx(f) - 1j * sign * ch.dy(f)
                + (-sign * k * ch.lam_x + 1j * k * ch.lam_y) * f
            )
            kk = k + sign
            out[kk] = out.get(kk, 0.0) + g
        return TorusPhaseFunction(self.n, out)

    def apply_X(self, system: MagneticSystem):
        return self.apply_eta(system, +1) + self.apply_eta(system, -1)

    def apply_Xperp(self, system: MagneticSystem):
        return (self.apply_eta(system, +1) - self.apply_eta(system, -1)) * 1j

    def mul_base(self, system: MagneticSystem, base_vals: np.ndarray):
        return TorusPhaseFunction(
            self.n, {k: base_vals * f for k, f in self.modes.items()}
        )

    def apply_F(self, system: MagneticSystem):
        ch = chart_for(system, self.n)
        return self.apply_X(system) + self.apply_V(system).mul_base(system, ch.kappa)

    def mul(self, other: "TorusPhaseFunction"):
        """Pointwise product; fiber modes convolve (Omega_k Omega_l -> Omega_{k+l})."""
        if other.n != self.n:
            raise ValueError("grid size mismatch")
        out: dict[int, np.ndarray] = {}
        for k1, f1 in self.modes.items():
            for k2, f2 in other.modes.items():
                k = k1 + k2
                out[k] = out.get(k, 0.0) + f1 * f2
        return TorusPhaseFunction(self.n, out)

    # -- pairing and evaluation --------------------------------------------

    def inner(self, system: MagneticSystem, other: "TorusPhaseFunction") -> complex:
        """Liouville pairing ``(u, v) = int u conj(v) e^{2 lam} dx dy dth``."""
        if not isinstance(other, TorusPhaseFunction):
            raise BackendMismatch("pairing requires two torus functions")
        if other.n != self.n:
            raise ValueError("grid size mismatch")
        ch = chart_for(system, self.n)
        cell = (TWO_PI / self.n) ** 2
        tot = 0.0 + 0.0j
        for k, f in self.modes.items():
            g = other.modes.get(k)
            if g is None:
                continue
            tot += np.sum(f * np.conj(g) * ch.e2lam) * cell
        return TWO_PI * tot

    def norm(self, system: MagneticSystem) -> float:
        return math.sqrt(max(self.inner(system, self).real, 0.0))

    def evaluate(self, x, y, theta):
        """Pointwise value by trigonometric interpolation of each mode."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(np.broadcast(x, y, theta).shape, dtype=complex)
        freq = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        for k, f in self.modes.items():
            co = np.fft.fft2(f) / (self.n * self.n)
            acc = np.zeros_like(out)
            for i, m in enumerate(freq):
                row = co[i]
                nz = np.nonzero(np.abs(row) > 1e-14)[0]
                for j in nz:
                    acc += row[j] * np.exp(1j * (m * x + freq[j] * y))
            out += acc * np.exp(1j * k * theta)
        return out if out.shape else complex(out)

    def sup_norm(self) -> float:
        return max((np.max(np.abs(f)) for f in self.modes.values()), default=0.0)

    def c2_proxy(self, system: MagneticSystem) -> float:
        """Sup-norm proxy for ``u`` and its first two derivatives."""
        vals = [self.sup_norm()]
        for s in (+1, -1):
            d1 = self.apply_eta(system, s)
            vals.append(d1.sup_norm())
            for s2 in (+1, -1):
                vals.append(d1.apply_eta(system, s2).sup_norm())
        return max(vals)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self):
        return {
            "backend": "torus",
            "n": self.n,
            "modes": [
                {
                    "k": k,
                    "re": f.real.tolist(),
                    "im": f.imag.tolist(),
                }
                for k, f in sorted(self.modes.items())
            ],
        }

    @classmethod
    def from_json_obj(cls, obj):
        n = int(obj["n"])
        modes = {
            int(m["k"]): np.array(m["re"]) + 1j * np.array(m["im"])
            for m in obj["modes"]
        }
        return cls(n, modes)
