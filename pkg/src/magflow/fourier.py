"""Fiberwise Fourier bookkeeping for phase functions.

A function on the unit tangent bundle splits as u = sum_k u_k with
V u_k = i k u_k.  Both backends store that decomposition natively, so
projection here is exact; the work is in norms, degrees, and export.
"""

from __future__ import annotations

import csv
import dataclasses
from typing import Dict

from .operators import DEFAULT_QUAD, norm
from .surfaces import MagneticSystem

__all__ = ["ModeSpectrum", "mode_numbers", "project", "decompose", "degree"]


def mode_numbers(u):
    """Sorted fiber modes carried by ``u`` (including zero-weight ones)."""
    if u.backend == "torus":
        return sorted(u.modes)
    return sorted({b.k for b in u.blocks})


def project(u, k: int):
    """Exact projection onto the V-eigenspace of eigenvalue ik."""
    if u.backend == "torus":
        out = type(u)(u.n, {})
        if k in u.modes:
            out.modes[k] = u.modes[k].copy()
        return out
    return type(u)(u.surface, [b for b in u.blocks if b.k == k])


def decompose(u) -> Dict[int, object]:
    return {k: project(u, k) for k in mode_numbers(u)}


@dataclasses.dataclass(frozen=True)
class ModeSpectrum:
    """L2 mass of a phase function per fiber mode."""

    norms: Dict[int, float]       # k -> ||u_k||
    total: float                  # ||u||

    @classmethod
    def from_function(cls, system: MagneticSystem, u, quad=DEFAULT_QUAD):
        norms = {k: norm(system, project(u, k), quad) for k in mode_numbers(u)}
        return cls(norms=norms, total=norm(system, u, quad))

    def parseval_defect(self) -> float:
        """|sum_k ||u_k||^2 - ||u||^2|, zero up to quadrature error."""
        return abs(sum(v * v for v in self.norms.values()) - self.total ** 2)

    def degree(self, tol: float = 1e-12) -> int:
        """Largest |k| with ||u_k|| > tol * ||u|| (0 for the zero function)."""
        floor = tol * max(self.total, tol)
        live = [abs(k) for k, v in self.norms.items() if v > floor]
        return max(live) if live else 0

    def write_csv(self, path):
        rows = sorted(self.norms.items())
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mode", "norm"])
            for k, v in rows:
                w.writerow([k, f"{v:.16e}"])


def degree(system: MagneticSystem, u, quad=DEFAULT_QUAD, tol: float = 1e-12) -> int:
    return ModeSpectrum.from_function(system, u, quad).degree(tol)
