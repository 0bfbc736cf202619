"""First-order behavior of closed orbits under intensity deformations.

Fix the octagon metric and grow the constant intensity, kappa_s = 0.6 + s.
The normal component y of the orbit variation solves the inhomogeneous
Jacobi equation y'' + Kmag y = f0 with f0 = d(kappa_s)/ds = 1; for
constant data the periodic solution is the constant y = f0 / Kmag.  The
script measures y by finite differences of continued orbits and checks
the equation, the closed form, and the second-order decay of the
residual in the differencing step.

It also verifies the isospectral sanity case: pulling a flat-torus
system back along translations moves nothing measurable, so the length
function is constant and the orbit integral of the metric velocity
vanishes.
"""

import numpy as np

from magflow import deform, orbits
from magflow.surfaces import (
    ConformalTorusMetric,
    HyperbolicOctagonSurface,
    MagneticSystem,
    TrigField,
)


def main():
    system = MagneticSystem(HyperbolicOctagonSurface(), 0.6)
    family = deform.kappa_family(system, 1.0, eps=0.05)
    orbit = orbits.find_periodic_orbit(system, (1,))
    kmag = 0.6 ** 2 - 1.0
    for h_s in (1e-3, 5e-4):
        field = deform.variational_field(family, orbit, h_s=h_s)
        rep = deform.jacobi_residual(system, orbit, field)
        print(f"h_s={h_s}: jacobi residual {rep.residual:.3e}, "
              f"closed-form gap {np.max(np.abs(field.y - 1.0 / kmag)):.3e}")

    kappa = (TrigField.from_cos({(1, 0): 0.3, (1, 1): 0.1})
             + TrigField.from_sin({(0, 1): 0.2}))
    torus = MagneticSystem(ConformalTorusMetric(TrigField.zero()), kappa)
    fam = deform.translation_family(torus, (0.7, 0.4), eps=0.5)
    orb = orbits.find_periodic_orbit(torus, (1, 0))
    lf = deform.length_function(fam, (1, 0), [-0.4, 0.0, 0.4])
    defect = max(abs(v - orb.period) for v in lf.values()) / orb.period
    rep = deform.livsic_integral_check(fam, orb)
    print(f"translation family: length defect {defect:.3e}, "
          f"orbit integral {rep.residual:.3e}")


if __name__ == "__main__":
    main()
