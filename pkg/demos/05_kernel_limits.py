"""
Deterministic kernel estimates
==============================

The boundary analysis rests on a handful of closed-form kernel facts:
the antiderivative test function has an explicit norm, the mollified
variance kernel approaches a flat constant in the interior, and three
Dirichlet/Neumann heat-kernel statistics decay with known exponents.
All of it is quadrature, no sampling.
"""

import numpy as np

from wasep import spectral

# |Theta_u|^2 = u^2 - u + 1/3, exactly
u = np.linspace(0.0, 1.0, 11)
norms = spectral.theta_norm_sq(0.0, u)
assert np.allclose(norms, u * u - u + 1.0 / 3.0, atol=1e-12)
print("|Theta_u|^2 matches u^2 - u + 1/3 at", len(u), "points")

# the variance kernel over E^2 approaches 1/12 inside (0, 1); endpoint
# layers of width ~ eps approach 1/3 instead
for eps in (1e-2, 1e-3):
    mid = float(spectral.k_eps(eps, 0.5))
    end = float(spectral.k_eps(eps, 0.0))
    print(f"eps={eps:g}:  K(1/2)={mid:.6f} (limit 1/12={1/12:.6f})   "
          f"K(0)={end:.6f} (limit 1/3={1/3:.6f})")

# L2 distance to the flat constant, full interval vs interior
for eps in (1e-2, 1e-3):
    full = spectral.k_eps_l2_error(eps)
    inner = spectral.k_eps_l2_error(eps, lo=0.1, hi=0.9)
    print(f"eps={eps:g}:  L2 dev full={full:.3e}   interior={inner:.3e}")
assert spectral.k_eps_l2_error(1e-3) < spectral.k_eps_l2_error(1e-2)

# fitted log-log slopes for the three heat-kernel statistics; the
# targets are -1/2, +1/4 and +1/2
report = spectral.kernel_estimates_check()
for key, want in (("sup_slope", -0.5), ("mass_defect_slope", 0.25),
                  ("neu_dir_uavg_slope", 0.5)):
    got = report[key]
    print(f"{key}: fitted {got:+.4f}  target {want:+.2f}")
    assert abs(got - want) < 0.1
