"""
Invariant but not reversible
============================

The Bernoulli product measure is stationary for every bias strength,
yet detailed balance holds only when the bias is switched off.  Both
statements are checkable exactly on a small chain by enumerating all
2^(n-1) configurations.
"""

from wasep.core import SimParams, invariance_violation, reversibility_violation

# a 7-site interior with matched reservoirs at density 1/2
biased = SimParams(n=8, E=1.0, gamma=0.5, rho=0.5)
unbiased = SimParams(n=8, E=0.0, gamma=0.5, rho=0.5)

# stationarity: nu L = 0 to machine precision whatever the bias
print("max |nu L|  E=1:", invariance_violation(biased))
print("max |nu L|  E=0:", invariance_violation(unbiased))
assert invariance_violation(biased) < 1e-12
assert invariance_violation(unbiased) < 1e-12

# reversibility: the flux asymmetry vanishes only at E = 0
print("flux asymmetry  E=1:", reversibility_violation(biased))
print("flux asymmetry  E=0:", reversibility_violation(unbiased))
assert reversibility_violation(biased) > 1e-3
assert reversibility_violation(unbiased) < 1e-12

# the same holds off the half-filled line
for rho in (0.3, 0.7):
    p = SimParams(n=6, E=-0.5, gamma=1.0, rho=rho)
    print(f"max |nu L|  rho={rho}:", invariance_violation(p))
    assert invariance_violation(p) < 1e-12
