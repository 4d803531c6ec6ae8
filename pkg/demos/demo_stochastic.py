"""Monte-Carlo check of the Green-Kubo and Kirkwood integrals.

Gaussian field samples with the equilibrium spectral densities are
turned into time series of the absorbed power H(t) and the force F(t);
their correlation integrals reproduce the analytic conductance and
friction within statistical error.
"""

import numpy as np

from emfluct import dipoles, materials, stochastic
from emfluct.numerics import build_grid

T = 300.0
cluster = dipoles.ScatterCluster(
    [dipoles.Site((0, 0, 0), materials.Drude(3e14, 5e13), 6e-8),
     dipoles.Site((0, 0, 1.2e-6), materials.Drude(2e14, 8e13), 5e-8)],
    [1, 2], T1=T, T2=T, T_env=T)

print("sampling 128 realizations of H(t), F(t) (a minute or so)...")
ens = stochastic.sample_fields(cluster, T, n_steps=2**15, n_samples=128, seed=7)
grid = build_grid(T, 1e-8, 60.0)

k_est, k_err = stochastic.gk_estimate(ens)
k_an, _ = dipoles.gk_conductance(cluster, T, grid=grid)
print("\nGreen-Kubo conductance (W/K):")
for a in range(2):
    for b in range(2):
        pull = (k_est[a, b] - k_an[a, b]) / k_err[a, b]
        print(f"  k_{a+1}^({b+1}): sampled {k_est[a,b]:+.3e} +- {k_err[a,b]:.1e}"
              f"   analytic {k_an[a,b]:+.3e}   ({pull:+.1f} sigma)")

g_est, g_err = stochastic.kirkwood_estimate(ens)
g_an, _ = dipoles.friction(cluster, T, grid=grid)
print("\nKirkwood friction, zz components (N s/m):")
for a in range(2):
    for b in range(2):
        pull = (g_est[a, b, 2, 2] - g_an[a, b, 2, 2]) / g_err[a, b, 2, 2]
        print(f"  gamma_{a+1}^({b+1}): sampled {g_est[a,b,2,2]:+.3e} "
              f"+- {g_err[a,b,2,2]:.1e}   analytic {g_an[a,b,2,2]:+.3e}"
              f"   ({pull:+.1f} sigma)")
