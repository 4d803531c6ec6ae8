"""Vacuum friction of a small sphere: the T^8 law and the mirror paradox.

A perfectly reflecting sphere emits no thermal radiation, yet moving it
through equilibrium radiation costs work: the multipole sum gives a
finite drag that approaches (896 pi^7/135) hbar R^6 / lambda_T^8 for a
small mirror, growing as T^8.
"""

import numpy as np

from emfluct import materials, sphere
from emfluct.constants import thermal_wavelength

R = 7.6e-9
mirror = materials.PerfectMirror()

print(f"perfect-mirror sphere, R = {R*1e9:.1f} nm")
print(f"{'T (K)':>8} {'R/lam_T':>10} {'gamma (N s/m)':>15} {'gamma/asymptote':>16}")
temps = np.geomspace(100.0, 1000.0, 9)
gammas = []
for T in temps:
    res = sphere.sphere_friction(mirror, R, T, l_max=8)
    ref = sphere.mirror_friction_asymptote(R, T)
    gammas.append(res.gamma)
    print(f"{T:8.1f} {R/thermal_wavelength(T):10.2e} {res.gamma:15.4e} "
          f"{res.gamma/ref:16.6f}")

slope = np.polyfit(np.log(temps), np.log(gammas), 1)[0]
print(f"\nfitted temperature exponent: {slope:.4f} (T^8 law)")

T = 300.0
P_mirror = sphere.sphere_emission(mirror, R, T, l_max=8)
P_lossy = sphere.sphere_emission(materials.Constant(3 + 0.5j), R, T, l_max=8)
print(f"\nmirror emission at 300 K: {P_mirror:.3e} W "
      f"(a lossy sphere of the same size emits {P_lossy:.3e} W)")
print("the mirror emits nothing yet feels a finite drag.")
