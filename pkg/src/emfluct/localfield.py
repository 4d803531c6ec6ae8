"""Local-field (coupled-dipole solve) formulation of the responses.

Two complementary constructions of the equilibrium cross-spectral
densities (CSDs) of the site variables (p, E, grad E) live here:

* elementary-source form: explicit per-site fluctuating dipoles p_fl
  (weight 2 hbar w_occ Im alpha0) plus the free field E0 and its
  gradients at the sites (weight 8 pi hbar w_occ k^2 Im G0), pushed
  through the coupled-dipole solve;
* response-function form: the fluctuation-dissipation theorem applied
  to the dressed system response chi of (p, E, grad E) to their
  conjugate sources, S = (hbar w_occ / i)(chi - chi^dagger).

The two agree identically (optical-theorem identities) but share no
assembly path, so they make an honest dual route.  On top of the CSDs,
a Gaussian (Wick) pairing engine evaluates zero-frequency spectra of
quadratic observables; with the surrogate weight sqrt(e^x/(e^x-1)^2)
whose square is the Green-Kubo measure, the time integral of the
force-force correlation (the friction) comes out in closed form.

Spectral conventions: two-sided densities with
<A(t) B(0)> = int dw/(2 pi) e^{-iwt} <A B*>_w; equal-time means of
quadratic forms are int_0^inf (dw/pi) Re <A B*>_w.
"""

import numpy as np

from .constants import HBAR, KB
from .numerics import gk_weight

__all__ = ["LocalFieldModel"]


def _dag(x):
    return np.conj(np.swapaxes(x, -1, -2))


class LocalFieldModel:
    """Coupled-dipole response maps and CSD machinery for a cluster.

    Built on top of an :class:`emfluct.dipoles.Assembly`; uses only its
    geometric kernels (G, D, H stacks) and the bare polarizabilities.
    """

    def __init__(self, asm):
        self.asm = asm
        k = asm.k
        n3 = asm.G.shape[-1]
        eye = np.eye(n3)
        pref = 4.0 * np.pi * k[:, None] ** 2
        a0 = np.repeat(asm.alpha0_sites, 3, axis=1)
        self.A0 = a0[:, :, None] * eye
        self.C = pref[..., None] * asm.G
        self.Dm = [pref[..., None] * asm.D[i] for i in range(3)]
        self.Hm = [[pref[..., None] * asm.H[i][j] for j in range(3)]
                   for i in range(3)]
        # p = Lp p_fl (matter sources) or Lp A0 E0 (field sources);
        # E_loc = Lam E0 or C Lp p_fl.
        self.Lp = np.linalg.inv(eye[None] - self.A0 @ self.C)
        self.Lam = np.linalg.inv(eye[None] - self.C @ self.A0)

    def component_indices(self, obj):
        idx = self.asm.cluster.site_indices(obj)
        if not idx:
            return np.array([], dtype=int)
        return np.concatenate([np.arange(3 * i, 3 * i + 3) for i in idx])

    # -- elementary-source CSD builders ---------------------------------

    def env_csd(self, weight):
        """Free-field CSD blocks at the sites with occupancy weight(w):
        EE, dEE[i] = <d_i E, E*>, EdE[i] = <E, (d_i E)*>,
        dEdE[i][j] = <d_i E, (d_j E)*>; each (nw, 3N, 3N)."""
        asm = self.asm
        W = (8.0 * np.pi * HBAR * np.asarray(weight) * asm.k**2)[:, None, None]
        return {
            "EE": W * asm.IG,
            "dEE": [W * asm.ID[i] for i in range(3)],
            "EdE": [-W * asm.ID[i] for i in range(3)],
            "dEdE": [[-W * asm.IH[i][j] for j in range(3)] for i in range(3)],
        }

    def matter_csd(self, obj, weight):
        """Per-site dipole-source CSD of one object, 2 hbar w Im alpha0."""
        asm = self.asm
        n3 = asm.G.shape[-1]
        diag = np.zeros((asm.k.size, n3), dtype=float)
        for i in asm.cluster.site_indices(obj):
            diag[:, 3 * i:3 * i + 3] = (2.0 * HBAR * np.asarray(weight)
                                        * asm.alpha0_sites[:, i].imag)[:, None]
        return diag[:, :, None] * np.eye(n3)

    def wind_csd(self, j, T):
        """Velocity derivative of the free-field CSD for a bath moving
        along Cartesian direction j, per unit bath velocity."""
        asm = self.asm
        W = (8.0 * np.pi * HBAR**2 * asm.k**2
             * gk_weight(asm.grid.nodes, T) / (KB * T))[:, None, None]
        base = -1j * W
        return {
            "EE": base * asm.ID[j],
            "dEE": [base * asm.IH[i][j] for i in range(3)],
            "EdE": [-base * asm.IH[i][j] for i in range(3)],
            "dEdE": None,
        }

    # -- observable functionals ------------------------------------------

    def _proj_trace(self, dens, obj, part):
        sel = self.component_indices(obj)
        if sel.size == 0:
            return np.zeros(self.asm.k.size)
        vals = dens[:, sel, sel].sum(axis=-1)
        return vals.imag if part == "imag" else vals.real

    def heat_rate(self, csd_env=None, csd_matter=None):
        """Mean absorbed power (W) per object from incident CSDs.

        Returns (H1, H2): int (dw/pi) w Im tr_3 C_{p, E_loc} over the
        sites of each object.
        """
        asm = self.asm
        w = asm.grid.nodes
        n3 = asm.G.shape[-1]
        dens = np.zeros((w.size, n3, n3), dtype=complex)
        if csd_env is not None:
            M_pE = self.Lp @ self.A0
            dens = dens + M_pE @ csd_env["EE"] @ _dag(self.Lam)
        if csd_matter is not None:
            dens = dens + self.Lp @ csd_matter @ _dag(self.C @ self.Lp)
        out = []
        for obj in (1, 2):
            spec = self._proj_trace(dens, obj, "imag")
            out.append(float(np.sum((asm.grid.weights / np.pi) * w * spec)))
        return tuple(out)

    def force(self, csd_env=None, csd_matter=None):
        """Mean force (N) on each object from incident CSDs, shape (2, 3).

        F_i = int (dw/pi) Re sum over the object's site components of
        C_{p_m, d_i E_m}.
        """
        asm = self.asm
        n3 = asm.G.shape[-1]
        M_pE = self.Lp @ self.A0
        out = np.zeros((2, 3))
        for i in range(3):
            dens = np.zeros((asm.k.size, n3, n3), dtype=complex)
            if csd_env is not None:
                term = (csd_env["EdE"][i]
                        + csd_env["EE"] @ _dag(self.Dm[i] @ M_pE))
                dens = dens + M_pE @ term
            if csd_matter is not None:
                dens = dens + self.Lp @ csd_matter @ _dag(self.Dm[i] @ self.Lp)
            for obj in (1, 2):
                spec = self._proj_trace(dens, obj, "real")
                out[obj - 1, i] += float(np.sum((asm.grid.weights / np.pi) * spec))
        return out

    # -- equilibrium (p, grad E) joint CSDs, two constructions -----------

    def joint_csds_elementary(self, weight):
        """Equilibrium CSDs of (p, d_i E) at the sites from the explicit
        elementary sources.  Returns dict with pp (nw,3N,3N),
        pdE[j] = <p, (d_j E)*>, dEp[i] = <d_i E, p*>, dEdE[i][j]."""
        env = self.env_csd(weight)
        Sfl = self.matter_csd(1, weight) + self.matter_csd(2, weight)
        Lp = self.Lp
        MpE = Lp @ self.A0
        DL = [self.Dm[i] @ Lp for i in range(3)]
        DM = [self.Dm[i] @ MpE for i in range(3)]
        pp = Lp @ Sfl @ _dag(Lp) + MpE @ env["EE"] @ _dag(MpE)
        pdE = [Lp @ Sfl @ _dag(DL[j])
               + MpE @ (env["EE"] @ _dag(DM[j]) + env["EdE"][j])
               for j in range(3)]
        dEp = [DL[i] @ Sfl @ _dag(Lp)
               + (DM[i] @ env["EE"] + env["dEE"][i]) @ _dag(MpE)
               for i in range(3)]
        dEdE = [[DL[i] @ Sfl @ _dag(DL[j]) + DM[i] @ env["EE"] @ _dag(DM[j])
                 + DM[i] @ env["EdE"][j] + env["dEE"][i] @ _dag(DM[j])
                 + env["dEdE"][i][j]
                 for j in range(3)] for i in range(3)]
        return {"pp": pp, "pdE": pdE, "dEp": dEp, "dEdE": dEdE}

    def joint_csds_fdt(self, weight):
        """The same CSDs from the fluctuation-dissipation theorem applied
        to the dressed response functions: S = (hbar w/i)(chi - chi^+).

        chi blocks are responses to the conjugate sources (an applied
        field for p, external dipoles for E, external 'gradient' sources
        for grad E); reciprocity fixes the mixed blocks.
        """
        w = np.asarray(weight)[:, None, None]
        Lp = self.Lp
        A0L = self.A0 @ self.Lam          # equals Lp A0
        chi_pp = Lp @ self.A0
        chi_p_Q = [-A0L @ self.Dm[j] for j in range(3)]
        chi_dE_f = [self.Dm[i] @ Lp @ self.A0 for i in range(3)]
        chi_dE_Q = [[-(self.Hm[i][j] + self.Dm[i] @ A0L @ self.Dm[j])
                     for j in range(3)] for i in range(3)]

        def fdt(chi):
            return (HBAR / 1j) * w * (chi - _dag(chi))

        def fdt_cross(chi_ab, chi_ba):
            # S_ab = (hbar w / i)(chi_{a,f_b} - chi_{b,f_a}^dagger)
            return (HBAR / 1j) * w * (chi_ab - _dag(chi_ba))

        pp = fdt(chi_pp)
        pdE = [fdt_cross(chi_p_Q[j], chi_dE_f[j]) for j in range(3)]
        dEp = [fdt_cross(chi_dE_f[i], chi_p_Q[i]) for i in range(3)]
        dEdE = [[fdt_cross(chi_dE_Q[i][j], chi_dE_Q[j][i]) for j in range(3)]
                for i in range(3)]
        return {"pp": pp, "pdE": pdE, "dEp": dEp, "dEdE": dEdE}

    def friction_from_csds(self, csds, T):
        """Friction tensors from zero-frequency force-force spectra.

        gamma[a, b, i, j] = -dF_i^(b)/dv_{a,j} evaluated as
        S_{F^(b)_i F^(a)_j}(Omega = 0) / (2 kB T), the Gaussian
        pairing of the (p, grad E) CSDs.  Requires csds built with the
        surrogate weight sqrt(gk); microreversibility makes the
        zero-frequency spectrum capture the full one-sided integral.
        """
        asm = self.asm
        nw = asm.k.size
        sel = {o: self.component_indices(o) for o in (1, 2)}
        gamma = np.zeros((2, 2, 3, 3))
        wq = asm.grid.weights / (2.0 * np.pi)
        for a in (1, 2):
            for b in (1, 2):
                sl, sr = sel[b], sel[a]
                if sl.size == 0 or sr.size == 0:
                    continue
                ix = np.ix_(np.arange(nw), sl, sr)
                A = csds["pp"][ix]
                for i in range(3):
                    C2 = csds["dEp"][i][ix]
                    for j in range(3):
                        B = csds["dEdE"][i][j][ix]
                        C1 = csds["pdE"][j][ix]
                        term = (np.einsum("wmn,wmn->w", A, np.conj(B))
                                + np.einsum("wmn,wmn->w", C1, np.conj(C2)))
                        # negative frequencies double the real part
                        gamma[a - 1, b - 1, i, j] = float(
                            np.sum(wq * 2.0 * term.real)) / (2.0 * KB * T)
        return gamma
