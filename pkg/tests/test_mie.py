import numpy as np
import pytest

from emfluct import materials, mie
from emfluct.constants import C_LIGHT
from emfluct.numerics import sph_jh_all


def _mie_logderiv(eps, x, l_max):
    """Independent textbook path: downward continued-fraction logarithmic
    derivative D_l(nx) with upward Riccati recurrences in x (different
    recurrence direction from the shipped implementation)."""
    n = np.sqrt(complex(eps))
    nx = n * x
    nstop = l_max + 25 + int(abs(nx))
    D = np.zeros(nstop + 1, dtype=complex)
    for l in range(nstop, 0, -1):
        D[l - 1] = l / nx - 1.0 / (D[l] + l / nx)
    psi = np.zeros(l_max + 1, dtype=complex)
    chi = np.zeros(l_max + 1, dtype=complex)
    psi_m1, chi_m1 = np.cos(x), -np.sin(x)     # order -1
    psi[0], chi[0] = np.sin(x), np.cos(x)
    for l in range(1, l_max + 1):
        psi[l] = (2 * l - 1) / x * psi[l - 1] - (psi_m1 if l == 1 else psi[l - 2])
        chi[l] = (2 * l - 1) / x * chi[l - 1] - (chi_m1 if l == 1 else chi[l - 2])
    xi = psi - 1j * chi    # chi = -x y, so x h1 = psi - i chi
    a = np.zeros(l_max, dtype=complex)
    b = np.zeros(l_max, dtype=complex)
    for l in range(1, l_max + 1):
        da = D[l] / n + l / x
        db = D[l] * n + l / x
        a[l - 1] = (da * psi[l] - psi[l - 1]) / (da * xi[l] - xi[l - 1])
        b[l - 1] = (db * psi[l] - psi[l - 1]) / (db * xi[l] - xi[l - 1])
    return -b, -a     # (T_M, T_N) in the shipped sign convention


class TestMieT:
    def test_mirror_small_x_leading_terms(self):
        x = 0.01
        t = mie.mie_t(materials.PerfectMirror(), 1.0, x * C_LIGHT, 2)
        assert t.entry("M", 1) == pytest.approx(-1j / 3 * x**3, rel=2e-3)
        assert t.entry("N", 1) == pytest.approx(2j / 3 * x**3, rel=2e-3)

    @pytest.mark.parametrize("x", [0.3, 1.0, 3.0, 7.0])
    def test_lossless_unitarity(self, x):
        t = mie.mie_t(materials.Constant(2.0 + 0j), 1.0, x * C_LIGHT, 12)
        s = np.abs(1 + 2 * np.concatenate([t.t_m, t.t_n]))
        assert np.max(np.abs(s - 1)) < 1e-10

    def test_mirror_unitarity(self):
        t = mie.mie_t(materials.PerfectMirror(), 1.0, 2.0 * C_LIGHT, 10)
        s = np.abs(1 + 2 * np.concatenate([t.t_m, t.t_n]))
        assert np.max(np.abs(s - 1)) < 1e-10

    def test_lossy_passivity_and_absorption(self):
        t = mie.mie_t(materials.Constant(11.7 + 0.1j), 1.0, 0.5 * C_LIGHT, 8)
        s = np.abs(1 + 2 * np.concatenate([t.t_m, t.t_n]))
        assert np.all(s <= 1 + 1e-12)
        absorb = -(t.t_m.real + np.abs(t.t_m) ** 2)
        absorb_n = -(t.t_n.real + np.abs(t.t_n) ** 2)
        assert np.all(absorb >= -1e-16)
        assert np.all(absorb_n >= -1e-16)

    def test_dual_path_oracle(self):
        # the reference's upward psi recurrence loses digits for l much
        # above x, so the comparison covers the converged shells
        x = 0.5
        eps = 11.7 + 0.1j
        t = mie.mie_t(materials.Constant(eps), 1.0, x * C_LIGHT, 3)
        t_m_ref, t_n_ref = _mie_logderiv(eps, x, 3)
        assert np.max(np.abs(t.t_m - t_m_ref) / np.abs(t_m_ref)) < 1e-10
        assert np.max(np.abs(t.t_n - t_n_ref) / np.abs(t_n_ref)) < 1e-10

    def test_small_x_scaling_exponent(self):
        xs = np.geomspace(1e-4, 1e-2, 12)
        t1n = []
        for x in xs:
            t = mie.mie_t(materials.Constant(3.0 + 0j), 1.0, x * C_LIGHT, 2)
            t1n.append(abs(t.entry("N", 1)))
        slope = np.polyfit(np.log(xs), np.log(t1n), 1)[0]
        assert slope == pytest.approx(3.00, abs=0.01)

    def test_api_is_m_independent(self):
        t = mie.mie_t(materials.Constant(2.0 + 0j), 1.0, C_LIGHT, 4)
        assert t.t_m.shape == (4,)
        assert t.t_n.shape == (4,)
        with pytest.raises(ValueError):
            t.entry("M", 0)
        with pytest.raises(ValueError):
            t.entry("X", 1)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            mie.mie_t(materials.Constant(2.0 + 0j), -1.0, C_LIGHT, 4)
        with pytest.raises(ValueError):
            mie.mie_t(materials.Constant(2.0 + 0j), 1.0, C_LIGHT, 0)


class TestDipoleLimit:
    def test_mirror_limit(self):
        x = 1e-3
        val = mie.dipole_limit_t(materials.PerfectMirror(), 1.0, x * C_LIGHT)
        assert complex(val) == pytest.approx(2j / 3 * x**3)

    def test_vacuum_scatters_nothing(self):
        val = mie.dipole_limit_t(materials.Constant(1.0 + 0j), 1.0, 1e-3 * C_LIGHT)
        assert abs(complex(val)) == 0.0

    def test_matches_full_mie(self):
        x = 1e-3
        m = materials.Constant(3.0 + 0j)
        full = mie.mie_t(m, 1.0, x * C_LIGHT, 2).entry("N", 1)
        dip = complex(mie.dipole_limit_t(m, 1.0, x * C_LIGHT))
        assert abs(full - dip) / abs(dip) < 1e-3
