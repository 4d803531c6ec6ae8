import numpy as np
import pytest

from emfluct import dipoles, materials, sphere, greens
from emfluct.constants import C_LIGHT, KB, HBAR
from emfluct.localfield import LocalFieldModel
from emfluct.numerics import build_grid, bose_n


T_ROOM = 300.0


def make_cluster(positions, epsilons, radii, labels, T1=T_ROOM, T2=T_ROOM,
                 T_env=T_ROOM):
    sites = [dipoles.Site(tuple(p), materials.Constant(e), r)
             for p, e, r in zip(positions, epsilons, radii)]
    return dipoles.ScatterCluster(sites, list(labels), T1=T1, T2=T2, T_env=T_env)


def random_cluster(rng, n1, n2, scale=2e-6, min_sep=3e-7):
    pts = []
    while len(pts) < n1 + n2:
        p = rng.uniform(-scale, scale, 3)
        if all(np.linalg.norm(p - q) > min_sep for q in pts):
            pts.append(p)
    eps = [complex(rng.uniform(1.5, 12), rng.uniform(0.05, 2.0))
           for _ in pts]
    radii = [rng.uniform(2e-8, 8e-8) for _ in pts]
    labels = [1] * n1 + [2] * n2
    return make_cluster(pts, eps, radii, labels)


@pytest.fixture(scope="module")
def grid():
    return build_grid(T_ROOM, 1e-8, 45.0)


@pytest.fixture(scope="module")
def grid60():
    return build_grid(T_ROOM, 1e-8, 60.0)


class TestCluster:
    def test_rejects_coincident_sites(self):
        with pytest.raises(ValueError):
            make_cluster([(0, 0, 0), (0, 0, 0)], [2 + 0.1j] * 2, [1e-8] * 2,
                         [1, 2])

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            make_cluster([(0, 0, 0)], [2 + 0.1j], [1e-8], [3])


class TestAssemble:
    def test_empty_object_two(self):
        ops = dipoles.assemble(
            make_cluster([(0, 0, 0)], [3 + 0.5j], [5e-8], [1]), 2e14)
        assert np.max(np.abs(ops["T2"])) == 0.0
        # multiple-scattering inverse is the identity when T2 vanishes
        n = ops["G0"].shape[0]
        M = np.eye(n) - ops["G0"] @ ops["T1"] @ ops["G0"] @ ops["T2"]
        assert np.allclose(M, np.eye(n))

    def test_offdiagonal_block_is_free_greens(self):
        cl = make_cluster([(0, 0, 0), (0, 0, 7e-7)], [3 + 0.5j, 2 + 0.2j],
                          [5e-8, 4e-8], [1, 2])
        w = 2e14
        ops = dipoles.assemble(cl, w)
        blk = greens.g0_free(np.array([0, 0, 0.0]), np.array([0, 0, 7e-7]), w)
        assert np.allclose(ops["G0"][0:3, 3:6], blk.value, rtol=1e-13)

    def test_born_series(self):
        # weak polarizabilities: 2nd-order geometric expansion of the
        # multiple-scattering inverse
        cl = make_cluster([(0, 0, 0), (0, 0, 6e-7), (4e-7, 0, 2e-7)],
                          [1.01 + 0.002j] * 3, [2e-8] * 3, [1, 2, 2])
        w = 2e14
        ops = dipoles.assemble(cl, w)
        X = ops["G0"] @ ops["T1"] @ ops["G0"] @ ops["T2"]
        full = np.linalg.inv(np.eye(X.shape[0]) - X)
        born = np.eye(X.shape[0]) + X + X @ X
        assert np.max(np.abs(full - born)) < 1e-8 * np.max(np.abs(full))

    def test_dressed_single_site(self):
        cl = make_cluster([(0, 0, 0), (0, 0, 1.0)], [3 + 0.5j, 3 + 0.5j],
                          [5e-8, 5e-8], [1, 2])
        w = 2e14
        ops = dipoles.assemble(cl, w)
        k = w / C_LIGHT
        ad = materials.alpha_dressed(materials.Constant(3 + 0.5j), 5e-8,
                                     np.array([w]))[0]
        expect = 4 * np.pi * k**2 * ad
        assert ops["T1"][0, 0] == pytest.approx(expect, rel=1e-12)


class TestMOperators:
    def test_t2_zero_kills_m1(self):
        ops = dipoles.assemble(
            make_cluster([(0, 0, 0)], [3 + 0.5j], [5e-8], [1]), 2e14)
        M = dipoles.m_operators(ops)
        assert np.max(np.abs(M["M1"])) == 0.0

    def test_transfer_sign_property(self):
        # heat absorbed by 2 from 1's sources is non-negative, i.e.
        # -Im Tr M1 >= 0 with the transfer prefactor convention
        rng = np.random.default_rng(10)
        for _ in range(50):
            cl = random_cluster(rng, 1, 1)
            ops = dipoles.assemble(cl, rng.uniform(5e13, 5e14))
            M = dipoles.m_operators(ops)
            assert -np.trace(M["M1"]).imag >= 0
            assert np.trace(M["M2"]).imag >= 0

    def test_lossless_dilute_no_transfer(self):
        cl = make_cluster([(0, 0, 0), (0, 0, 5e-5)], [2.0 + 0j, 3 + 0.5j],
                          [3e-8, 3e-8], [1, 2])
        ops = dipoles.assemble(cl, 2e14)
        M = dipoles.m_operators(ops)
        lossy = dipoles.m_operators(dipoles.assemble(
            make_cluster([(0, 0, 0), (0, 0, 5e-5)], [2.0 + 0.5j, 3 + 0.5j],
                         [3e-8, 3e-8], [1, 2]), 2e14))
        assert abs(np.trace(M["M1"]).imag) < 1e-10 * abs(np.trace(lossy["M1"]).imag)


class TestHeatTransfer:
    def test_equilibrium_is_exactly_zero(self, grid):
        rng = np.random.default_rng(11)
        cl = random_cluster(rng, 2, 1)
        out = dipoles.heat_transfer(cl, grid=grid)
        assert out["H2_net"] == 0.0

    def test_hot_object_one_heats_two(self, grid):
        rng = np.random.default_rng(12)
        cl = random_cluster(rng, 1, 1)
        cl.T1, cl.T2, cl.T_env = 330.0, 300.0, 300.0
        out = dipoles.heat_transfer(cl, grid=grid)
        assert out["H2_net"] > 0

    def test_far_field_inverse_square(self, grid60):
        lam_t = 7.6e-6
        dists = np.geomspace(20 * lam_t, 80 * lam_t, 5)
        vals = []
        for d in dists:
            cl = make_cluster([(0, 0, 0), (0, 0, d)], [3 + 0.5j, 5 + 1.0j],
                              [5e-8, 5e-8], [1, 2], T1=320.0)
            vals.append(dipoles.heat_transfer(cl, grid=grid60)["H2_net"])
        slope = np.polyfit(np.log(dists), np.log(vals), 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.1)

    def test_pipeline_crosscheck(self, grid):
        # transfer and self-emission from the explicit-source solve must
        # agree with the scattering traces to machine precision
        rng = np.random.default_rng(13)
        cl = random_cluster(rng, 2, 2)
        asm = dipoles.Assembly(cl, grid)
        lf = LocalFieldModel(asm)
        w = grid.nodes
        tr12 = dipoles._im_tr_m(asm, 1, 2)
        H12 = -(2 * HBAR / np.pi) * grid.integrate(w * bose_n(w, T_ROOM) * tr12)
        H12_pipe = lf.heat_rate(csd_matter=lf.matter_csd(1, bose_n(w, T_ROOM)))[1]
        assert H12 == pytest.approx(H12_pipe, rel=1e-12)
        tr22 = dipoles._im_tr_m(asm, 2, 2)
        H22 = -(2 * HBAR / np.pi) * grid.integrate(w * bose_n(w, T_ROOM) * tr22)
        H22_pipe = lf.heat_rate(csd_matter=lf.matter_csd(2, bose_n(w, T_ROOM)))[1]
        assert H22 == pytest.approx(H22_pipe, rel=1e-12)


class TestConductance:
    def test_dual_route_identity(self, grid):
        rng = np.random.default_rng(14)
        for _ in range(5):
            cl = random_cluster(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            k, diag = dipoles.gk_conductance(cl, T_ROOM, grid=grid)
            assert diag["gk_discrepancy"] < 1e-6

    def test_positivity(self, grid):
        rng = np.random.default_rng(15)
        for _ in range(30):
            cl = random_cluster(rng, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
            k, _ = dipoles.gk_conductance(cl, T_ROOM, grid=grid)
            assert k[0, 0] >= 0 and k[1, 1] >= 0
            assert -k[0, 1] >= 0 and -k[1, 0] >= 0

    def test_empty_object_two_cross_terms_vanish(self, grid):
        cl = make_cluster([(0, 0, 0)], [3 + 0.5j], [5e-8], [1])
        k, _ = dipoles.gk_conductance(cl, T_ROOM, grid=grid)
        assert k[0, 1] == 0.0 and k[1, 0] == 0.0 and k[1, 1] == 0.0
        assert k[0, 0] > 0


class TestForceResponse:
    def test_dual_route_identity(self, grid):
        rng = np.random.default_rng(16)
        cl = random_cluster(rng, 2, 2)
        dF, diag = dipoles.force_response(cl, T_ROOM, grid=grid)
        assert diag["force_discrepancy"] < 1e-6

    def test_axial_symmetry(self, grid):
        cl = make_cluster([(0, 0, 0), (0, 0, 9e-7)], [3 + 0.5j, 3 + 0.5j],
                          [5e-8, 5e-8], [1, 2])
        dF, _ = dipoles.force_response(cl, T_ROOM, grid=grid)
        axial = abs(dF[0, 1, 2])
        assert np.max(np.abs(dF[0, 1, :2])) < 1e-12 * axial

    def test_vacuum_is_zero(self, grid):
        cl = make_cluster([(0, 0, 0), (0, 0, 9e-7)], [1.0 + 0j, 1.0 + 0j],
                          [5e-8, 5e-8], [1, 2])
        dF, _ = dipoles.force_response(cl, T_ROOM, grid=grid)
        assert np.max(np.abs(dF)) == 0.0

    def test_pipeline_crosscheck(self, grid):
        rng = np.random.default_rng(17)
        cl = random_cluster(rng, 2, 2)
        asm = dipoles.Assembly(cl, grid)
        lf = LocalFieldModel(asm)
        w = grid.nodes
        traces = dipoles._force_traces(asm, 1, 2)
        F_trace = np.array([(2 * HBAR / np.pi)
                            * grid.integrate(bose_n(w, T_ROOM) * traces[i])
                            for i in range(3)])
        F_pipe = lf.force(csd_matter=lf.matter_csd(1, bose_n(w, T_ROOM)))[1]
        assert np.max(np.abs(F_trace - F_pipe)) < 1e-12 * np.max(np.abs(F_pipe))

    def test_time_reversal_antisymmetry(self, grid):
        # int <H(t) F(0)> = -int <F(t) H(0)>: the first ordering from the
        # flux-force correlation form, the second from the velocity
        # response through the McLennan-type relation
        rng = np.random.default_rng(18)
        cl = random_cluster(rng, 1, 2)
        corr_HF, corr_FH = dipoles.hf_correlation_integrals(cl, T_ROOM, grid=grid)
        dHdv, _ = dipoles.heat_velocity_response(cl, T_ROOM, grid=grid)
        scale = np.max(np.abs(corr_HF))
        assert np.max(np.abs(corr_HF + corr_FH)) <= 1e-10 * scale
        assert np.max(np.abs(corr_HF - (-KB * T_ROOM * dHdv))) < 1e-10 * scale


class TestFriction:
    def test_routes_agree(self, grid):
        rng = np.random.default_rng(19)
        for _ in range(4):
            cl = random_cluster(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            g1, _ = dipoles.friction(cl, T_ROOM, grid=grid)
            g2, _ = dipoles.friction_via_linear_response(cl, T_ROOM, grid=grid)
            scale = np.max(np.abs(g1))
            assert np.max(np.abs(g1 - g2)) < 1e-6 * scale

    def test_self_psd_and_reciprocity(self, grid):
        rng = np.random.default_rng(20)
        cl = random_cluster(rng, 2, 2)
        g, _ = dipoles.friction(cl, T_ROOM, grid=grid)
        scale = np.max(np.abs(g))
        for a in range(2):
            sym = 0.5 * (g[a, a] + g[a, a].T)
            assert np.min(np.linalg.eigvalsh(sym)) > -1e-12 * scale
        assert np.max(np.abs(g[0, 1] - g[1, 0].T)) < 1e-10 * scale

    def test_isolated_dipole_matches_sphere_module(self, grid60):
        mat = materials.Constant(3.0 + 0.5j)
        R = 5e-8
        cl = make_cluster([(0, 0, 0), (0, 0, 1.0)], [3 + 0.5j, 1.0 + 0j],
                          [R, 1e-9], [1, 2])
        g, _ = dipoles.friction(cl, T_ROOM, grid=grid60)
        ref = sphere.dipole_friction(mat, R, T_ROOM, grid=grid60)
        assert g[0, 0, 0, 0] == pytest.approx(ref, rel=1e-10)
        assert np.max(np.abs(g[0, 0] - np.diag(np.diag(g[0, 0])))) == 0.0

    def test_small_mirror_dipole_t8(self):
        # lossless scatterer: friction purely through the radiation
        # channel, scaling as T^8
        R = 5e-9
        temps = np.geomspace(150.0, 600.0, 4)
        gammas = []
        for T in temps:
            g = sphere.dipole_friction(materials.PerfectMirror(), R, T)
            gammas.append(g)
        slope = np.polyfit(np.log(temps), np.log(gammas), 1)[0]
        assert slope == pytest.approx(8.0, abs=0.05)

    def test_wind_sum_rule(self, grid):
        # moving both objects equals moving the photon bath backwards
        rng = np.random.default_rng(21)
        cl = random_cluster(rng, 2, 1)
        g, _ = dipoles.friction(cl, T_ROOM, grid=grid)
        dH_du, dF_du = dipoles.wind_response(cl, T_ROOM, grid=grid)
        for b in range(2):
            s = g[0, b] + g[1, b]
            assert np.max(np.abs(s - dF_du[b])) < 1e-8 * np.max(np.abs(dF_du[b]))

    def test_rejects_nonpositive_temperature(self):
        cl = make_cluster([(0, 0, 0)], [3 + 0.5j], [5e-8], [1])
        with pytest.raises(ValueError):
            dipoles.friction(cl, 0.0)
        with pytest.raises(ValueError):
            dipoles.friction_via_linear_response(cl, -5.0)


class TestOnsager:
    def test_residual_small(self, grid):
        rng = np.random.default_rng(22)
        for _ in range(4):
            cl = random_cluster(rng, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
            res, _ = dipoles.onsager_check(cl, T_ROOM, grid=grid)
            assert res < 1e-6

    def test_axial_symmetry(self, grid):
        cl = make_cluster([(0, 0, 0), (0, 0, 9e-7)], [3 + 0.5j, 5 + 1.0j],
                          [5e-8, 5e-8], [1, 2])
        res, parts = dipoles.onsager_check(cl, T_ROOM, grid=grid)
        axial = abs(parts["dHdv"][0, 1, 2])
        assert np.max(np.abs(parts["dHdv"][0, 1, :2])) < 1e-12 * axial

    def test_empty_object_two(self, grid):
        cl = make_cluster([(0, 0, 0)], [3 + 0.5j], [5e-8], [1])
        res, parts = dipoles.onsager_check(cl, T_ROOM, grid=grid)
        assert np.max(np.abs(parts["dHdv"][:, 1])) == 0.0
        assert np.max(np.abs(parts["dHdv"][1, :])) == 0.0


class TestPlateConductance:
    def test_far_plate_reduces_to_isolated(self):
        mat = materials.Constant(3.0 + 0.5j)
        R = 5e-8
        T = T_ROOM
        grid = build_grid(T, 1e-6, 45.0)
        k_far = dipoles.dipole_plate_conductance(mat, R, T, 2e-4,
                                                 materials.Constant(11.7 + 0.1j),
                                                 grid=grid)
        from emfluct.numerics import bose_dn_dT
        from emfluct.materials import alpha_dressed
        w = grid.nodes
        k = w / C_LIGHT
        ad = alpha_dressed(mat, R, w)
        chi = ad.imag - (2 / 3) * k**3 * np.abs(ad) ** 2
        k_iso = (4 * HBAR / np.pi) * grid.integrate(w * bose_dn_dT(w, T) * k**3 * chi)
        assert k_far == pytest.approx(k_iso, rel=1e-3)

    def test_monotonic_near_field(self):
        mat = materials.Constant(11.7 + 0.1j)
        plate = materials.Constant(11.7 + 0.1j)
        grid = build_grid(T_ROOM, 1e-6, 45.0)
        gaps = [5e-8, 1e-7, 3e-7]
        ks = [dipoles.dipole_plate_conductance(mat, 2e-8, T_ROOM, g, plate,
                                               grid=grid) for g in gaps]
        assert ks[0] > ks[1] > ks[2] > 0
