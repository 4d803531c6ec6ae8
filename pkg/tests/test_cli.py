import json
import os

import numpy as np
import pytest

from emfluct import cli

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "demos", "configs")
TWO_DIPOLE = os.path.join(CONFIG_DIR, "two_dipole.cfg")


def run(args):
    return cli.main(args)


class TestConductanceCommand:
    def test_two_dipole_residuals(self, tmp_path):
        code = run(["conductance", "--config", TWO_DIPOLE, "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "conductance.json").read_text())
        assert payload["gk_residual"] < 1e-6
        assert payload["force_residual"] < 1e-6
        assert payload["meta"]["config_echo"].startswith("#")
        assert (tmp_path / "conductance_spectrum.csv").exists()

    def test_empty_object_two_cross_terms(self, tmp_path):
        cfg = tmp_path / "single.cfg"
        cfg.write_text("[cluster]\n"
                       "site1.position = 0, 0, 0\n"
                       "site1.material = drude 3e14 5e13\n"
                       "site1.radius = 6e-8\n"
                       "site1.object = 1\n"
                       "t = 300\n")
        code = run(["conductance", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "conductance.json").read_text())
        k = np.asarray(payload["k_W_per_K"])
        assert k[0, 1] == 0.0 and k[1, 0] == 0.0


class TestOnsagerCommand:
    def test_residuals(self, tmp_path):
        code = run(["onsager", "--config", TWO_DIPOLE, "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "onsager.json").read_text())
        assert payload["onsager_residual"] < 1e-6
        assert payload["friction_residual"] < 1e-6


class TestOracleCommand:
    def test_bit_identical_rerun(self, tmp_path):
        cfg = tmp_path / "oracle.cfg"
        cfg.write_text("[cluster]\n"
                       "site1.position = 0, 0, 0\n"
                       "site1.material = drude 3e14 5e13\n"
                       "site1.radius = 6e-8\n"
                       "site1.object = 1\n"
                       "site2.position = 0, 0, 1.2e-6\n"
                       "site2.material = drude 2e14 8e13\n"
                       "site2.radius = 5e-8\n"
                       "site2.object = 2\n"
                       "t = 300\n"
                       "[oracle]\n"
                       "n_samples = 8\n"
                       "n_steps = 4096\n")
        out1, out2 = tmp_path / "run1", tmp_path / "run2"
        assert run(["oracle", "--config", str(cfg), "--out", str(out1),
                    "--seed", "42"]) == 0
        assert run(["oracle", "--config", str(cfg), "--out", str(out2),
                    "--seed", "42"]) == 0
        assert (out1 / "oracle.json").read_bytes() == (out2 / "oracle.json").read_bytes()


class TestFrictionSphereCommand:
    def test_mirror_sweep_fields(self, tmp_path):
        cfg = os.path.join(CONFIG_DIR, "mirror_sphere.cfg")
        code = run(["friction-sphere", "--config", cfg, "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "friction_sphere.json").read_text())
        assert 0.99 <= payload["analytic_ratio"] <= 1.01
        assert abs(payload["slope"] - 8.0) <= 0.05

    def test_lossless_emission_field(self, tmp_path):
        cfg = tmp_path / "lossless.cfg"
        cfg.write_text("[friction-sphere]\n"
                       "material = constant 2+0j\n"
                       "r = 5e-8\n"
                       "t = 300\n"
                       "l_max = 6\n")
        code = run(["friction-sphere", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "friction_sphere.json").read_text())
        assert abs(payload["emission_last_T"]) < 1e-25


class TestTimescaleCommand:
    def test_heat_capacity_linearity(self, tmp_path):
        base = ("[timescale]\n"
                "r = 2e-8\n"
                "gap = 1e-7\n"
                "t = 300\n"
                "material = drude 3e14 5e13\n"
                "plate_material = constant 11.7+0.1j\n"
                "rel_tol = 1e-6\n")
        cfg1 = tmp_path / "a.cfg"
        cfg1.write_text(base + "c_v = 1.66e6\n")
        cfg2 = tmp_path / "b.cfg"
        cfg2.write_text(base + "c_v = 3.32e6\n")
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run(["timescale", "--config", str(cfg1), "--out", str(out1)]) == 0
        assert run(["timescale", "--config", str(cfg2), "--out", str(out2)]) == 0
        t1 = json.loads((out1 / "timescale.json").read_text())["tau_s"]
        t2 = json.loads((out2 / "timescale.json").read_text())["tau_s"]
        assert t2 == pytest.approx(2 * t1, rel=1e-12)

    def test_missing_heat_capacity_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[timescale]\nr = 1e-6\ngap = 1e-7\nt = 300\n")
        assert run(["timescale", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_nonpositive_gap_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[timescale]\nr = 1e-6\ngap = -1\nt = 300\nc_v = 1e6\n")
        assert run(["timescale", "--config", str(cfg), "--out", str(tmp_path)]) == 2


class TestErrors:
    def test_missing_config_file(self, tmp_path):
        assert run(["conductance", "--config", str(tmp_path / "nope.cfg"),
                    "--out", str(tmp_path)]) == 2

    def test_malformed_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not an ini file [[[")
        assert run(["conductance", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_bad_material(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[cluster]\n"
                       "site1.position = 0, 0, 0\n"
                       "site1.material = unobtainium 4\n"
                       "site1.radius = 1e-8\n")
        assert run(["conductance", "--config", str(cfg), "--out", str(tmp_path)]) == 2
