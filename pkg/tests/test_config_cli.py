import filecmp

import numpy as np
import pytest

from stochfiber.cli import main, monotonic_ensemble
from stochfiber.config import (
    ConfigError,
    ExperimentConfig,
    cyclic_segments,
    parse_config,
    strain_history,
)
from stochfiber.dynamics import TimeHistory


class TestParse:
    def test_defaults(self):
        cfg = parse_config("m = 30.5 MPa\ns = 28.8 MPa\n", "material-test")
        assert cfg.C == 27.5e9 and cfg.H == 0.0
        assert cfg.m == 30.5e6 and cfg.s == 28.8e6
        assert cfg.N == 10 and cfg.M == 64 and cfg.lc_over_d == [0.1]

    def test_units_and_lists(self):
        cfg = parse_config("C = 30 GPa\nH = 500 MPa\nm = 30000 kPa\ns_over_m = 0.5, 1, 2\n"
                           "F0 = 5 kN, 15kN\n", "oracle")
        assert cfg.C == 30e9 and cfg.H == 5e8 and cfg.m == 3e7
        assert cfg.F0 == [5e3, 15e3]
        assert cfg.marginals() == [(3e7, 1.5e7), (3e7, 3e7), (3e7, 6e7)]

    def test_s_family(self):
        cfg = parse_config("C = 1GPa\nH = 0\ns = 30 MPa\ns_over_m = 1000\n", "oracle")
        assert cfg.marginals()[0] == pytest.approx((3e4, 3e7))

    def test_comments(self):
        cfg = parse_config("# header\nm = 1 MPa  # mean\ns = 0.5 MPa\n", "material-test")
        assert cfg.s == 5e5

    @pytest.mark.parametrize("text, key", [
        ("C = -1\nH = 0\nm = 1\ns = 1\n", "C"),
        ("C = 1\nH = 0\nm = 1\ns = 1\nbogus = 2\n", "bogus"),
        ("C = 1\nC = 2\nH = 0\nm = 1\ns = 1\n", "C"),
        ("C = 1 furlongs\nH = 0\nm = 1\ns = 1\n", "C"),
        ("H = 0\nm = 1\ns = 1\n", "C"),
        ("C = 1\nH = 0\nm = 1\ns = 1\nlc_over_d = 0.05\n", "lc_over_d"),
        ("C = 1\nH = 0\nm = 1\ns = 1\nM = 16\n", "M"),
        ("C = 1\nH = 0\ns_over_m = 1\n", "s_over_m"),
        ("C = 1\nH = 0\nm = 1\ns = 1\nN = 2.5\n", "N"),
    ])
    def test_errors_name_the_key(self, text, key):
        with pytest.raises(ConfigError) as exc:
            parse_config(text, "oracle")
        assert exc.value.key == key
        assert str(exc.value).startswith(f"{key}:")

    def test_scenario_mismatch(self):
        with pytest.raises(ConfigError):
            parse_config("scenario = oracle\n", "genfield")

    def test_genfield_single_realization_default(self):
        assert parse_config("", "genfield").count == 1

    def test_digest_ignores_output_dir(self):
        a = ExperimentConfig(m=1.0, out="a")
        b = ExperimentConfig(m=1.0, out="b")
        assert a.digest() == b.digest()
        assert a.digest() != ExperimentConfig(m=2.0).digest()


class TestStrainHistory:
    def test_examples(self):
        np.testing.assert_allclose(strain_history([(-1e-3, 2)]), [0, -5e-4, -1e-3])
        np.testing.assert_allclose(strain_history([(-1e-3, 1), (0.0, 2)]),
                                   [0, -1e-3, -5e-4, 0])

    def test_errors(self):
        with pytest.raises(ValueError):
            strain_history([])
        with pytest.raises(ValueError):
            strain_history([(-1e-3, 0)])

    def test_cyclic(self):
        segs = cyclic_segments([-1e-3, -2e-3], 1e-4)
        assert segs == [(-1e-3, 10), (0.0, 10), (-2e-3, 20), (0.0, 20)]

    def test_parse_segments(self):
        cfg = parse_config("m = 1MPa\ns = 1MPa\nstrain_history = -1e-3/10, 0/10\n",
                           "material-test")
        assert cfg.strain_history == [(-1e-3, 10), (0.0, 10)]


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def manifest_names(out):
    lines = (out / "manifest.txt").read_text().splitlines()
    return {ln.split()[0] for ln in lines[1:]}


class TestCli:
    def test_genfield(self, tmp_path, capsys):
        cfg = write(tmp_path, "g.cfg", "lc = 0.1\nM = 32\nm = 30 MPa\ns = 10 MPa\n")
        out = tmp_path / "g"
        assert main(["genfield", "--config", cfg, "--seed", "7", "--out", str(out)]) == 0
        assert capsys.readouterr().out.strip().endswith("manifest.txt")
        assert manifest_names(out) == {"config.resolved", "field_s7.dat", "yield_s7.dat"}
        text = (out / "manifest.txt").read_text()
        assert "field_s7.dat scenario=genfield seed=7 config=" in text

    def test_material_test(self, tmp_path):
        cfg = write(tmp_path, "m.cfg", "m = 30 MPa\ns_over_m = 1\nlc_over_d = 0, 0.4\n"
                                       "count = 3\nN_f = 8\nn_steps = 20\nE_max = -3e-3\n"
                                       "cycles = -1e-3, -2e-3\nstrain_step = 1e-4\n")
        out = tmp_path / "m"
        assert main(["material-test", "--config", cfg, "--out", str(out)]) == 0
        names = manifest_names(out)
        assert {"fig7_lc0_sm1.dat", "fig7_lc0.4_sm1.dat", "fig7_lc0.4_sm1_cyclic.dat"} <= names
        a = np.loadtxt(out / "fig7_lc0_sm1.dat")
        assert a.shape == (21, 3)
        assert np.all(a[1:, 1] < 0) and np.all(a[1:, 2] > 0)
        cyc = (out / "fig7_lc0.4_sm1_cyclic.dat").read_text()
        assert "# cutoff step=" in cyc

    def test_oracle(self, tmp_path):
        cfg = write(tmp_path, "o.cfg", "C = 27.5 GPa\nH = 0\nm = 30 MPa\n"
                                       "s_over_m = 0.01, 1\nn_steps = 10\n")
        out = tmp_path / "o"
        assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
        a = np.loadtxt(out / "fig6_sm1.dat")
        assert a.shape == (11, 4)
        assert a[0, 3] == 1.0 and a[0, 2] == 27.5e9

    def test_column_sim_and_damping(self, tmp_path):
        cfg = write(tmp_path, "c.cfg", "F0 = 15 kN\nT = 3\nelastic = true\n")
        out = tmp_path / "c"
        assert main(["column-sim", "--config", cfg, "--out", str(out)]) == 0
        assert {"fig11_F15kN.dat", "fig12_F15kN.dat"} <= manifest_names(out)
        h = TimeHistory.read(out / "fig11_F15kN.dat")
        assert h.F0 == 15e3 and h.t[-1] == pytest.approx(3.0)
        xi = np.loadtxt(out / "fig12_F15kN.dat")
        assert np.all(np.abs(xi[:, 1]) < 1e-3)

        dcfg = write(tmp_path, "d.cfg", f"histories = {out / 'fig11_F15kN.dat'}\n")
        out2 = tmp_path / "d"
        assert main(["damping", "--config", dcfg, "--out", str(out2)]) == 0
        np.testing.assert_allclose(np.loadtxt(out2 / "fig12_fig11_F15kN.dat"), xi, rtol=1e-8,
                                   atol=1e-9)

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.cfg", "C = -5 GPa\nH = 0\nm = 1\ns = 1\n")
        assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
        assert "C: must be > 0" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["oracle", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write(tmp_path, "m.cfg", "m = 30 MPa\ns = 30 MPa\nlc_over_d = 0.2\ncount = 4\n"
                                       "n_steps = 15\ncycles = -2e-3\nstrain_step = 2e-4\n")
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["material-test", "--config", cfg, "--out", str(a)]) == 0
        assert main(["material-test", "--config", cfg, "--out", str(b), "--jobs", "2"]) == 0
        names = sorted(manifest_names(a) - {"config.resolved"}) + ["manifest.txt"]
        match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        assert not mismatch and not errors


class TestEnsembleJobs:
    def test_jobs_independent(self):
        cfg = ExperimentConfig(m=30e6, s=30e6, count=5, N_f=8, seed=11)
        path = strain_history([(-3e-3, 12)])
        one = monotonic_ensemble(cfg, 0.0, 30e6, 30e6, path, jobs=1)
        three = monotonic_ensemble(cfg, 0.0, 30e6, 30e6, path, jobs=3)
        np.testing.assert_array_equal(one, three)
