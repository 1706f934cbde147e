"""CLI tests: config parsing, presets, file outputs, command surface."""

import numpy as np
import pytest

from stokestring import cli
from stokestring import geometry as geo
from stokestring import spectral as sp
from stokestring.diagnostics import CSV_HEADER
from stokestring.dynamics import SimConfig
from stokestring.errors import ConfigError


class TestParseConfig:
    def test_empty_gives_defaults(self):
        cfg = cli.parse_config_text("")
        assert cfg.n == 256 and cfg.dt == 1e-3
        assert cfg.scheme == "imex-euler" and cfg.dealias
        assert cfg.params.c1 == 1.0 and cfg.params.lam == 0.0

    def test_overrides(self):
        cfg = cli.parse_config_text("n = 128\ndt = 5e-4\n")
        assert cfg.n == 128 and cfg.dt == 5e-4
        assert cfg.t_final == 1.0

    def test_comments_and_blank_lines(self):
        cfg = cli.parse_config_text("# a comment\n\nn = 64  # trailing\n")
        assert cfg.n == 64

    def test_odd_n_rejected(self):
        with pytest.raises(ConfigError):
            cli.parse_config_text("n = 127")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="line 2"):
            cli.parse_config_text("n = 64\nbogus = 1\n")

    def test_bad_value_reports_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            cli.parse_config_text("dt = fast\n")

    def test_round_trip(self):
        cfg = cli.parse_config_text(
            "n = 64\ndt = 2e-3\nscheme = imex-bdf2\nlambda = 0.25\n"
            "preset = mixed\nepsilon = 0.02\nmode_k = 3\nseed = 7\n")
        assert cli.parse_config_text(cli.emit_config(cfg)) == cfg

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.parse_config(tmp_path / "nope.cfg")


class TestPresets:
    CFG = SimConfig(n=128, epsilon=0.01, mode_k=2, seed=3)

    def test_equilibrium(self):
        st = cli.preset_state("equilibrium", self.CFG)
        assert geo.closure_defect(st) < 1e-13
        assert abs(geo.enclosed_area(st) - np.pi) < 1e-12

    def test_theta_mode(self):
        st = cli.preset_state("theta-mode", self.CFG)
        assert abs(np.max(np.abs(st.theta_osc.samples)) - 0.01) < 2e-4
        assert geo.closure_defect(st) <= 1e-13
        assert abs(geo.enclosed_area(st) - np.pi) < 1e-12

    def test_y_mode(self):
        st = cli.preset_state("y-mode", self.CFG)
        assert np.max(np.abs(st.theta_osc.samples)) < 1e-12
        assert abs(np.max(np.abs(st.stretch.samples)) - 0.01) < 1e-6

    def test_random_deterministic(self):
        a = cli.preset_state("random", self.CFG)
        b = cli.preset_state("random", self.CFG)
        assert np.array_equal(a.theta_osc.samples, b.theta_osc.samples)
        assert np.array_equal(a.stretch.samples, b.stretch.samples)
        c = cli.preset_state("random", SimConfig(n=128, epsilon=0.01, seed=4))
        assert not np.array_equal(a.theta_osc.samples, c.theta_osc.samples)

    def test_unknown(self):
        with pytest.raises(ConfigError):
            cli.preset_state("vortex", self.CFG)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        n = 64
        st = geo.normalize_initial_data(
            sp.grid_points(n) + 0.02 * np.sin(2 * sp.grid_points(n)),
            0.01 * np.sin(3 * sp.grid_points(n))).with_(time=0.25)
        path = tmp_path / "snapshot_0.csv"
        cli.write_snapshot(path, 0, st)
        back = cli.load_snapshot(path)
        assert np.array_equal(back.theta_osc.samples, st.theta_osc.samples)
        assert np.array_equal(back.stretch.samples, st.stretch.samples)
        assert back.perim == st.perim
        assert back.theta_mean == st.theta_mean
        assert np.array_equal(back.base_point, st.base_point)
        assert back.time == st.time


class TestCommands:
    def test_run_outputs(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("n = 64\ndt = 1e-3\nt_final = 0.01\n"
                           "preset = theta-mode\nepsilon = 0.01\n"
                           "output_every = 5\n")
        out = tmp_path / "out"
        rc = cli.main(["run", "--config", str(cfgfile), "--out", str(out)])
        assert rc == 0
        ts = (out / "timeseries.csv").read_text().splitlines()
        assert ts[0] == CSV_HEADER
        assert len(ts) == 1 + 3   # steps 0, 5, 10(final)
        assert (out / "snapshot_0.csv").exists()
        assert (out / "snapshot_10.csv").exists()
        manifest = (out / "manifest.txt").read_text()
        assert "termination = completed" in manifest

    def test_run_byte_identical(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("n = 64\nt_final = 0.005\npreset = random\nseed = 5\n")
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert cli.main(["run", "--config", str(cfgfile),
                             "--out", str(out)]) == 0
            outs.append((out / "timeseries.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_equilibrium_energy_constant(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("n = 64\nt_final = 0.02\noutput_every = 4\n")
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(cfgfile), "--out", str(out)]) == 0
        rows = (out / "timeseries.csv").read_text().splitlines()[1:]
        energies = [float(r.split(",")[1]) for r in rows]
        assert max(energies) - min(energies) < 1e-8

    def test_config_error_exit_code(self, tmp_path):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("n = 13\n")
        assert cli.main(["run", "--config", str(cfgfile)]) == 2

    def test_snapshot_round_trip_through_run(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("n = 64\nt_final = 0.002\npreset = mixed\n")
        out = tmp_path / "out"
        cli.main(["run", "--config", str(cfgfile), "--out", str(out)])
        st = cli.load_snapshot(out / "snapshot_0.csv")
        ref = cli.preset_state("mixed", cli.parse_config(cfgfile))
        assert np.array_equal(st.theta_osc.samples, ref.theta_osc.samples)
        assert st.perim == ref.perim

    def test_diagnose(self, tmp_path, capsys):
        st = geo.equilibrium_state(64)
        path = tmp_path / "snap.csv"
        cli.write_snapshot(path, 0, st)
        assert cli.main(["diagnose", "--snapshot", str(path)]) == 0
        out = capsys.readouterr().out
        assert "energy" in out and "beta1" in out

    def test_margin_abort_exit_code(self, tmp_path):
        # a violently stretched state collapses beta2 below the abort floor
        n = 64
        sgrid = sp.grid_points(n)
        st = geo.make_state(np.zeros(n), -0.93 * np.cos(sgrid))
        path = tmp_path / "snap.csv"
        cli.write_snapshot(path, 0, st)
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("n = 64\n")
        # drive through run_simulation directly: preset states never abort,
        # so exercise the exit path via a doctored initial state
        from stokestring.dynamics import SimConfig, run_simulation
        cfg = cli.parse_config(cfgfile)
        res = run_simulation(st, cfg)
        assert res.termination == "margin-abort"
