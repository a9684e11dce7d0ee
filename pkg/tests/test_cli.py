"""CLI surface: outputs, schemas, exit codes, determinism."""

import json
import math
import os

import numpy as np
import pytest

from helmlab.cli import main


def run(args):
    return main(args)


class TestModes:
    def test_single_mode_value(self, tmp_path):
        rc = run(["--out", str(tmp_path), "modes", "--a1", "1", "--a2", "0.5",
                  "--mode", "e:1:0"])
        assert rc == 0
        doc = json.loads((tmp_path / "modes.json").read_text())
        assert doc["format"] == 1
        assert doc["modes"][0]["k"] == pytest.approx(9.977120156613617, rel=1e-9)

    def test_odd_mode_value(self, tmp_path):
        rc = run(["--out", str(tmp_path), "modes", "--a1", "1", "--a2", "0.5",
                  "--mode", "o:0:3"])
        assert rc == 0
        doc = json.loads((tmp_path / "modes.json").read_text())
        assert doc["modes"][0]["k"] == pytest.approx(9.17017539835808, rel=1e-9)

    def test_missing_a2_is_usage_error(self, tmp_path, capsys):
        rc = run(["--out", str(tmp_path), "modes", "--mode", "e:1:0"])
        assert rc == 1

    def test_bad_mode_spec(self, tmp_path):
        rc = run(["--out", str(tmp_path), "modes", "--a2", "0.5",
                  "--mode", "x:1:0"])
        assert rc == 1

    def test_json_schema_fields(self, tmp_path):
        run(["--out", str(tmp_path), "modes", "--a2", "0.5",
             "--mode", "e:0:0", "--mode", "o:1:1"])
        doc = json.loads((tmp_path / "modes.json").read_text())
        for mode in doc["modes"]:
            assert set(mode) == {"parity", "m", "n", "k", "q", "a", "xi0"}


@pytest.mark.slow
class TestSpectrum:
    def test_rows_and_residuals(self, tmp_path):
        rc = run(["--out", str(tmp_path), "spectrum", "--cavity", "small",
                  "--k", "3.0", "--R", "2.0", "--nev", "6", "--h", "0.06"])
        assert rc == 0
        lines = (tmp_path / "spectra.csv").read_text().splitlines()
        assert lines[0] == "# format: 1"
        assert lines[1] == "k,re_mu,im_mu,residual,track_id"
        rows = [ln.split(",") for ln in lines[2:]]
        assert len(rows) == 6
        assert all(float(r[3]) < 1e-8 for r in rows)

    def test_invalid_cavity(self, tmp_path):
        rc = run(["--out", str(tmp_path), "spectrum", "--cavity", "oval",
                  "--k", "3.0"])
        assert rc == 1

    def test_determinism(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            rc = run(["--out", str(out), "spectrum", "--cavity", "small",
                      "--k", "3.0", "--nev", "4", "--h", "0.07"])
            assert rc == 0
        assert (a / "spectra.csv").read_bytes() == (b / "spectra.csv").read_bytes()

    def test_backends_agree(self, tmp_path):
        mus = {}
        for backend in ("bem", "fourier"):
            out = tmp_path / backend
            rc = run(["--out", str(out), "spectrum", "--cavity", "small",
                      "--k", "3.0", "--nev", "4", "--h", "0.06",
                      "--backend", backend])
            assert rc == 0
            rows = (out / "spectra.csv").read_text().splitlines()[2:]
            mus[backend] = np.sort_complex(np.array(
                [complex(float(r.split(",")[1]), float(r.split(",")[2]))
                 for r in rows]))
        assert np.max(np.abs(mus["bem"] - mus["fourier"])) < 1e-3


@pytest.mark.slow
class TestSweepCli:
    def test_small_sweep_outputs(self, tmp_path):
        rc = run(["--out", str(tmp_path), "sweep", "--cavity", "none",
                  "--kmin", "5.0", "--kmax", "5.2", "--step", "0.05",
                  "--R", "1.0", "--nev", "3", "--h", "0.07",
                  "--box", "0.2,0.05"])
        assert rc == 0
        doc = json.loads((tmp_path / "boxcount.json").read_text())
        assert doc["format"] == 1
        assert "count" in doc
        lines = (tmp_path / "spectra.csv").read_text().splitlines()
        ks = sorted({float(r.split(",")[0]) for r in lines[2:]})
        assert len(ks) == 4  # open-ended grid: (5.2-5.0)/0.05

    def test_empty_range_single_solve(self, tmp_path):
        rc = run(["--out", str(tmp_path), "sweep", "--cavity", "none",
                  "--kmin", "5.0", "--kmax", "5.0", "--step", "0.05",
                  "--R", "1.0", "--nev", "2", "--h", "0.07"])
        assert rc == 0
        lines = (tmp_path / "spectra.csv").read_text().splitlines()[2:]
        ks = {float(r.split(",")[0]) for r in lines}
        assert ks == {5.0}  # single solve; every track has zero k-extent


@pytest.mark.slow
class TestEigenfunction:
    def test_field_csv(self, tmp_path):
        rc = run(["--out", str(tmp_path), "eigenfunction", "--cavity", "small",
                  "--k", "3.0", "--index", "0", "--grid", "60", "--h", "0.06"])
        assert rc == 0
        lines = (tmp_path / "field.csv").read_text().splitlines()
        assert lines[0] == "# format: 1"
        assert lines[2] == "x,y,abs_u"
        rows = [ln.split(",") for ln in lines[3:]]
        assert len(rows) == 60 * 60
        # outside points are nan sentinels (corners of the bounding box)
        assert rows[0][2] == "nan"
        vals = np.array([float(r[2]) for r in rows])
        inside = ~np.isnan(vals)
        # normalization: discrete L2 of the sampled field ~ 1
        da = (4.0 / 59) ** 2
        l2 = math.sqrt(np.sum(vals[inside] ** 2) * da)
        assert l2 == pytest.approx(1.0, abs=0.15)

    def test_symmetric_field(self, tmp_path):
        rc = run(["--out", str(tmp_path), "eigenfunction", "--cavity", "small",
                  "--k", "3.0", "--index", "0", "--grid", "41", "--h", "0.06"])
        assert rc == 0
        lines = (tmp_path / "field.csv").read_text().splitlines()[3:]
        vals = np.array([float(r.split(",")[2]) for r in lines]).reshape(41, 41)
        flipped = vals[:, ::-1]
        both = ~(np.isnan(vals) | np.isnan(flipped))
        scale = np.nanmax(vals)
        assert np.max(np.abs(vals[both] - flipped[both])) < 0.05 * scale

    def test_index_out_of_range(self, tmp_path):
        rc = run(["--out", str(tmp_path), "eigenfunction", "--cavity", "small",
                  "--k", "3.0", "--index", "99", "--nev", "3", "--h", "0.07"])
        assert rc == 1


class TestQuasimodeCli:
    def test_quasimode_json(self, tmp_path):
        rc = run(["--out", str(tmp_path), "quasimode", "--cavity", "large",
                  "--mode", "e:1:0"])
        assert rc == 0
        doc = json.loads((tmp_path / "quasimode.json").read_text())
        assert doc["format"] == 1
        assert doc["support_ok"] is True
        assert doc["quality"] == pytest.approx(0.998, rel=0.05)


class TestMeshExport:
    def test_written_file_round_trips(self, tmp_path):
        rc = run(["--out", str(tmp_path), "mesh-export", "--cavity", "large",
                  "--R", "2.0", "--h", "0.1", "--file", "dom.mesh"])
        assert rc == 0
        from helmlab import mesh as hm
        m = hm.read_mesh(str(tmp_path / "dom.mesh"))
        assert m.n_triangles > 100
        assert set(m.boundary_tags.tolist()) == {hm.TAG_GAMMA_D, hm.TAG_GAMMA_TR}


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"a2": 0.5, "a1": 2.0}))
        rc = run(["--out", str(tmp_path), "--config", str(cfg), "modes",
                  "--a1", "1.0", "--mode", "e:1:0"])
        assert rc == 0
        doc = json.loads((tmp_path / "modes.json").read_text())
        # a2 came from the config; the explicit --a1 flag overrode it
        assert doc["a1"] == 1.0
        assert doc["a2"] == 0.5
        assert doc["modes"][0]["k"] == pytest.approx(9.977120156613617, rel=1e-9)

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        rc = run(["--out", str(tmp_path), "--config", str(cfg), "modes",
                  "--a2", "0.5", "--mode", "e:1:0"])
        assert rc == 1
