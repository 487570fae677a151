"""Command line front end, exercised in-process through main()."""

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from voxsel.cli import main
from voxsel.geometry import Viewpoint
from voxsel.grid import OccupancySet, VoxelGrid
from voxsel.harness import make_corpus
from voxsel.io import read_sil, read_vxg, write_vxg
from voxsel.synthesis import render_silhouette


def centered_box(dim=16, lo=5, hi=11):
    vals = np.zeros((dim, dim, dim))
    vals[lo:hi, lo:hi, lo:hi] = 1.0
    return VoxelGrid(vals)


def write_grid(path, grid):
    write_vxg(path, grid)
    return str(path)


class TestGenShapes:
    def test_writes_manifest_and_matching_grids(self, tmp_path):
        out = tmp_path / "corpus"
        assert main(["gen-shapes", "--count", "3", "--dim", "16", "--seed", "4", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest) == 3
        expected = make_corpus(3, dim=16, seed=4)
        for entry, obj in zip(manifest, expected):
            assert entry["name"] == obj.name
            assert entry["category"] == obj.category
            loaded = read_vxg(out / entry["file"])
            assert isinstance(loaded, OccupancySet)
            assert np.array_equal(loaded.bits, obj.gt.values > 0.5)


class TestRender:
    def test_matches_the_library_call(self, tmp_path):
        grid = centered_box()
        grid_path = write_grid(tmp_path / "box.vxg", grid)
        sil_path = tmp_path / "box.sil"
        code = main(
            ["render", "--grid", grid_path, "--yaw", "30", "--pitch", "45", "--out", str(sil_path)]
        )
        assert code == 0
        expected = render_silhouette(grid, Viewpoint(30.0, 45.0), 0.4)
        assert np.array_equal(read_sil(sil_path).pixels, expected.pixels)

    def test_tau_controls_what_renders(self, tmp_path):
        vals = np.zeros((8, 8, 8))
        vals[4, 4, 4] = 0.2
        grid_path = write_grid(tmp_path / "dim.vxg", VoxelGrid(vals))
        lo, hi = tmp_path / "lo.sil", tmp_path / "hi.sil"
        main(["render", "--grid", grid_path, "--yaw", "0", "--pitch", "0", "--tau", "0.1", "--out", str(lo)])
        main(["render", "--grid", grid_path, "--yaw", "0", "--pitch", "0", "--tau", "0.4", "--out", str(hi)])
        assert read_sil(lo).pixels.sum() == 1
        assert read_sil(hi).pixels.sum() == 0


class TestSelect:
    @pytest.fixture()
    def grid_pair(self, tmp_path):
        gt = centered_box()
        pred_vals = gt.values.copy()
        pred_vals[12, 8, 8] = 1.0
        pred = write_grid(tmp_path / "pred.vxg", VoxelGrid(pred_vals))
        return pred, write_grid(tmp_path / "gt.vxg", gt)

    def test_emits_scores_selection_and_samples(self, grid_pair, tmp_path, capsys):
        pred, gt = grid_pair
        assert main(["select", "--pred", pred, "--gt", gt, "--seed", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["scores"]) == 72
        assert len(payload["selected"]) == 3
        assert len(payload["sampled"]) == 3
        assert payload["interval_deg"] == 30
        for row in payload["scores"]:
            assert set(row) == {"viewpoint", "score", "lattice_index"}
        # A single excess voxel is visible from every viewpoint.
        assert all(row["score"] > 0 for row in payload["scores"])

    def test_interval_changes_the_lattice(self, grid_pair, capsys):
        pred, gt = grid_pair
        assert main(["select", "--pred", pred, "--gt", gt, "--interval", "90", "--n", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["scores"]) == 8
        assert len(payload["selected"]) == 2

    def test_deterministic_given_seed(self, grid_pair, tmp_path):
        pred, gt = grid_pair
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["select", "--pred", pred, "--gt", gt, "--seed", "7", "--out", str(a)])
        main(["select", "--pred", pred, "--gt", gt, "--seed", "7", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_oversized_n_is_a_clean_failure(self, grid_pair, capsys):
        pred, gt = grid_pair
        assert main(["select", "--pred", pred, "--gt", gt, "--n", "100"]) == 2
        assert "voxsel select:" in capsys.readouterr().err


class TestCarve:
    def test_axis_views_recover_a_box(self, tmp_path):
        grid = centered_box()
        grid_path = write_grid(tmp_path / "gt.vxg", grid)
        views = [(0.0, 0.0), (-90.0, 0.0), (0.0, 90.0)]
        entries = []
        for i, (yaw, pitch) in enumerate(views):
            name = f"v{i}.sil"
            main(
                ["render", "--grid", grid_path, "--yaw", str(yaw), "--pitch", str(pitch),
                 "--out", str(tmp_path / name)]
            )
            entries.append({"yaw": yaw, "pitch": pitch, "silhouette": name})
        views_path = tmp_path / "views.json"
        views_path.write_text(json.dumps(entries))
        out = tmp_path / "carved.vxg"
        code = main(
            ["carve", "--views", str(views_path), "--sil-dir", str(tmp_path),
             "--dim", "16", "--out", str(out)]
        )
        assert code == 0
        assert np.array_equal(read_vxg(out).values, grid.values)

    def test_non_list_views_file_fails_cleanly(self, tmp_path, capsys):
        bad = tmp_path / "views.json"
        bad.write_text(json.dumps({"yaw": 0}))
        code = main(["carve", "--views", str(bad), "--sil-dir", str(tmp_path), "--dim", "8",
                     "--out", str(tmp_path / "o.vxg")])
        assert code == 2
        assert "voxsel carve:" in capsys.readouterr().err


def loop_config_file(tmp_path, **loop_kw):
    base = {"dim": 16, "iterations": 1, "update_fraction": 1.0, "seed": 3}
    base.update(loop_kw)
    payload = {"loop": base, "corpus": {"count": 2, "dim": 16, "seed": 3}}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return str(path)


class TestLoop:
    def test_writes_a_canonical_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["loop", "--config", loop_config_file(tmp_path), "--out", str(out)])
        assert code == 0
        assert "loop finished" in capsys.readouterr().err
        payload = json.loads(out.read_text())
        assert payload["schema_version"] == "v1"
        assert len(payload["objects"]) == 2
        assert payload["config"]["dim"] == 16

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        cfg = loop_config_file(tmp_path)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["loop", "--config", cfg, "--out", str(a)]) == 0
        assert main(["loop", "--config", cfg, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_reads_a_corpus_directory(self, tmp_path):
        corpus_dir = tmp_path / "corpus"
        main(["gen-shapes", "--count", "2", "--dim", "16", "--seed", "5", "--out", str(corpus_dir)])
        payload = {
            "loop": {"dim": 16, "iterations": 1, "update_fraction": 1.0, "seed": 5},
            "corpus": {"dir": str(corpus_dir)},
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(payload))
        out = tmp_path / "report.json"
        assert main(["loop", "--config", cfg.as_posix(), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        names = [rec["name"] for rec in report["objects"]]
        assert names == [obj.name for obj in make_corpus(2, dim=16, seed=5)]

    def test_missing_corpus_section_fails_cleanly(self, tmp_path, capsys):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"loop": {"dim": 16}}))
        assert main(["loop", "--config", str(cfg)]) == 2
        assert "voxsel loop:" in capsys.readouterr().err


class TestCompare:
    def test_zero_iterations_report_zero_deltas(self, tmp_path, capsys):
        cfg = loop_config_file(tmp_path, iterations=0)
        assert main(["compare", "--config", cfg]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["deltas"]["error_guided_minus_random"] == 0.0
        assert payload["deltas"]["error_guided_minus_fixed_lattice"] == 0.0
        assert set(payload["policies"]) == {"error-guided", "random", "fixed-lattice"}


class TestErrors:
    def test_missing_input_file(self, tmp_path, capsys):
        code = main(["render", "--grid", str(tmp_path / "nope.vxg"), "--yaw", "0", "--pitch", "0",
                     "--out", str(tmp_path / "o.sil")])
        assert code == 2
        assert "voxsel render:" in capsys.readouterr().err

    def test_corrupt_grid_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.vxg"
        bad.write_bytes(b"NOTAGRID" + bytes(32))
        code = main(["render", "--grid", str(bad), "--yaw", "0", "--pitch", "0",
                     "--out", str(tmp_path / "o.sil")])
        assert code == 2
        assert "voxsel render:" in capsys.readouterr().err

    def test_unknown_subcommand_exits_via_argparse(self, capsys):
        with pytest.raises(SystemExit):
            main(["defragment"])


class TestEntryPoints:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "voxsel.cli", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        for name in ("select", "render", "gen-shapes", "carve", "loop", "compare"):
            assert name in proc.stdout

    def test_console_script_installed(self):
        exe = shutil.which("voxsel")
        assert exe is not None, "editable install should expose the voxsel script"
        proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
