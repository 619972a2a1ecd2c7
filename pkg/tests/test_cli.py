import csv
import json
from pathlib import Path

from regionharvest.cli import main


def write_config(tmp_path, **values) -> Path:
    defaults = dict(dataset="synthetic", classes=4, per_class=10, noise=0.1,
                    classifier="centroid", variant="enhanced", ni=4, seed=2,
                    out_dir=str(tmp_path / "out"))
    defaults.update(values)
    path = tmp_path / "run.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in defaults.items()))
    return path


class TestSynth:
    def test_writes_corpus_and_manifest(self, tmp_path):
        out = tmp_path / "corpus"
        assert main(["synth", "--classes", "3", "--per-class", "2", "--noise", "0",
                     "--seed", "0", "--out", str(out)]) == 0
        with open(out / "manifest.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["image_path", "label"]
        assert len(rows) == 7
        image_path = out / rows[1][0]
        assert image_path.exists() and image_path.suffix == ".pgm"


class TestBenchHs:
    def test_trajectory_csv(self, tmp_path):
        out = tmp_path / "traj.csv"
        assert main(["bench-hs", "--objective", "sphere", "--dim", "3", "--ni", "200",
                     "--seed", "0", "--out", str(out)]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["improvisation", "best_value"]
        assert len(rows) == 201
        values = [float(r[1]) for r in rows[1:]]
        assert all(a >= b for a, b in zip(values, values[1:]))


class TestPhaseChain:
    def test_full_chain(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        for command in ("prepare", "extract", "baseline", "search", "evaluate", "report"):
            assert main([command, "--config", str(cfg)]) == 0, command
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 2
        assert "enhanced" in report["selection"]
        captured = capsys.readouterr()
        assert "selected=" in captured.out  # region map printed

    def test_search_without_extract_fails_cleanly(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["search", "--config", str(cfg)]) == 2
        assert "extract" in capsys.readouterr().err

    def test_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path, variant="enhanced")
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--seed", "8", "--ni", "3"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 8
        assert report["config"]["ni"] == "3"

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("REGIONHARVEST_SEED", "31")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("dataset = synthetic\nclasses = 4\nper_class = 10\nnoise = 0.1\n"
                       f"classifier = centroid\nvariant = enhanced\nni = 3\n"
                       f"out_dir = {tmp_path / 'out'}\n")
        assert main(["run", "--config", str(cfg)]) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["seed"] == 31

    def test_dump_regions_flag(self, tmp_path):
        cfg = write_config(tmp_path)
        dump = tmp_path / "regions.csv"
        assert main(["prepare", "--config", str(cfg)]) == 0
        assert main(["extract", "--config", str(cfg), "--dump-regions", str(dump)]) == 0
        lines = dump.read_text().splitlines()
        assert lines[0] == "level,index,top,left,bottom,right"
        assert len(lines) == 22
