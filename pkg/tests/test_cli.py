from __future__ import annotations

import hashlib
import json
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from shanshui.checkpoint import save_identity_checkpoint
from shanshui.cli import main

from helpers import make_unpaired_fixture
from test_dataset import make_scans, tree_digest


def run(argv):
    return main(argv)


class TestParsing:
    @pytest.mark.parametrize("command", ["dataset", "train", "translate", "serve", "export"])
    def test_help_lists_defaults(self, command, capsys):
        with pytest.raises(SystemExit) as exc:
            run([command, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "default" in out

    def test_missing_arguments_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["dataset"])
        assert exc.value.code == 2

    def test_unknown_flag_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["dataset", "a", "b", "--frobnicate", "1"])
        assert exc.value.code == 2

    def test_unknown_command_rejected(self):
        with pytest.raises(SystemExit) as exc:
            run(["paint"])
        assert exc.value.code == 2


class TestDatasetCommand:
    def test_build_and_determinism(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        scans = tmp_path / "scans"
        make_scans(scans, 4)
        args = ["--size", "32", "--seed", "7", "--split", "0.75"]
        assert run(["dataset", str(scans), str(tmp_path / "one"), *args]) == 0
        assert "manifest.json" in capsys.readouterr().out
        assert run(["dataset", str(scans), str(tmp_path / "two"), *args]) == 0
        assert tree_digest(tmp_path / "one") == tree_digest(tmp_path / "two")

    def test_missing_scan_dir_fails(self, tmp_path, capsys):
        code = run(["dataset", str(tmp_path / "nope"), str(tmp_path / "out")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_too_few_scans_is_validation_error(self, tmp_path, capsys):
        scans = tmp_path / "scans"
        make_scans(scans, 1)
        assert run(["dataset", str(scans), str(tmp_path / "out")]) == 2

    def test_config_file_precedence(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        scans = tmp_path / "scans"
        make_scans(scans, 3)
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"size": 32, "seed": 5}))
        # Flag overrides config; config overrides default.
        assert run([
            "dataset", str(scans), str(tmp_path / "out"),
            "--config", str(config), "--seed", "9",
        ]) == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["seed"] == 9
        assert manifest["preprocess"]["size"] == 32

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        scans = tmp_path / "scans"
        make_scans(scans, 3)
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"sizes": 32}))
        assert run(["dataset", str(scans), str(tmp_path / "out"), "--config", str(config)]) == 2


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_ds")
    make_unpaired_fixture(root, n_per_domain=2, size=32)
    return root


class TestTrainCommand:
    TOY = [
        "--epochs-constant", "1", "--epochs-decay", "0", "--load-size", "32",
        "--crop-size", "32", "--base-filters", "8", "--res-blocks", "1",
        "--d-filters", "8", "--d-layers", "1", "--pool-capacity", "2",
        "--checkpoint-every", "1", "--seed", "3",
    ]

    def test_toy_run_writes_checkpoint(self, dataset, tmp_path, capsys):
        out = tmp_path / "run"
        assert run(["train", str(dataset), str(out), *self.TOY]) == 0
        assert (out / "checkpoints" / "latest.ckpt").is_file()
        assert (out / "metrics.jsonl").is_file()

    def test_resume_of_finished_run_is_noop(self, dataset, tmp_path):
        out = tmp_path / "run"
        assert run(["train", str(dataset), str(out), *self.TOY]) == 0
        before = (out / "checkpoints" / "latest.ckpt").read_bytes()
        assert run([
            "train", str(dataset), str(tmp_path / "resumed"), *self.TOY,
            "--resume", str(out / "checkpoints" / "latest.ckpt"),
        ]) == 0
        after = (out / "checkpoints" / "latest.ckpt").read_bytes()
        assert before == after

    def test_invalid_lr_exits_2(self, dataset, tmp_path, capsys):
        assert run(["train", str(dataset), str(tmp_path / "x"), "--lr", "0"]) == 2
        assert "error" in capsys.readouterr().err


class TestTranslateCommand:
    def test_identity_translation(self, tmp_path, capsys):
        ckpt = tmp_path / "id.ckpt"
        save_identity_checkpoint(ckpt, input_size=32)
        sketch = tmp_path / "in.png"
        img = np.full((48, 48, 3), 255, dtype=np.uint8)
        img[20:28, :] = 0
        Image.fromarray(img).save(sketch)
        out = tmp_path / "out.png"
        assert run(["translate", str(ckpt), str(sketch), str(out)]) == 0
        result = Image.open(out)
        assert result.size == (32, 32)

        from shanshui.service import preprocess_sketch
        from shanshui.tensors import to_raster

        expected = to_raster(preprocess_sketch(sketch.read_bytes(), 32))
        assert np.array_equal(np.asarray(Image.open(out)), expected.data)

    def test_bad_checkpoint_exits_1(self, tmp_path):
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"garbage")
        png = tmp_path / "in.png"
        Image.fromarray(np.zeros((40, 40, 3), dtype=np.uint8)).save(png)
        assert run(["translate", str(bad), str(png), str(tmp_path / "o.png")]) == 1

    def test_unreadable_input_exits_2(self, tmp_path):
        ckpt = tmp_path / "id.ckpt"
        save_identity_checkpoint(ckpt)
        assert run(["translate", str(ckpt), str(tmp_path / "nope.png"), str(tmp_path / "o.png")]) == 2


class TestExportCommand:
    def test_export_pairs(self, tmp_path):
        from shanshui.gallery import Gallery
        from test_gallery import make_record, png_bytes

        gallery = Gallery(tmp_path / "g")
        for i in range(3):
            gallery.add(make_record(i), png_bytes(32, 255), png_bytes(32, 90))
        assert run(["export", str(tmp_path / "g"), str(tmp_path / "book")]) == 0
        pairs = list((tmp_path / "book").glob("pair_*.png"))
        assert len(pairs) == 3

    def test_empty_gallery_fails(self, tmp_path, capsys):
        (tmp_path / "g").mkdir()
        assert run(["export", str(tmp_path / "g"), str(tmp_path / "book")]) == 2


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class TestServeCommand:
    def test_bad_checkpoint_exits_1(self, tmp_path):
        assert run(["serve", "--checkpoint", str(tmp_path / "missing.ckpt")]) == 1

    def test_serve_and_graceful_shutdown(self, tmp_path):
        import httpx

        ckpt = tmp_path / "id.ckpt"
        save_identity_checkpoint(ckpt, input_size=32)
        port = free_port()
        proc = subprocess.Popen(
            [
                sys.executable, "-m", "shanshui.cli", "serve",
                "--checkpoint", str(ckpt), "--port", str(port),
                "--gallery-dir", str(tmp_path / "gallery"),
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )
        try:
            deadline = time.time() + 30
            status = None
            while time.time() < deadline:
                try:
                    status = httpx.get(f"http://127.0.0.1:{port}/healthz", timeout=1).status_code
                    if status == 200:
                        break
                except httpx.TransportError:
                    pass
                time.sleep(0.2)
            assert status == 200
            proc.send_signal(signal.SIGINT)
            assert proc.wait(timeout=15) == 0
        finally:
            if proc.poll() is None:
                proc.kill()
