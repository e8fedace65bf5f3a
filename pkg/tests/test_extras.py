"""Coverage for surfaces the main suites exercise only indirectly."""

import shutil
import subprocess
import sys

import numpy as np
import pytest
from fastapi.testclient import TestClient

from identiface.augment import run_balance
from identiface.config import ServiceConfig, read_config, service_config_from_file
from identiface.errors import ParseError
from identiface.imageio import decode_image, write_image
from identiface.manifest import DatasetManifest, ImageSample, load_manifest, save_manifest
from identiface.model import EMOTION_LABELS, ModelSpec, build_model
from identiface.modelio import save_model
from identiface.service import create_app


def test_console_script_help_exits_zero():
    exe = shutil.which("identiface")
    if exe is None:
        pytest.skip("console script not installed")
    result = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert result.returncode == 0
    assert "augment" in result.stdout and "serve" in result.stdout


def test_module_invocation_matches_entry_point():
    result = subprocess.run(
        [sys.executable, "-c", "from identiface.cli import main; raise SystemExit(main(['--help']))"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0


def test_rgb_dataset_augmentation_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    src = tmp_path / "src"
    src.mkdir()
    entries = []
    for label, cname in enumerate(["oblong", "square", "round"]):
        for i in range(3):
            rgb = rng.integers(0, 256, size=(20, 20, 3), dtype=np.uint8)
            fname = f"{cname}_{i}.png"
            write_image(src / fname, rgb)
            entries.append(ImageSample(fname, label, f"{cname}_s{i}"))
    manifest = DatasetManifest(task="face_shape", classes=["oblong", "square", "round"],
                               entries=entries, split_seed=0, base_dir=src)
    save_manifest(manifest, src / "rgb.manifest")

    out = tmp_path / "balanced"
    new_manifest, report = run_balance(load_manifest(src / "rgb.manifest"), 6, out, seed=1)
    assert new_manifest.class_counts() == {"oblong": 6, "square": 6, "round": 6}
    # variants stay RGB PNGs and decode cleanly
    for sample in new_manifest.entries:
        pixels = decode_image(new_manifest.resolve_path(sample))
        assert pixels.shape == (20, 20, 3)


def test_service_serves_static_ui(tmp_path):
    spec = ModelSpec(task="emotion", input_shape=(1, 32, 32),
                     label_map=list(EMOTION_LABELS), conv_blocks=((2,), (2,)),
                     hidden_dim=4)
    save_model(build_model(spec, seed=0), tmp_path / "emotion.idfc")
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>ui</title>", encoding="utf-8")

    config = ServiceConfig(model_paths={"emotion": "emotion.idfc"}, base_dir=tmp_path)
    client = TestClient(create_app(config, ui_dir=ui))
    assert client.get("/v1/models").status_code == 200
    page = client.get("/")
    assert page.status_code == 200
    assert "ui" in page.text


def test_service_config_file_parsing(tmp_path):
    cfg = tmp_path / "service.cfg"
    cfg.write_text(
        "# inference service\nport=9001\nmodel.emotion=models/e.idfc\n"
        "model.gender=models/g.idfc\nmax_request_bytes=1024\nframe_rate_cap=2\n",
        encoding="utf-8",
    )
    config = service_config_from_file(cfg)
    assert config.port == 9001
    assert config.frame_rate_cap == 2
    assert config.model_paths == {"emotion": "models/e.idfc", "gender": "models/g.idfc"}
    assert config.resolve("emotion") == tmp_path / "models/e.idfc"
    assert service_config_from_file(cfg, port_override=9999).port == 9999


def test_config_parse_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this line has no equals sign\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":1"):
        read_config(bad)
    with pytest.raises(ParseError):
        read_config(tmp_path / "missing.cfg")
