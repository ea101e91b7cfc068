"""Tests for the JSON run configuration and output manifests."""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from band_repair.errors import ConfigError
from band_repair.services.manifest import build_manifest, file_sha256, read_manifest, write_manifest
from band_repair.services.run_config import (
    RunConfig,
    config_from_dict,
    default_workers,
    echo_config,
    load_config,
    save_config,
)


def test_defaults_match_published_settings() -> None:
    cfg = load_config(None)
    assert (cfg.train.lambda_px, cfg.train.lambda_reg, cfg.train.lambda_img) == (1.0, 0.5, 0.2)
    assert cfg.train.T == 1000 and cfg.sample_steps == 50
    assert cfg.train.weight_decay == 1e-4 and cfg.train.warmup_frac == 0.1
    assert cfg.mask.ratios == (0.1, 0.3, 0.5)
    assert cfg.guidance.s == 1.0 and cfg.guidance.route == "tweedie"


def test_partial_sections_keep_defaults() -> None:
    cfg = config_from_dict({"train": {"steps": 5, "lambda_reg": 0.0}, "mask": {"ratios": [0.2]}})
    assert cfg.train.steps == 5 and cfg.train.lambda_reg == 0.0
    assert cfg.train.lambda_px == 1.0
    assert cfg.mask.ratios == (0.2,)


@pytest.mark.parametrize(
    "raw,message",
    [
        ({"trian": {}}, "unknown config key trian"),
        ({"train": {"lamda_px": 1.0}}, "unknown config key train.lamda_px"),
        ({"mask": {"ratios": 0.5}}, "mask.ratios must be a list"),
        ({"guidance": {"s": [1.0]}}, "guidance.s must be a scalar"),
        ({"train": []}, "train must be a JSON object"),
        ({"data": {"bands": 8}}, "in_bands"),
        ({"guidance": {"s": -1.0}}, "non-negative"),
        ({"seed": -1}, "seed must be non-negative"),
    ],
)
def test_bad_documents(raw: dict, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        config_from_dict(raw)


def test_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path)


def test_save_load_round_trip(tmp_path: Path) -> None:
    cfg = config_from_dict({"denoiser": {"channel_multipliers": [1, 2, 2]}, "workers": 3, "out_dir": "x"})
    path = save_config(cfg, tmp_path / "nested" / "cfg.json")
    assert load_config(path) == cfg


def test_echo_config_writes_effective_file(tmp_path: Path) -> None:
    path = echo_config(RunConfig(workers=1), tmp_path / "out")
    assert path.name == "effective_config.json"
    assert json.loads(path.read_text(encoding="utf-8"))["train"]["lambda_img"] == 0.2


def test_default_workers_from_environment(monkeypatch) -> None:
    monkeypatch.setenv("BAND_REPAIR_WORKERS", "4")
    assert default_workers() == 4
    monkeypatch.setenv("BAND_REPAIR_WORKERS", "zero")
    assert default_workers() == 1
    monkeypatch.delenv("BAND_REPAIR_WORKERS")
    assert default_workers() == 1


def test_manifest_hashes(tmp_path: Path) -> None:
    (tmp_path / "b.txt").write_bytes(b"band")
    (tmp_path / "a.txt").write_bytes(b"")
    path = write_manifest(tmp_path, [tmp_path / "b.txt", tmp_path / "a.txt"])
    entries = build_manifest(tmp_path, [tmp_path / "b.txt", tmp_path / "a.txt"])
    assert [e["file"] for e in entries] == ["a.txt", "b.txt"]
    hashes = read_manifest(path)
    assert hashes["a.txt"] == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    assert hashes["b.txt"] == file_sha256(tmp_path / "b.txt")
