"""End-to-end runs of the command-line surface on a toy configuration."""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from band_repair import cli
from band_repair.errors import NumericError
from band_repair.metrics import read_csv
from band_repair.services import experiments
from band_repair.services.manifest import read_manifest
from band_repair.specdata import generate_scene, normalize

TOY_CONFIG = {
    "data": {"train_scenes": 2, "heldout_scenes": 2, "height": 16, "width": 16},
    "denoiser": {"base_width": 8, "groups": 4, "h_dim": 8, "time_dim": 8, "encoder_widths": [8, 8]},
    "train": {"steps": 2, "batch_size": 2, "patch_size": 16, "log_every": 1},
    "emulator": {"pairs": 200, "epochs": 2, "batch_size": 64},
    "sample_steps": 2,
}


def _write_config(path: Path, overrides: dict | None = None) -> Path:
    doc = json.loads(json.dumps(TOY_CONFIG))
    for section, values in (overrides or {}).items():
        doc.setdefault(section, {}).update(values)
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def run(tmp_path_factory) -> dict[str, Path]:
    root = tmp_path_factory.mktemp("cli")
    scenes = root / "scenes"
    assert cli.main(["-q", "synth", "--out", str(scenes), "--scenes", "2", "--h", "16", "--w", "16"]) == 0
    config = _write_config(root / "toy.json")
    out = root / "run"
    assert cli.main(["-q", "train", "--config", str(config), "--out", str(out), "--data", str(scenes)]) == 0
    return {"root": root, "scenes": scenes, "config": config, "out": out, "checkpoint": out / "model.abd"}


def test_synth_writes_scenes_and_manifest(tmp_path: Path) -> None:
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["-q", "synth", "--out", str(out), "--scenes", "3", "--h", "12", "--w", "12", "--seed", "5"]) == 0
    assert len(sorted(a.glob("scene_*.hsc"))) == 3
    assert len(sorted(a.glob("scene_*.params.json"))) == 3
    assert read_manifest(a / "manifest.json") == read_manifest(b / "manifest.json")


def test_synth_too_few_bands(tmp_path: Path, capsys) -> None:
    assert cli.main(["-q", "synth", "--out", str(tmp_path), "--bands", "3"]) == 2
    assert "at least 4 bands" in capsys.readouterr().err


def test_train_outputs(run) -> None:
    out = run["out"]
    for name in ("effective_config.json", "emulator.abd", "losses.csv", "model.abd"):
        assert (out / name).exists()
    rows = read_csv(out / "losses.csv")
    assert [int(r["step"]) for r in rows] == [0, 1]
    assert all(float(r["l_total"]) >= float(r["l_mcd"]) for r in rows)


def test_train_rerun_is_byte_identical(run, tmp_path: Path) -> None:
    out = tmp_path / "again"
    assert cli.main(["-q", "train", "--config", str(run["config"]), "--out", str(out), "--data", str(run["scenes"])]) == 0
    assert (out / "losses.csv").read_bytes() == (run["out"] / "losses.csv").read_bytes()
    assert (out / "model.abd").read_bytes() == run["checkpoint"].read_bytes()


def test_train_without_physics_terms(run, tmp_path: Path) -> None:
    config = _write_config(tmp_path / "mcd.json", {"train": {"lambda_px": 0.0, "lambda_reg": 0.0, "lambda_img": 0.0}})
    out = tmp_path / "mcd"
    assert cli.main(["-q", "train", "--config", str(config), "--out", str(out), "--data", str(run["scenes"])]) == 0
    for row in read_csv(out / "losses.csv"):
        assert float(row["l_pixel"]) == 0.0 and float(row["l_region"]) == 0.0 and float(row["l_image"]) == 0.0
        assert float(row["l_total"]) == pytest.approx(float(row["l_mcd"]), rel=1e-12)


def test_unknown_config_key(tmp_path: Path, capsys) -> None:
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"train": {"stpes": 3}}), encoding="utf-8")
    assert cli.main(["-q", "train", "--config", str(config), "--out", str(tmp_path / "o")]) == 2
    assert "unknown config key train.stpes" in capsys.readouterr().err


def test_numeric_failure_exit_code(run, tmp_path: Path, monkeypatch, capsys) -> None:
    def diverge(*args, **kwargs):
        raise NumericError("loss is not finite", step=7)

    monkeypatch.setattr(experiments, "train_run", diverge)
    argv = ["-q", "train", "--config", str(run["config"]), "--out", str(tmp_path), "--data", str(run["scenes"])]
    assert cli.main(argv) == 3
    assert "at step 7" in capsys.readouterr().err


def test_eval_identity_and_symmetry(run, tmp_path: Path) -> None:
    a, b = run["scenes"] / "scene_0000.hsc", run["scenes"] / "scene_0001.hsc"
    assert cli.main(["-q", "eval", "--pred", str(a), "--truth", str(a), "--out", str(tmp_path / "same.csv")]) == 0
    same = read_csv(tmp_path / "same.csv")[0]
    assert float(same["psnr"]) == 99.0
    assert float(same["ssim"]) == pytest.approx(1.0, abs=1e-12)
    assert float(same["sam"]) == pytest.approx(0.0, abs=1e-6)
    cli.main(["-q", "eval", "--pred", str(a), "--truth", str(b), "--out", str(tmp_path / "ab.csv")])
    cli.main(["-q", "eval", "--pred", str(b), "--truth", str(a), "--out", str(tmp_path / "ba.csv")])
    ab, ba = read_csv(tmp_path / "ab.csv")[0], read_csv(tmp_path / "ba.csv")[0]
    for col in ("psnr", "ssim", "rmse", "sam", "ndvi_cc"):
        assert float(ab[col]) == pytest.approx(float(ba[col]), abs=1e-10)


def test_eval_missing_file(tmp_path: Path) -> None:
    missing = str(tmp_path / "nope.hsc")
    assert cli.main(["-q", "eval", "--pred", missing, "--truth", missing, "--out", str(tmp_path / "x.csv")]) == 2


def test_repair_outputs_are_deterministic(run, tmp_path: Path) -> None:
    cube = run["scenes"] / "scene_0000.hsc"
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for out in outs:
        argv = ["-q", "repair", "--checkpoint", str(run["checkpoint"]), "--cube", str(cube)]
        assert cli.main(argv + ["--steps", "2", "--seed", "4", "--out", str(out)]) == 0
    assert (outs[0] / "repaired.hsc").read_bytes() == (outs[1] / "repaired.hsc").read_bytes()
    row = read_csv(outs[0] / "report.csv")[0]
    assert row["method"] == "model" and float(row["mask_ratio"]) == 0.5 and float(row["s"]) == 1.0
    assert float(row["l_phy"]) >= 0.0


def test_ablate_s_row_count(run, tmp_path: Path) -> None:
    argv = ["-q", "ablate-s", "--checkpoint", str(run["checkpoint"]), "--config", str(run["config"])]
    assert cli.main(argv + ["--values", "0,1", "--seeds", "2", "--steps", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "ablate_s.csv")
    assert len(rows) == 2 * 2 + 2
    assert [r["row"] for r in rows].count("summary") == 2
    summary = [r for r in rows if r["row"] == "summary"]
    assert [float(r["s"]) for r in summary] == [0.0, 1.0]


def test_sweep_rows(run, tmp_path: Path) -> None:
    argv = ["-q", "sweep", "--checkpoint", str(run["checkpoint"]), "--config", str(run["config"])]
    assert cli.main(argv + ["--ratios", "0.1,0.5", "--steps", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 2 * 2 * 2
    assert {r["method"] for r in rows} == {"model", "interp"}


def test_ablate_bands_rows(run, tmp_path: Path) -> None:
    argv = ["-q", "ablate-bands", "--checkpoint", str(run["checkpoint"]), "--config", str(run["config"])]
    assert cli.main(argv + ["--keeps", "3", "--steps", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "ablate_bands.csv")
    assert len(rows) == 3 * 2
    assert {r["method"] for r in rows} == {"model_k3", "model_pgs_k3", "interp"}
    assert all(float(r["mask_ratio"]) == pytest.approx(0.75) for r in rows)


@pytest.mark.parametrize("ratio", ["1.0", "1.5", "-0.1"])
def test_repair_rejects_ratio_outside_unit_interval(run, tmp_path: Path, capsys, ratio: str) -> None:
    argv = ["-q", "repair", "--checkpoint", str(run["checkpoint"]), "--cube", str(run["scenes"] / "scene_0000.hsc")]
    assert cli.main(argv + [f"--mask-ratio={ratio}", "--steps", "2", "--out", str(tmp_path)]) == 2
    assert "[0, 1)" in capsys.readouterr().err


def test_repair_takes_steps_and_seed_from_config(run, tmp_path: Path, monkeypatch) -> None:
    calls = []
    sample = experiments.ddim_sample

    def recording(pair, weights, schedule, steps, guidance, seed, *rest):
        calls.append((steps, seed))
        return sample(pair, weights, schedule, steps, guidance, seed, *rest)

    monkeypatch.setattr(experiments, "ddim_sample", recording)
    config = tmp_path / "steps.json"
    config.write_text(json.dumps(dict(TOY_CONFIG, sample_steps=3, seed=6)), encoding="utf-8")
    argv = ["-q", "repair", "--checkpoint", str(run["checkpoint"]), "--cube", str(run["scenes"] / "scene_0000.hsc")]
    assert cli.main(argv + ["--config", str(config), "--out", str(tmp_path / "a")]) == 0
    assert calls == [(3, 6)]
    assert cli.main(argv + ["--config", str(config), "--steps", "2", "--seed", "1", "--out", str(tmp_path / "b")]) == 0
    assert calls[-1] == (2, 1)
    effective = json.loads((tmp_path / "b" / "effective_config.json").read_text(encoding="utf-8"))
    assert effective["sample_steps"] == 2 and effective["seed"] == 1


def test_negative_seed_is_a_config_error(run, tmp_path: Path, capsys) -> None:
    argv = ["-q", "repair", "--checkpoint", str(run["checkpoint"]), "--cube", str(run["scenes"] / "scene_0000.hsc")]
    assert cli.main(argv + ["--seed=-1", "--out", str(tmp_path)]) == 2
    assert "seed must be non-negative" in capsys.readouterr().err


def test_repair_rerun_from_effective_config(run, tmp_path: Path) -> None:
    argv = ["-q", "repair", "--checkpoint", str(run["checkpoint"]), "--cube", str(run["scenes"] / "scene_0001.hsc")]
    first, second = tmp_path / "first", tmp_path / "second"
    assert cli.main(argv + ["--config", str(run["config"]), "--steps", "2", "--seed", "9", "--out", str(first)]) == 0
    assert cli.main(argv + ["--config", str(first / "effective_config.json"), "--out", str(second)]) == 0
    assert (second / "repaired.hsc").read_bytes() == (first / "repaired.hsc").read_bytes()
    assert (second / "report.csv").read_bytes() == (first / "report.csv").read_bytes()


def test_sweep_rerun_from_effective_config(run, tmp_path: Path) -> None:
    argv = ["-q", "sweep", "--checkpoint", str(run["checkpoint"]), "--ratios", "0.3"]
    first, second = tmp_path / "first", tmp_path / "second"
    assert cli.main(argv + ["--config", str(run["config"]), "--seed", "2", "--out", str(first)]) == 0
    assert cli.main(argv + ["--config", str(first / "effective_config.json"), "--out", str(second)]) == 0
    assert (second / "sweep.csv").read_bytes() == (first / "sweep.csv").read_bytes()
    assert (second / "effective_config.json").read_bytes() == (first / "effective_config.json").read_bytes()


def test_training_patches_overlap_by_half() -> None:
    scenes = [generate_scene(16, 16, 12, k)[0] for k in range(2)]
    patches = experiments.training_patches(scenes, 8)
    assert len(patches) == 2 * 3 * 3
    assert all(p.shape == (8, 8, 12) for p in patches)
    first = normalize(scenes[0]).data
    np.testing.assert_array_equal(patches[1].data, first[0:8, 4:12])
    assert len(experiments.training_patches(scenes, 16)) == 2
