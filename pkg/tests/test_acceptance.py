"""Training-scale checks on a toy model: what guidance buys and how repair quality tracks the mask ratio."""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from band_repair.diffusion.checkpoint import load_checkpoint
from band_repair.metrics import read_csv
from band_repair.services import experiments
from band_repair.services.run_config import config_from_dict

pytestmark = pytest.mark.slow

CONFIG = {
    "data": {"train_scenes": 32, "heldout_scenes": 10, "height": 16, "width": 16},
    "denoiser": {"base_width": 16, "groups": 4, "h_dim": 32, "time_dim": 32, "encoder_widths": [16, 32]},
    "train": {"steps": 2000, "batch_size": 4, "patch_size": 16, "lr": 1e-3, "log_every": 200},
    "emulator": {"pairs": 5000, "epochs": 100},
}


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    cfg = config_from_dict(CONFIG)
    out = tmp_path_factory.mktemp("acceptance")
    train, heldout = experiments.scene_sets(cfg)
    outcome = experiments.train_run(cfg, train, out)
    return cfg, load_checkpoint(outcome.checkpoint), heldout, outcome


def test_denoising_loss_falls(trained) -> None:
    _, _, _, outcome = trained
    mcd = [r.losses.l_mcd for r in outcome.history]
    assert np.mean(mcd[-100:]) < np.mean(mcd[:100])
    assert len(read_csv(outcome.loss_csv)) == len(mcd)


def test_guidance_lowers_physics_loss(trained) -> None:
    cfg, ckpt, heldout, _ = trained
    plain, guided = [], []
    for seed in range(20):
        cube = heldout[seed % len(heldout)]
        plain.append(experiments.repair_cube(ckpt, cube, 0.5, "per_band", replace(cfg.guidance, s=0.0), 50, seed))
        guided.append(experiments.repair_cube(ckpt, cube, 0.5, "per_band", replace(cfg.guidance, s=1.0), 50, seed))
    assert np.mean([r.l_phy for r in guided]) < np.mean([r.l_phy for r in plain])
    wins = sum(g.report.psnr_db >= p.report.psnr_db for g, p in zip(guided, plain))
    assert wins >= 14


def test_repair_beats_interpolation(trained) -> None:
    cfg, ckpt, heldout, _ = trained
    rows = experiments.ratio_sweep(ckpt, heldout, [0.5], cfg.guidance, 50, 0, "per_band")
    model = [r for r in rows if r[0] == "model"]
    interp = [r for r in rows if r[0] == "interp"]
    psnr_col = 3
    ndvi_col = 7
    assert np.mean([r[psnr_col] for r in model]) >= np.mean([r[psnr_col] for r in interp]) + 1.0
    assert np.mean([r[ndvi_col] for r in model]) > np.mean([r[ndvi_col] for r in interp])


def test_fewer_masked_bands_repair_better(trained) -> None:
    cfg, ckpt, heldout, _ = trained
    full, half = [], []
    for seed in range(10):
        cube = heldout[seed % len(heldout)]
        full.append(experiments.repair_cube(ckpt, cube, 0.0, "per_band", cfg.guidance, 50, seed).report.psnr_db)
        half.append(experiments.repair_cube(ckpt, cube, 0.5, "per_band", cfg.guidance, 50, seed).report.psnr_db)
    assert np.mean(full) > np.mean(half)
    assert sum(f >= h for f, h in zip(full, half)) >= 7
