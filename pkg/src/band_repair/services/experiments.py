"""
Experiment drivers behind the CLI: scene synthesis, the training run, single-cube repair,
and the sweeps (guidance scale, masking ratio, observed band count).
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from ..denoiser.unet import init_denoiser
from ..diffusion.checkpoint import Checkpoint, save_checkpoint
from ..diffusion.guidance import GuidanceConfig
from ..diffusion.sampler import ddim_sample
from ..diffusion.schedule import make_schedule
from ..diffusion.training import PhysicsContext, StepRecord, Trainer
from ..emulator.nets import EmulatorWeights, load_emulator, save_emulator
from ..emulator.training import make_pairs, train_emulator
from ..errors import DomainError, ShapeError
from ..metrics.baseline import interpolate_bands
from ..metrics.report import CSV_COLUMNS, MetricsReport, evaluate, write_csv
from ..physops.indices import require_index_grid
from ..physops.prior import PRIOR_SCENES, estimate_prior
from ..physops.target import build_phys_target, loss_phy
from ..sensorlib.library import training_library
from ..sensorlib.masking import ConditionPair, MaskMode, band_subset_mask, ratio_mask
from ..specdata.cube import CubeDomain, HyperCube, normalize, patchify, to_physical
from ..specdata.cube_io import load_cube, save_cube
from ..specdata.scenes import generate_scene, generate_scenes
from ..specdata.toy_rtm import default_wavelengths
from .manifest import write_manifest
from .run_config import RunConfig, echo_config

logger = logging.getLogger(__name__)

SCENE_GLOB = "scene_*.hsc"
EMULATOR_FILE = "emulator.abd"
CHECKPOINT_FILE = "model.abd"
LOSS_CSV_FILE = "losses.csv"
LOSS_CSV_COLUMNS = ["step", "l_mcd", "l_pixel", "l_region", "l_image", "lr", "l_total"]
REPAIR_COLUMNS = CSV_COLUMNS + ["s", "l_phy"]
ABLATE_S_COLUMNS = [
    "row",
    "s",
    "seed",
    "psnr",
    "psnr_std",
    "ssim",
    "ssim_std",
    "sam",
    "sam_std",
    "l_phy",
    "l_phy_std",
]
ABLATE_S_RATIO = 0.5

T = TypeVar("T")
R = TypeVar("R")


def _fan_out(fn: Callable[[T], R], jobs: Sequence[T], workers: int) -> list[R]:
    """Results in job order; runs inline for a single worker."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# --- data ---


@dataclass(frozen=True)
class SynthResult:
    cubes: list[Path]
    manifest: Path


def synth_scenes(out_dir: str | Path, count: int, h: int, w: int, bands: int, seed: int) -> SynthResult:
    """count HSC1 scenes with parameter sidecars, plus a manifest of hashes."""
    if count < 1:
        raise DomainError(f"need at least one scene, got {count}")
    wl = default_wavelengths(bands)
    require_index_grid(wl)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cubes: list[Path] = []
    written: list[Path] = []
    for k in range(count):
        cube, fields = generate_scene(h, w, bands, seed + k, wl)
        cube_path = save_cube(cube, out / f"scene_{k:04d}.hsc")
        sidecar = out / f"scene_{k:04d}.params.json"
        with open(sidecar, "w", encoding="utf-8") as f:
            json.dump({"seed": seed + k, "wavelengths": wl.tolist(), **fields.to_json_dict()}, f, indent=2)
        cubes.append(cube_path)
        written += [cube_path, sidecar]
    manifest = write_manifest(out, written)
    logger.info("wrote %d scenes to %s", count, out)
    return SynthResult(cubes, manifest)


def load_scene_dir(path: str | Path) -> list[HyperCube]:
    files = sorted(Path(path).glob(SCENE_GLOB))
    if not files:
        raise DomainError(f"no {SCENE_GLOB} files in {path}")
    return [load_cube(f) for f in files]


def scene_sets(cfg: RunConfig, data_dir: str | Path | None = None) -> tuple[list[HyperCube], list[HyperCube]]:
    """(training scenes, held-out scenes). Training scenes come from data_dir when given."""
    d = cfg.data
    if data_dir is not None:
        train = load_scene_dir(data_dir)
    else:
        train = generate_scenes(d.train_scenes, d.height, d.width, d.bands, d.seed)
    heldout = generate_scenes(d.heldout_scenes, d.height, d.width, d.bands, d.heldout_seed)
    return train, heldout


def _common_wavelengths(cubes: Iterable[HyperCube]) -> np.ndarray:
    cubes = list(cubes)
    wl = cubes[0].wavelengths
    for c in cubes[1:]:
        if c.wavelengths.shape != wl.shape or not np.array_equal(c.wavelengths, wl):
            raise ShapeError("scenes do not share one band grid")
    return wl


# --- training ---


@dataclass(frozen=True)
class TrainOutcome:
    checkpoint: Path
    loss_csv: Path
    history: list[StepRecord]


def fit_emulator(cfg: RunConfig, wavelengths: np.ndarray, progress: bool = False) -> EmulatorWeights:
    e = cfg.emulator
    pairs = make_pairs(e.pairs, e.seed, wavelengths)
    return train_emulator(pairs, e.epochs, e.lr, e.seed, e.batch_size, e.holdout, progress)


def training_patches(scenes: Sequence[HyperCube], size: int) -> list[HyperCube]:
    """Normalized windows at half-patch stride, scene by scene."""
    stride = max(1, size // 2)
    return [p for s in scenes for p in patchify(normalize(s), size, stride)]


def train_run(cfg: RunConfig, scenes: Sequence[HyperCube], out_dir: str | Path, progress: bool = False) -> TrainOutcome:
    """Emulator (reused from out_dir when present), prior, then the denoiser."""
    if not scenes:
        raise DomainError("no training scenes")
    out = Path(out_dir)
    echo_config(cfg, out)
    wl = _common_wavelengths(scenes)
    if wl.size != cfg.denoiser.in_bands:
        raise ShapeError(f"scenes have {wl.size} bands, denoiser expects {cfg.denoiser.in_bands}")
    require_index_grid(wl)

    emulator_path = out / EMULATOR_FILE
    if emulator_path.exists():
        emulator = load_emulator(emulator_path)
        logger.info("reusing emulator %s", emulator_path)
    else:
        emulator = fit_emulator(cfg, wl, progress)
        save_emulator(emulator, emulator_path)

    prior = estimate_prior(scenes[:PRIOR_SCENES])
    size = cfg.train.patch_size
    patches = training_patches(scenes, size)
    weights = init_denoiser(cfg.denoiser)
    schedule = make_schedule(cfg.train.T, cfg.train.beta_start, cfg.train.beta_end)
    trainer = Trainer(
        weights,
        schedule,
        cfg.train,
        PhysicsContext(wl, prior, emulator),
        training_library(wl, cfg.mask.include_native),
        patches,
    )
    loss_csv = out / LOSS_CSV_FILE
    try:
        trainer.run(progress)
    finally:
        write_csv(loss_csv, LOSS_CSV_COLUMNS, [r.as_row() for r in trainer.history])
    ckpt = save_checkpoint(weights, emulator, schedule, out / CHECKPOINT_FILE, wavelengths=wl, prior=prior)
    logger.info("checkpoint %s, losses %s", ckpt, loss_csv)
    return TrainOutcome(ckpt, loss_csv, trainer.history)


# --- repair ---


@dataclass(frozen=True)
class RepairResult:
    repaired: HyperCube
    pair: ConditionPair
    report: MetricsReport
    l_phy: float
    s: float
    seed: int
    mask_ratio: float

    def as_row(self, method: str = "model") -> list[object]:
        return self.report.as_row(method, self.mask_ratio, self.seed) + [self.s, self.l_phy]


def _check_truth(ckpt: Checkpoint, truth: HyperCube) -> None:
    if truth.domain is not CubeDomain.PHYSICAL:
        raise DomainError("ground-truth cube must be physical")
    if truth.wavelengths.shape != ckpt.wavelengths.shape or not np.allclose(truth.wavelengths, ckpt.wavelengths):
        raise ShapeError("cube band grid differs from the checkpoint's")


def repair_pair(
    ckpt: Checkpoint,
    truth: HyperCube,
    pair: ConditionPair,
    guidance: GuidanceConfig,
    steps: int,
    seed: int,
    mask_ratio: float,
    progress: bool = False,
) -> RepairResult:
    _check_truth(ckpt, truth)
    wl = ckpt.wavelengths
    target = build_phys_target(pair, ckpt.prior, wavelengths=wl, emulator=ckpt.emulator)
    x = ddim_sample(pair, ckpt.weights, ckpt.schedule, steps, guidance, seed, target, progress)
    l_phy = loss_phy(x, target, guidance.phys_weights).item()
    repaired = HyperCube(np.clip(to_physical(x), 0.0, 1.0), wl)
    return RepairResult(repaired, pair, evaluate(repaired.data, truth.data, wl), l_phy, guidance.s, seed, mask_ratio)


def repair_cube(
    ckpt: Checkpoint,
    truth: HyperCube,
    mask_ratio: float,
    mode: MaskMode | str,
    guidance: GuidanceConfig,
    steps: int,
    seed: int,
    progress: bool = False,
) -> RepairResult:
    """Random band masking at mask_ratio, then guided DDIM. The mask and the sampler share the seed."""
    _check_truth(ckpt, truth)
    pair = ratio_mask(normalize(truth), mask_ratio, mode, seed)
    return repair_pair(ckpt, truth, pair, guidance, steps, seed, mask_ratio, progress)


def interpolation_row(
    ckpt: Checkpoint, truth: HyperCube, pair: ConditionPair, guidance: GuidanceConfig, seed: int, mask_ratio: float
) -> list[object]:
    wl = ckpt.wavelengths
    x = interpolate_bands(pair, wl)
    target = build_phys_target(pair, ckpt.prior, wavelengths=wl, emulator=ckpt.emulator)
    l_phy = loss_phy(x, target, guidance.phys_weights).item()
    report = evaluate(np.clip(to_physical(x), 0.0, 1.0), truth.data, wl)
    return report.as_row("interp", mask_ratio, seed) + ["", l_phy]


# --- sweeps ---


def ablate_s(
    ckpt: Checkpoint,
    cubes: Sequence[HyperCube],
    values: Sequence[float],
    seeds: int,
    guidance: GuidanceConfig,
    steps: int,
    mode: MaskMode | str = MaskMode.PER_BAND,
    workers: int = 1,
) -> list[list[object]]:
    """One row per (s, seed) at 50% masking, then one mean/std summary row per s."""
    if not cubes or seeds < 1:
        raise DomainError("ablate-s needs at least one cube and one seed")
    jobs = [(float(s), seed) for s in values for seed in range(seeds)]

    def run(job: tuple[float, int]) -> RepairResult:
        s, seed = job
        return repair_cube(ckpt, cubes[seed % len(cubes)], ABLATE_S_RATIO, mode, replace(guidance, s=s), steps, seed)

    results = _fan_out(run, jobs, workers)
    rows: list[list[object]] = []
    for r in results:
        rows.append(["run", r.s, r.seed, r.report.psnr_db, "", r.report.ssim, "", r.report.sam_radians, "", r.l_phy, ""])
    for s in values:
        group = [r for r in results if r.s == float(s)]
        cols = [
            np.array([r.report.psnr_db for r in group]),
            np.array([r.report.ssim for r in group]),
            np.array([r.report.sam_radians for r in group]),
            np.array([r.l_phy for r in group]),
        ]
        summary: list[object] = ["summary", float(s), ""]
        for c in cols:
            summary += [float(c.mean()), float(c.std())]
        rows.append(summary)
    return rows


def ratio_sweep(
    ckpt: Checkpoint,
    cubes: Sequence[HyperCube],
    ratios: Sequence[float],
    guidance: GuidanceConfig,
    steps: int,
    seed: int,
    mode: MaskMode | str = MaskMode.PER_BAND,
    workers: int = 1,
) -> list[list[object]]:
    """Model and interpolation rows for every (ratio, held-out scene)."""
    jobs = [(float(r), k) for r in ratios for k in range(len(cubes))]

    def run(job: tuple[float, int]) -> list[list[object]]:
        ratio, k = job
        result = repair_cube(ckpt, cubes[k], ratio, mode, guidance, steps, seed + k)
        return [result.as_row("model"), interpolation_row(ckpt, cubes[k], result.pair, guidance, seed + k, ratio)]

    return [row for pair_rows in _fan_out(run, jobs, workers) for row in pair_rows]


def band_count_sweep(
    ckpt: Checkpoint,
    cubes: Sequence[HyperCube],
    keeps: Sequence[int],
    guidance: GuidanceConfig,
    steps: int,
    seed: int,
    workers: int = 1,
) -> list[list[object]]:
    """Exactly k observed bands: unguided model, guided model and interpolation rows."""
    jobs = [(int(keep), k) for keep in keeps for k in range(len(cubes))]

    def run(job: tuple[int, int]) -> list[list[object]]:
        keep, k = job
        truth = cubes[k]
        pair = band_subset_mask(normalize(truth), keep, seed + k)
        ratio = 1.0 - keep / truth.bands
        plain = repair_pair(ckpt, truth, pair, replace(guidance, s=0.0), steps, seed + k, ratio)
        guided = repair_pair(ckpt, truth, pair, guidance, steps, seed + k, ratio)
        return [
            plain.as_row(f"model_k{keep}"),
            guided.as_row(f"model_pgs_k{keep}"),
            interpolation_row(ckpt, truth, pair, guidance, seed + k, ratio),
        ]

    return [row for group in _fan_out(run, jobs, workers) for row in group]


def write_repair_outputs(result: RepairResult, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    cube_path = save_cube(result.repaired, out / "repaired.hsc")
    report = write_csv(out / "report.csv", REPAIR_COLUMNS, [result.as_row()])
    return cube_path, report
