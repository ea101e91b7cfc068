"""
Command-line surface. Exit codes: 0 ok, 2 usage/domain/IO failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .diffusion.checkpoint import load_checkpoint
from .errors import BandRepairError, DomainError, NumericError
from .metrics.report import CSV_COLUMNS, evaluate, write_csv
from .sensorlib.masking import MaskMode
from .services import experiments
from .services.run_config import RunConfig, echo_config, load_config
from .specdata.cube import CubeDomain
from .specdata.cube_io import load_cube
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
DEFAULT_S_VALUES = "0,0.5,1.0,1.5,2.0"


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from None


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    overrides = {
        field: getattr(args, flag, None)
        for field, flag in (("workers", "workers"), ("sample_steps", "steps"), ("seed", "seed"))
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def cmd_synth(args: argparse.Namespace) -> int:
    result = experiments.synth_scenes(args.out, args.scenes, args.h, args.w, args.bands, args.seed)
    print(f"wrote {len(result.cubes)} scenes and {result.manifest}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out = Path(args.out or cfg.out_dir)
    train, _ = experiments.scene_sets(cfg, args.data)
    outcome = experiments.train_run(cfg, train, out, progress=args.progress)
    print(f"checkpoint {outcome.checkpoint}")
    return EXIT_OK


def cmd_repair(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out = Path(args.out)
    echo_config(cfg, out)
    ckpt = load_checkpoint(args.checkpoint)
    truth = load_cube(args.cube)
    guidance = replace(cfg.guidance, s=args.s)
    result = experiments.repair_cube(ckpt, truth, args.mask_ratio, args.mode, guidance, cfg.sample_steps, cfg.seed, args.progress)
    cube_path, report = experiments.write_repair_outputs(result, out)
    logger.info("repaired cube %s, report %s", cube_path, report)
    print(f"psnr {result.report.psnr_db:.3f} dB, l_phy {result.l_phy:.6g}")
    return EXIT_OK


def cmd_ablate_s(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out = Path(args.out)
    echo_config(cfg, out)
    ckpt = load_checkpoint(args.checkpoint)
    _, heldout = experiments.scene_sets(cfg)
    rows = experiments.ablate_s(
        ckpt, heldout, _floats(args.values), args.seeds, cfg.guidance, cfg.sample_steps, cfg.mask.mode, cfg.workers
    )
    path = write_csv(out / "ablate_s.csv", experiments.ABLATE_S_COLUMNS, rows)
    logger.info("wrote %s", path)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    pred = load_cube(args.pred)
    truth = load_cube(args.truth)
    if pred.domain is not CubeDomain.PHYSICAL or truth.domain is not CubeDomain.PHYSICAL:
        raise DomainError("eval expects physical cubes")
    report = evaluate(pred.data, truth.data, truth.wavelengths)
    path = write_csv(args.out, CSV_COLUMNS, [report.as_row("eval", "", "")])
    logger.info("wrote %s", path)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out = Path(args.out)
    echo_config(cfg, out)
    ckpt = load_checkpoint(args.checkpoint)
    _, heldout = experiments.scene_sets(cfg)
    ratios = _floats(args.ratios) if args.ratios else list(cfg.mask.ratios)
    guidance = replace(cfg.guidance, s=args.s) if args.s is not None else cfg.guidance
    rows = experiments.ratio_sweep(ckpt, heldout, ratios, guidance, cfg.sample_steps, cfg.seed, cfg.mask.mode, cfg.workers)
    path = write_csv(out / "sweep.csv", experiments.REPAIR_COLUMNS, rows)
    logger.info("wrote %s", path)
    return EXIT_OK


def cmd_ablate_bands(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out = Path(args.out)
    echo_config(cfg, out)
    ckpt = load_checkpoint(args.checkpoint)
    _, heldout = experiments.scene_sets(cfg)
    keeps = _ints(args.keeps) if args.keeps else list(cfg.mask.band_keeps)
    guidance = replace(cfg.guidance, s=args.s) if args.s is not None else cfg.guidance
    rows = experiments.band_count_sweep(ckpt, heldout, keeps, guidance, cfg.sample_steps, cfg.seed, cfg.workers)
    path = write_csv(out / "ablate_bands.csv", experiments.REPAIR_COLUMNS, rows)
    logger.info("wrote %s", path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="band-repair", description="Spectral band repair with physics-guided diffusion")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    level = parser.add_mutually_exclusive_group()
    level.add_argument("--verbose", "-v", action="store_true", help="Debug logging and progress bars.")
    level.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Generate synthetic scenes.")
    p.add_argument("--out", required=True)
    p.add_argument("--scenes", type=int, default=8)
    p.add_argument("--h", type=int, default=32)
    p.add_argument("--w", type=int, default=32)
    p.add_argument("--bands", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="Train the emulator (if absent) and the denoiser.")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--data", help="Directory of synthesized scenes; generated from the config when omitted.")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("repair", help="Mask one cube and repair it.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--cube", required=True)
    p.add_argument("--mask-ratio", type=float, default=0.5)
    p.add_argument("--mode", choices=[m.value for m in MaskMode], default=MaskMode.PER_BAND.value)
    p.add_argument("--steps", type=int, help="DDIM steps; config sample_steps when omitted.")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--seed", type=int, help="Sampling and masking seed; config seed when omitted.")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("ablate-s", help="Guidance-scale sweep at 50% masking.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--values", default=DEFAULT_S_VALUES)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--steps", type=int, help="DDIM steps; config sample_steps when omitted.")
    p.add_argument("--workers", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate_s)

    p = sub.add_parser("eval", help="Metrics of one cube against the truth.")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="Random band masking protocol over held-out scenes.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--ratios", help="Comma-separated ratios; config mask.ratios when omitted.")
    p.add_argument("--s", type=float)
    p.add_argument("--steps", type=int, help="DDIM steps; config sample_steps when omitted.")
    p.add_argument("--seed", type=int, help="Sampling and masking seed; config seed when omitted.")
    p.add_argument("--workers", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate-bands", help="Repair from exactly k observed bands.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--keeps", help="Comma-separated band counts; config mask.band_keeps when omitted.")
    p.add_argument("--s", type=float)
    p.add_argument("--steps", type=int, help="DDIM steps; config sample_steps when omitted.")
    p.add_argument("--seed", type=int, help="Sampling and masking seed; config seed when omitted.")
    p.add_argument("--workers", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate_bands)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.progress = args.verbose
    _configure_logging(args)
    logger.info("command %s", args.command)
    try:
        code = args.func(args)
    except NumericError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (BandRepairError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logger.info("command %s finished", args.command)
    return code
