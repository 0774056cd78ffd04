from argparse import Namespace
from pathlib import Path
from typing import Any

from lilyvoc.commands import config_from_args
from lilyvoc.dependencies import get_wav_driver
from lilyvoc.infra.services.eval_service import EvalService

COLUMNS = ("stem", "spectral", "mel", "f0_rmse", "voiced_frames")


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "eval", help="Objective distances between paired reference and output WAVs."
    )
    parser.add_argument("ref_dir", type=Path, help="Reference WAV directory.")
    parser.add_argument("gen_dir", type=Path, help="Generated WAV directory.")
    parser.add_argument(
        "--report", type=Path, help="Report path (default <gen_dir>/report.json)."
    )
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    service = EvalService(config_from_args(args), get_wav_driver())
    report = service.run(args.ref_dir, args.gen_dir, args.report)
    # Tab-separated, one row per pair, then the mean row.
    print("\t".join(COLUMNS))
    for pair in report.pairs:
        print(
            f"{pair.stem}\t{pair.spectral:.6f}\t{pair.mel:.6f}\t"
            f"{pair.f0_rmse:.6f}\t{pair.voiced_frames}"
        )
    print(
        f"mean\t{report.mean_spectral:.6f}\t{report.mean_mel:.6f}\t"
        f"{report.mean_f0_rmse:.6f}\t-"
    )
    return 0
