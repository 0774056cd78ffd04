import asyncio
from argparse import Namespace
from pathlib import Path
from typing import Any

from lilyvoc.commands import config_from_args, optional_path
from lilyvoc.dependencies import get_feature_repository, get_wav_driver
from lilyvoc.infra.services.extract_service import ExtractService


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "extract", help="Compute features and training targets from WAV files."
    )
    parser.add_argument("in_dir", type=Path, help="Directory of input WAV files.")
    parser.add_argument(
        "--out", dest="out_dir", help="Feature directory (default paths.data_dir)."
    )
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    config = config_from_args(args)
    repository = get_feature_repository(optional_path(args.out_dir), config)
    service = ExtractService(config, get_wav_driver(), repository)
    report = asyncio.run(service.run(args.in_dir))
    print(report.model_dump_json(indent=2))
    return 0
