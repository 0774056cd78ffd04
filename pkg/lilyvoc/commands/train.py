import asyncio
from argparse import Namespace
from pathlib import Path
from typing import Any

from lilyvoc.commands import config_from_args, optional_path
from lilyvoc.dependencies import (
    get_checkpoint_repository,
    get_feature_repository,
    get_metrics_repository,
    get_wav_driver,
)
from lilyvoc.domain.entities.checkpoint import Precision
from lilyvoc.infra.services.train_service import TrainingDataset, TrainService


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "train", help="Train or resume from the latest checkpoint."
    )
    parser.add_argument("--data", help="Feature directory (default paths.data_dir).")
    parser.add_argument(
        "--checkpoints", help="Checkpoint directory (default paths.checkpoint_dir)."
    )
    parser.add_argument(
        "--metrics", help="Metrics JSON lines file (default paths.metrics_file)."
    )
    parser.add_argument("--steps", type=int, help="Stop at this step.")
    parser.add_argument(
        "--export", type=Path, help="Also write an inference-only checkpoint here."
    )
    parser.add_argument(
        "--precision",
        type=Precision,
        choices=list(Precision),
        default=Precision.F32,
        help="Parameter precision of the exported checkpoint.",
    )
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    config = config_from_args(args)
    features = get_feature_repository(optional_path(args.data), config)
    dataset = asyncio.run(TrainingDataset.load(features, get_wav_driver(), config))
    service = TrainService(
        config,
        dataset,
        get_checkpoint_repository(optional_path(args.checkpoints), config),
        get_metrics_repository(optional_path(args.metrics), config),
    )
    trainer, report = service.run(args.steps)
    if args.export is not None:
        exported = service.export(trainer, args.export, args.precision)
        report = report.model_copy(update={"export": str(exported)})
    print(report.model_dump_json(indent=2))
    return 0
