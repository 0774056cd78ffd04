import asyncio
from argparse import Namespace
from pathlib import Path
from typing import Any

from lilyvoc.dependencies import get_wav_driver
from lilyvoc.infra.repositories.checkpoint_repository import CheckpointRepository
from lilyvoc.infra.services.synth_service import SynthService


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("synth", help="Render a feature file to WAV.")
    parser.add_argument("checkpoint", type=Path, help="Checkpoint or export.")
    parser.add_argument("features", type=Path, help="Feature file of one clip.")
    parser.add_argument("output", type=Path, help="Output WAV path.")
    parser.add_argument(
        "--stats",
        type=Path,
        help="Corpus statistics (default stats.feat next to the features).",
    )
    parser.add_argument("--seed", type=int, help="Noise seed (default train.seed).")
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    # The model configuration comes from the checkpoint, not from --config.
    checkpoints = CheckpointRepository(args.checkpoint.parent)
    service = SynthService(checkpoints, get_wav_driver())
    report = asyncio.run(
        service.run(args.checkpoint, args.features, args.output, args.stats, args.seed)
    )
    print(report.model_dump_json(indent=2))
    return 0
