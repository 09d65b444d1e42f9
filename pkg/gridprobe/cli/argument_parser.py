"""Command-line argument parser for gridprobe."""

import argparse
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..domain.models import Condition, RenderMode, Split, TaskKind
from ..infrastructure.config_loader import PRESETS
from ..infrastructure.offline_endpoints import ENDPOINT_KINDS

COMMANDS = ("generate", "render", "infer", "score", "analyze")


@dataclass(frozen=True)
class CommandOptions:
    """Parsed flags shared by every subcommand; unset overrides stay None."""
    command: str
    config_path: Optional[str] = None
    preset: Optional[str] = None
    task: Optional[TaskKind] = None
    sizes: Tuple[int, ...] = ()
    count: Optional[int] = None
    seed: Optional[int] = None
    conditions: Tuple[Condition, ...] = ()
    out: Optional[str] = None
    mode: Optional[RenderMode] = None
    splits: Tuple[Split, ...] = (Split.TEST,)
    endpoint_kind: Optional[str] = None
    parallelism: Optional[int] = None
    retry_failed: bool = False
    verbose: bool = False
    quiet: bool = False


class GridProbeArgumentParser:
    """Argument parser for the gridprobe command-line interface."""

    def __init__(self):
        self.parser = self._create_parser()

    @staticmethod
    def _add_common(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            '--config',
            dest='config_path',
            metavar='FILE',
            help='YAML run configuration (defaults are built from the presets)',
        )
        parser.add_argument(
            '--preset',
            choices=sorted(PRESETS),
            help='Use one built-in dataset preset when no --config is given',
        )
        parser.add_argument(
            '--task',
            choices=[t.value for t in TaskKind],
            help='Only handle datasets of this task',
        )
        parser.add_argument(
            '--size',
            dest='sizes',
            type=int,
            action='append',
            metavar='N',
            help='Replace the dataset sizes (repeatable)',
        )
        parser.add_argument(
            '--count',
            type=int,
            metavar='N',
            help='Instances per size (total for mixed datasets)',
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Master seed',
        )
        parser.add_argument(
            '--condition',
            dest='conditions',
            choices=[c.value for c in Condition],
            action='append',
            help='Presentation condition (repeatable; default text and visual)',
        )
        parser.add_argument(
            '--out',
            metavar='DIR',
            help='Output directory',
        )
        parser.add_argument(
            '--mode',
            choices=[m.value for m in RenderMode],
            help='Render mode (default: the native layout of each task)',
        )
        parser.add_argument(
            '--split',
            choices=['train', 'test', 'all'],
            default='test',
            help='Which split to render, infer or score (default: test)',
        )
        parser.add_argument(
            '--endpoint',
            dest='endpoint_kind',
            choices=ENDPOINT_KINDS,
            help='Override the endpoint kind from the config',
        )
        parser.add_argument(
            '-j', '--parallelism',
            type=int,
            metavar='N',
            help='Requests or render jobs in flight',
        )
        parser.add_argument(
            '--retry-failed',
            action='store_true',
            help='Resubmit requests whose checkpointed record failed',
        )
        verbosity = parser.add_mutually_exclusive_group()
        verbosity.add_argument(
            '-v', '--verbose',
            action='store_true',
            help='Debug logging',
        )
        verbosity.add_argument(
            '-q', '--quiet',
            action='store_true',
            help='Only warnings and errors; no progress bar',
        )

    def _create_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog='gridprobe',
            description='gridprobe - text vs. rendered-layout probes on 2D tasks',
            epilog="""
Examples:
  gridprobe generate --task transpose --size 12 --count 600     # 500 train / 100 test
  gridprobe generate --preset life-mix --count 1800             # 4x4, 5x5, 6x6 at 1:1:1
  gridprobe render --config run.yaml --mode flow --task lu      # serialized text as image
  gridprobe infer --config run.yaml --condition text --condition visual
  gridprobe infer --config run.yaml --endpoint oracle           # offline wiring check
  gridprobe score --config run.yaml
  gridprobe analyze --config run.yaml                           # accuracy.csv + heatmaps
            """,
            formatter_class=argparse.RawDescriptionHelpFormatter
        )
        subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
        helps = {
            'generate': 'Generate datasets and write them with a manifest',
            'render': 'Render dataset inputs to PNG images',
            'infer': 'Query the model endpoint (resumable)',
            'score': 'Score inference logs against the gold targets',
            'analyze': 'Write accuracy tables and error heatmaps',
        }
        for command in COMMANDS:
            self._add_common(subparsers.add_parser(command, help=helps[command]))
        return parser

    def parse_args(self, args: Optional[List[str]] = None) -> CommandOptions:
        parsed = self.parser.parse_args(args)
        if not parsed.command:
            self.parser.error("no command given; expected one of " + ", ".join(COMMANDS))

        if parsed.split == 'all':
            splits = (Split.TRAIN, Split.TEST)
        else:
            splits = (Split(parsed.split),)

        return CommandOptions(
            command=parsed.command,
            config_path=parsed.config_path,
            preset=parsed.preset,
            task=TaskKind(parsed.task) if parsed.task else None,
            sizes=tuple(parsed.sizes or ()),
            count=parsed.count,
            seed=parsed.seed,
            conditions=tuple(dict.fromkeys(Condition(c) for c in parsed.conditions or ())),
            out=parsed.out,
            mode=RenderMode(parsed.mode) if parsed.mode else None,
            splits=splits,
            endpoint_kind=parsed.endpoint_kind,
            parallelism=parsed.parallelism,
            retry_failed=parsed.retry_failed,
            verbose=parsed.verbose,
            quiet=parsed.quiet,
        )
